#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treepart::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInvariant = 3;

/**
 * Entry point of the command-line tool; `args` excludes the program name.
 * Verbs: partition, rebalance, metrics, generate. Returns the exit status and
 * writes diagnostics to `err`.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treepart::cli
