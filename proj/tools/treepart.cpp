#include <iostream>
#include <string>
#include <vector>

#include "treepart/cli/driver.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return treepart::cli::run(args, std::cout, std::cerr);
}
