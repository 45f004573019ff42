#pragma once

#include <stdexcept>
#include <string>

namespace treepart {

/// Malformed or inconsistent user input (documents, arguments, preconditions).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal consistency check failed.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace treepart
