#pragma once

#include <stdexcept>
#include <string>

namespace trapping {

/// Precondition or range violation in a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every site of the operator domain is a hard trap.
class FullyTrapped : public std::runtime_error {
 public:
  FullyTrapped() : std::runtime_error("fully trapped: no active sites remain") {}
};

/// A numerical routine ran out of iterations before meeting its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A random walk left the stored potential before the requested time.
class WalkEscaped : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trapping
