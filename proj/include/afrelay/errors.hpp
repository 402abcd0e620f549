#pragma once

#include <stdexcept>
#include <string>

namespace afrelay {

/// Raised when an argument violates an operation's precondition
/// (shape mismatch, non-Hermitian input, indefinite matrix, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative numerical routine cannot meet its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace afrelay
