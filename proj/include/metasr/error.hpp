#pragma once

#include <stdexcept>
#include <string>

namespace metasr {

/// Raised when a caller breaks an operation's precondition (shape or
/// length mismatch, missing metadata, non-scalar loss).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for invalid settings: even kernel sizes, out-of-range QPI,
/// degenerate resize targets, malformed files.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values reached the optimizer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace metasr
