#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ehglue {

enum class ErrorCode {
  NonPositiveDuration,
  GainNonPositive,
  NegativeQuantity,
  ArrivalExceedsCapacity,
  KindMismatch,
  ShapeMismatch,
  ValidationFailed,
  GainOrderViolation,
  Infeasible,
  NeverFeasible,
  NoConvergence,
  InfeasibleInstance,
  TooLarge,
  StateSpaceTooLarge,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` distinguishes the cause.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for input problems (bad scenario, bad file) as opposed to solver
  /// failures. The CLI maps the two groups to different exit codes.
  bool is_validation_error() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace ehglue
