#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace meanrisk {

enum class ErrorCode {
  EmptySupport,
  NegativeWeight,
  OutOfRange,
  DimMismatch,
  InvalidSpec,
  InvalidArgument,
  NumericalFailure,
  ConstraintLimitExceeded,
  BoxTooLarge,
  RecourseInfeasible,
  RecourseUnbounded,
  InvalidExponent,
  MissingDeclaredExponent,
  DimensionUnsupported,
  EmptySet,
  UnknownColumn,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same code, message extended with where the failure happened.
  Error with_context(const std::string& context) const {
    return Error(code_, detail_ + " " + context);
  }

  /// True for failures of the mathematical model itself rather than of the input.
  bool is_model_error() const noexcept {
    return code_ == ErrorCode::RecourseInfeasible ||
           code_ == ErrorCode::RecourseUnbounded ||
           code_ == ErrorCode::NumericalFailure ||
           code_ == ErrorCode::BoxTooLarge ||
           code_ == ErrorCode::ConstraintLimitExceeded;
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace meanrisk
