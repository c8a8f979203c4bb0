#include "meanrisk/error.hpp"

namespace meanrisk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ConstraintLimitExceeded: return "ConstraintLimitExceeded";
    case ErrorCode::BoxTooLarge: return "BoxTooLarge";
    case ErrorCode::RecourseInfeasible: return "RecourseInfeasible";
    case ErrorCode::RecourseUnbounded: return "RecourseUnbounded";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::MissingDeclaredExponent: return "MissingDeclaredExponent";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace meanrisk
