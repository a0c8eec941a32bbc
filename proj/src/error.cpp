#include "dralloc/error.hpp"

namespace dralloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UnknownCoord: return "UnknownCoord";
    case ErrorCode::UnboundedGradient: return "UnboundedGradient";
    case ErrorCode::InvalidScalar: return "InvalidScalar";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::PropertyViolation: return "PropertyViolation";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::GroundSetTooLarge: return "GroundSetTooLarge";
    case ErrorCode::InvalidStepSize: return "InvalidStepSize";
    case ErrorCode::MalformedInstance: return "MalformedInstance";
    case ErrorCode::InfeasibleDual: return "InfeasibleDual";
    case ErrorCode::RatioShortfall: return "RatioShortfall";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace dralloc
