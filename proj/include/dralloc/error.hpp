#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dralloc {

enum class ErrorCode {
  NegativeWeight,
  ArityMismatch,
  UnknownCoord,
  UnboundedGradient,
  InvalidScalar,
  NegativeInput,
  PropertyViolation,
  OutOfRange,
  GroundSetTooLarge,
  InvalidStepSize,
  MalformedInstance,
  InfeasibleDual,
  RatioShortfall,
  DimensionTooLarge,
  BadParams,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

/// Exception type used throughout the library. The code identifies the
/// failure category; what() carries a human-readable detail message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dralloc
