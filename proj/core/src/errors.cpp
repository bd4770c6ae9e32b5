#include "regbid/errors.hpp"

namespace regbid {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kBoundsViolation: return "BoundsViolation";
    case ErrorCode::kInvalidDispatch: return "InvalidDispatch";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kOutOfRangeDepth: return "OutOfRangeDepth";
    case ErrorCode::kNonMonotoneStress: return "NonMonotoneStress";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kSignalEmpty: return "SignalEmpty";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroCapacity: return "ZeroCapacity";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kCapExceeded: return "CapExceeded";
    case ErrorCode::kNonInvertible: return "NonInvertible";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kGapError: return "GapError";
    case ErrorCode::kBadParams: return "BadParams";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace regbid
