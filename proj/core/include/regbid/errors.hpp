#pragma once

#include <stdexcept>
#include <string>

namespace regbid {

enum class ErrorCode {
  kInvalidSpec,
  kBoundsViolation,
  kInvalidDispatch,
  kEmptySeries,
  kOutOfRangeDepth,
  kNonMonotoneStress,
  kInstanceTooLarge,
  kSignalEmpty,
  kLengthMismatch,
  kZeroCapacity,
  kInsufficientData,
  kOutOfRange,
  kCapExceeded,
  kNonInvertible,
  kParseError,
  kGapError,
  kBadParams,
  kDegenerate,
  kIoError,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported as Error; what() carries a
// "module: detail" message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace regbid
