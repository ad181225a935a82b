#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pulsecmp {

enum class ErrorCode {
  kEmptyInput,
  kInvalidArgument,
  kInvalidCutoff,
  kInputTooShort,
  kRecordingTooShort,
  kInsufficientBeats,
  kInvalidPressures,
  kZeroVariance,
  kZeroNorm,
  kDegenerateWaveform,
  kPhaseAmbiguity,
  kMissingChannel,
  kMissingColumn,
  kNonMonotonic,
  kNonUniformSampling,
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedPayload,
  kTrailingData,
  kDimensionOverflow,
  kParseError,
  kIoError,
  kConfigError,
  kNeedTwoModalities,
};

std::string_view to_string(ErrorCode code);

// All library failures carry a code so callers (and the CLI exit status)
// can tell input problems apart without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pulsecmp
