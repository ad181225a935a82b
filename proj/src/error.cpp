#include "pulsecmp/error.hpp"

namespace pulsecmp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInvalidCutoff: return "invalid_cutoff";
    case ErrorCode::kInputTooShort: return "input_too_short";
    case ErrorCode::kRecordingTooShort: return "recording_too_short";
    case ErrorCode::kInsufficientBeats: return "insufficient_beats";
    case ErrorCode::kInvalidPressures: return "invalid_pressures";
    case ErrorCode::kZeroVariance: return "zero_variance";
    case ErrorCode::kZeroNorm: return "zero_norm";
    case ErrorCode::kDegenerateWaveform: return "degenerate_waveform";
    case ErrorCode::kPhaseAmbiguity: return "phase_ambiguity";
    case ErrorCode::kMissingChannel: return "missing_channel";
    case ErrorCode::kMissingColumn: return "missing_column";
    case ErrorCode::kNonMonotonic: return "non_monotonic";
    case ErrorCode::kNonUniformSampling: return "non_uniform_sampling";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported_version";
    case ErrorCode::kTruncatedPayload: return "truncated_payload";
    case ErrorCode::kTrailingData: return "trailing_data";
    case ErrorCode::kDimensionOverflow: return "dimension_overflow";
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kConfigError: return "config_error";
    case ErrorCode::kNeedTwoModalities: return "need_two_modalities";
  }
  return "unknown";
}

}  // namespace pulsecmp
