#include "pulsecmp/ppg.hpp"

#include "pulsecmp/error.hpp"
#include "pulsecmp/radar.hpp"

#include <string>

namespace pulsecmp {

std::string default_channel(const PpgRecording& rec) {
  if (rec.channels.empty()) throw Error(ErrorCode::kMissingChannel, "PPG recording has no channels");
  if (rec.channels.count("green_0")) return "green_0";
  return rec.channels.begin()->first;
}

OrientedWaveform orient_pulse_waveform(const TimeSeries& raw, const PulseOptions& options) {
  if (raw.duration_s() < kMinPulseRecordingS) {
    throw Error(ErrorCode::kRecordingTooShort,
                "recording too short: " + std::to_string(raw.duration_s()) +
                    " s, need at least 10 s");
  }
  OrientedWaveform out{bandpass_or_flat(raw, options.filter), false};
  try {
    PolarityResult polarity = correct_polarity(out.waveform, options.peaks);
    out.waveform = std::move(polarity.waveform);
    out.inverted = polarity.inverted;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInsufficientBeats) throw;
  }
  return out;
}

TimeSeries process_ppg(const PpgRecording& rec, const std::string& channel,
                       const PulseOptions& options) {
  const auto it = rec.channels.find(channel);
  if (it == rec.channels.end()) {
    std::string available;
    for (const auto& [name, series] : rec.channels) {
      if (!available.empty()) available += ", ";
      available += name;
    }
    throw Error(ErrorCode::kMissingChannel,
                "channel '" + channel + "' not found; available channels: " + available);
  }
  return orient_pulse_waveform(it->second, options).waveform;
}

}  // namespace pulsecmp
