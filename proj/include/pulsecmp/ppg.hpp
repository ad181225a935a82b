#pragma once

#include "pulsecmp/beats.hpp"
#include "pulsecmp/signal.hpp"

#include <map>
#include <string>

namespace pulsecmp {

struct PpgRecording {
  std::map<std::string, TimeSeries> channels;
  std::map<std::string, std::string> metadata;
};

struct PulseOptions {
  BandpassSpec filter{};
  PeakParams peaks{};
};

inline constexpr double kMinPulseRecordingS = 10.0;

struct OrientedWaveform {
  TimeSeries waveform;
  bool inverted = false;
};

// "green_0" when present, otherwise the alphabetically first channel.
std::string default_channel(const PpgRecording& rec);

// Bandpass plus the shared rise/decay polarity rule. Used for PPG and the
// reference pressure alike; too few beats leaves the orientation untouched.
OrientedWaveform orient_pulse_waveform(const TimeSeries& raw, const PulseOptions& options = {});

TimeSeries process_ppg(const PpgRecording& rec, const std::string& channel,
                       const PulseOptions& options = {});

}  // namespace pulsecmp
