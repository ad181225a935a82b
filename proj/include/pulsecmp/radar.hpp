#pragma once

#include "pulsecmp/beats.hpp"
#include "pulsecmp/signal.hpp"

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pulsecmp {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kDefaultCarrierHz = 60e9;
inline constexpr std::size_t kMaxAntennas = 8;

// Raw IF samples indexed [frame][antenna][chirp][sample], dense.
struct RadarCube {
  std::size_t frames = 0;
  std::size_t antennas = 0;
  std::size_t chirps = 0;
  std::size_t samples = 0;
  std::vector<double> data;
  double frame_rate_hz = kDefaultSampleRateHz;
  double fast_time_rate_hz = 2e6;
  double carrier_hz = kDefaultCarrierHz;
  std::map<std::string, std::string> metadata;

  std::size_t index(std::size_t f, std::size_t a, std::size_t c, std::size_t s) const noexcept {
    return ((f * antennas + a) * chirps + c) * samples + s;
  }
  std::span<double> chirp(std::size_t f, std::size_t a, std::size_t c) {
    return {data.data() + index(f, a, c, 0), samples};
  }
  std::span<const double> chirp(std::size_t f, std::size_t a, std::size_t c) const {
    return {data.data() + index(f, a, c, 0), samples};
  }
  double wavelength_m() const noexcept { return kSpeedOfLight / carrier_hz; }
  double duration_s() const noexcept { return static_cast<double>(frames) / frame_rate_hz; }
};

// Throws Error(kInvalidArgument) on empty dimensions, too many antennas, a
// size mismatch or non-positive rates.
void validate(const RadarCube& cube);

// One complex value per (frame, antenna, range bin).
struct SlowTimeCube {
  std::size_t frames = 0;
  std::size_t antennas = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> data;
  double frame_rate_hz = kDefaultSampleRateHz;

  std::size_t index(std::size_t f, std::size_t a, std::size_t b) const noexcept {
    return (f * antennas + a) * bins + b;
  }
};

// Filtered, unwrapped phase per (antenna, bin). Bins without a stable echo
// (magnitude no steadier than noise) carry an all-zero series and
// has_echo = false.
struct PhaseGrid {
  std::size_t antennas = 0;
  std::size_t bins = 0;
  std::vector<TimeSeries> series;
  std::vector<bool> has_echo;

  const TimeSeries& at(std::size_t a, std::size_t b) const { return series[a * bins + b]; }
};

struct BinSelection {
  std::size_t antenna_index = 0;
  std::size_t range_bin = 0;
  double peak_to_peak = 0.0;
  bool inverted = false;
};

struct RadarPulseResult {
  TimeSeries waveform;
  BinSelection selection;
  std::vector<std::vector<double>> per_bin_p2p;  // [antenna][bin]
};

struct RadarOptions {
  BandpassSpec filter{};
  PeakParams peaks{};
  // 0 searches every one-sided bin.
  std::size_t max_range_bins = 0;
};

inline constexpr double kMinPhaseRecordingS = 3.0;
inline constexpr double kMinRadarRecordingS = 10.0;
// Ratio mean(|X|) / sd(|X|) below which a bin is treated as echo-free.
inline constexpr double kEchoStabilityRatio = 3.0;

RadarCube chirp_mean_removal(RadarCube cube);

SlowTimeCube extract_slow_time(const RadarCube& cube, std::size_t max_range_bins = 0);

PhaseGrid phase_per_bin(const SlowTimeCube& slow_time, const BandpassSpec& filter = {});

// Argmax of peak-to-peak over the central 90% of each series; ties go to
// the lower antenna, then the lower bin.
BinSelection select_best_bin(const PhaseGrid& grid,
                             std::vector<std::vector<double>>* per_bin_p2p = nullptr);

struct PolarityResult {
  TimeSeries waveform;
  bool inverted = false;
};

// Negates the waveform when its mean rise time (foot to systolic peak)
// exceeds its mean decay time (systolic peak to next foot).
PolarityResult correct_polarity(const TimeSeries& waveform, const PeakParams& params = {});

// Bandpassed copy of x, with numerically flat output (relative to the input
// level) replaced by exact zeros.
TimeSeries bandpass_or_flat(const TimeSeries& x, const BandpassSpec& filter);

RadarPulseResult process_radar(RadarCube cube, const RadarOptions& options = {});

}  // namespace pulsecmp
