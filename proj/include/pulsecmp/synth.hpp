#pragma once

#include "pulsecmp/ppg.hpp"
#include "pulsecmp/radar.hpp"
#include "pulsecmp/signal.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace pulsecmp {

// mt19937_64 with a fixed uniform mapping and Box-Muller normals, so the
// stream depends only on the seed and not on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Independent sub-stream seed for the k-th generator of one recording.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Beat shape over the beat phase phi in [0, 1): three Gaussian bumps
// (systolic, augmentation, dicrotic) plus a diastolic runoff term
// runoff_amp * Phi((phi - c0) / w0) * (1 - phi^runoff_exp). runoff_amp = 0
// gives the plain three-bump model.
struct PulseModel {
  double hr_mean_bpm = 62.0;
  double ibi_sd_ms = 30.0;
  std::array<double, 3> amps{1.0, 0.25, 0.15};
  std::array<double, 3> centers{0.18, 0.34, 0.55};
  std::array<double, 3> widths{0.06, 0.08, 0.07};
  double runoff_amp = 0.3;
  double runoff_exp = 6.0;
  double displacement_amp_m = 100e-6;
};

void validate(const PulseModel& model);

double beat_shape(const PulseModel& model, double phi);

struct SynthGroundTruth {
  std::vector<double> beat_times_s;  // diastolic feet
  TimeSeries displacement;           // m
  std::size_t target_range_bin = 0;
  std::size_t target_antenna = 0;
  std::uint64_t seed = 0;
  PulseModel model;

  std::vector<double> ibi_ms() const;
};

// Waveform scaled to a peak of 1; truth.displacement is the same waveform
// times model.displacement_amp_m.
std::pair<TimeSeries, SynthGroundTruth> generate_waveform(const PulseModel& model, double duration_s,
                                                          double fs_hz, std::uint64_t seed);

struct CubeGeometry {
  std::size_t antennas = 3;
  std::size_t chirps = 16;
  std::size_t samples = 64;
  std::size_t target_antenna = 1;
  std::size_t target_bin = 7;
  double fast_time_rate_hz = 2e6;
  double carrier_hz = kDefaultCarrierHz;
  double range_offset_m = 3e-3;
};

void validate(const CubeGeometry& geometry);

// Real IF cube. The target (antenna, bin) carries a tone whose phase follows
// 4*pi*(R0 + d)/lambda; every other bin below Nyquist carries a static tone
// of unit amplitude and random phase. White IF noise is scaled so the phase
// noise of one frame is peak-to-peak(target phase) / 10^(snr_db / 20).
// snr_db = +inf disables noise. Samples are quantized to float precision.
RadarCube synth_radar_cube(const TimeSeries& displacement_m, const CubeGeometry& geometry,
                           double snr_db, std::uint64_t seed);

struct PpgSynthParams {
  double decay_tau_s = 0.25;
  double gain_counts = 500.0;
  double dc_offset = 10000.0;
  double drift_amp = 100.0;
  double drift_hz = 0.05;
  double noise_sd = 2.0;
  // Reflective PPG falls as blood volume rises.
  bool inverted = true;
};

// Unit-area causal exponential smoothing of the waveform, then gain, DC,
// drift and white noise, emitted as channel "green_0".
PpgRecording synth_ppg(const TimeSeries& waveform, const PpgSynthParams& params, std::uint64_t seed);

// Affine map of the waveform range onto [dbp, sbp].
TimeSeries synth_reference(const TimeSeries& waveform, double sbp, double dbp);

struct SimulationConfig {
  PulseModel model;
  double duration_s = 60.0;
  double fs_hz = kDefaultSampleRateHz;
  CubeGeometry geometry;
  double snr_db = 40.0;
  PpgSynthParams ppg;
  double sbp = 120.0;
  double dbp = 80.0;
  std::uint64_t seed = 1;
};

struct SyntheticRecording {
  RadarCube radar;
  PpgRecording ppg;
  TimeSeries reference;
  SynthGroundTruth truth;
};

SyntheticRecording simulate(const SimulationConfig& config);

}  // namespace pulsecmp
