#include "pulsecmp/synth.hpp"

#include "pulsecmp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pulsecmp {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void validate(const PulseModel& m) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "invalid pulse model: " + what);
  };
  if (!(m.hr_mean_bpm >= 20.0 && m.hr_mean_bpm <= 240.0)) fail("hr_mean_bpm must be in [20, 240]");
  if (!(m.ibi_sd_ms >= 0.0)) fail("ibi_sd_ms must be >= 0");
  double amp_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (!(m.amps[k] >= 0.0)) fail("amplitudes must be >= 0");
    if (!(m.widths[k] > 0.0)) fail("widths must be > 0");
    if (!(m.centers[k] > 0.0 && m.centers[k] < 1.0)) fail("centers must lie in (0, 1)");
    if (k > 0 && !(m.centers[k] > m.centers[k - 1])) fail("centers must be strictly increasing");
    amp_sum += m.amps[k];
  }
  if (!(amp_sum > 0.0)) fail("at least one amplitude must be positive");
  if (!(m.runoff_amp >= 0.0)) fail("runoff_amp must be >= 0");
  if (!(m.runoff_exp > 0.0)) fail("runoff_exp must be > 0");
  if (!(m.displacement_amp_m > 0.0)) fail("displacement_amp_m must be > 0");
}

double beat_shape(const PulseModel& m, double phi) {
  double y = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double z = (phi - m.centers[k]) / m.widths[k];
    y += m.amps[k] * std::exp(-0.5 * z * z);
  }
  const double z0 = (phi - m.centers[0]) / m.widths[0];
  y += m.runoff_amp * 0.5 * std::erfc(-z0 / std::sqrt(2.0)) * (1.0 - std::pow(phi, m.runoff_exp));
  return y;
}

std::vector<double> SynthGroundTruth::ibi_ms() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < beat_times_s.size(); ++k) {
    out.push_back(1000.0 * (beat_times_s[k] - beat_times_s[k - 1]));
  }
  return out;
}

std::pair<TimeSeries, SynthGroundTruth> generate_waveform(const PulseModel& model, double duration_s,
                                                          double fs_hz, std::uint64_t seed) {
  validate(model);
  if (!(duration_s >= 10.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic duration must be >= 10 s");
  }
  if (!(fs_hz >= 50.0)) throw Error(ErrorCode::kInvalidArgument, "synthetic rate must be >= 50 Hz");

  Rng rng(derive_seed(seed, 0));
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs_hz));
  const double nominal_s = 60.0 / model.hr_mean_bpm;

  TimeSeries wave;
  wave.sample_rate_hz = fs_hz;
  wave.samples.assign(n, 0.0);
  SynthGroundTruth truth;
  truth.seed = seed;
  truth.model = model;

  // The record opens part-way through a beat.
  double start = -rng.uniform() * nominal_s;
  std::size_t i = 0;
  while (i < n) {
    const double ibi_ms = std::clamp(rng.normal(1000.0 * nominal_s, model.ibi_sd_ms), 251.0, 2999.0);
    const double ibi_s = ibi_ms / 1000.0;
    if (start >= 0.0) truth.beat_times_s.push_back(start);
    for (; i < n && static_cast<double>(i) / fs_hz < start + ibi_s; ++i) {
      wave.samples[i] = beat_shape(model, (static_cast<double>(i) / fs_hz - start) / ibi_s);
    }
    start += ibi_s;
  }

  const double peak = *std::max_element(wave.samples.begin(), wave.samples.end());
  for (double& v : wave.samples) v /= peak;
  truth.displacement = wave;
  for (double& v : truth.displacement.samples) v *= model.displacement_amp_m;
  return {std::move(wave), std::move(truth)};
}

void validate(const CubeGeometry& g) {
  if (g.antennas == 0 || g.antennas > kMaxAntennas) {
    throw Error(ErrorCode::kInvalidArgument, "geometry needs 1..8 antennas");
  }
  if (g.chirps == 0) throw Error(ErrorCode::kInvalidArgument, "geometry needs at least 1 chirp");
  if (g.samples < 8) throw Error(ErrorCode::kInvalidArgument, "geometry needs at least 8 samples per chirp");
  if (g.target_antenna >= g.antennas) {
    throw Error(ErrorCode::kInvalidArgument, "target antenna out of range");
  }
  if (g.target_bin == 0 || g.target_bin >= g.samples / 2) {
    throw Error(ErrorCode::kInvalidArgument, "target bin must lie strictly between DC and Nyquist");
  }
  if (!(g.fast_time_rate_hz > 0.0) || !(g.carrier_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "geometry rates must be positive");
  }
}

RadarCube synth_radar_cube(const TimeSeries& displacement_m, const CubeGeometry& geometry,
                           double snr_db, std::uint64_t seed) {
  validate(geometry);
  if (displacement_m.empty()) throw Error(ErrorCode::kEmptyInput, "empty displacement series");
  if (std::isnan(snr_db)) throw Error(ErrorCode::kInvalidArgument, "snr_db is NaN");

  RadarCube cube;
  cube.frames = displacement_m.size();
  cube.antennas = geometry.antennas;
  cube.chirps = geometry.chirps;
  cube.samples = geometry.samples;
  cube.frame_rate_hz = displacement_m.sample_rate_hz;
  cube.fast_time_rate_hz = geometry.fast_time_rate_hz;
  cube.carrier_hz = geometry.carrier_hz;
  const double lambda = cube.wavelength_m();

  double peak = 0.0;
  for (double d : displacement_m.samples) peak = std::max(peak, std::abs(d));
  if (peak >= lambda / 4.0) {
    throw Error(ErrorCode::kPhaseAmbiguity,
                "phase ambiguity: displacement peak " + std::to_string(peak) +
                    " m reaches lambda/4 = " + std::to_string(lambda / 4.0) + " m");
  }

  const std::size_t ns = geometry.samples;
  const double phase_scale = 4.0 * kPi / lambda;
  std::vector<double> phase(cube.frames);
  for (std::size_t f = 0; f < cube.frames; ++f) {
    phase[f] = phase_scale * (geometry.range_offset_m + displacement_m.samples[f]);
  }
  const double noise_sd =
      std::isinf(snr_db) && snr_db > 0.0
          ? 0.0
          : peak_to_peak(phase) / std::pow(10.0, snr_db / 20.0) *
                std::sqrt(static_cast<double>(ns * geometry.chirps) / 2.0);

  // Static returns: one chirp per antenna, reused for every chirp and frame.
  Rng clutter_rng(derive_seed(seed, 1));
  std::vector<double> clutter(geometry.antennas * ns, 0.0);
  for (std::size_t a = 0; a < geometry.antennas; ++a) {
    for (std::size_t k = 1; k < ns / 2; ++k) {
      const double theta = 2.0 * kPi * clutter_rng.uniform();
      if (a == geometry.target_antenna && k == geometry.target_bin) continue;
      for (std::size_t s = 0; s < ns; ++s) {
        clutter[a * ns + s] += std::cos(2.0 * kPi * static_cast<double>(k * s % ns) / ns + theta);
      }
    }
  }
  std::vector<double> basis_cos(ns), basis_sin(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const double w = 2.0 * kPi * static_cast<double>(geometry.target_bin * s % ns) / ns;
    basis_cos[s] = std::cos(w);
    basis_sin[s] = std::sin(w);
  }

  Rng noise_rng(derive_seed(seed, 2));
  cube.data.resize(cube.frames * cube.antennas * cube.chirps * ns);
  std::vector<double> target(ns);
  for (std::size_t f = 0; f < cube.frames; ++f) {
    const double c = std::cos(phase[f]);
    const double s = std::sin(phase[f]);
    for (std::size_t i = 0; i < ns; ++i) target[i] = basis_cos[i] * c - basis_sin[i] * s;
    for (std::size_t a = 0; a < cube.antennas; ++a) {
      const double* base = clutter.data() + a * ns;
      const bool is_target = a == geometry.target_antenna;
      for (std::size_t ch = 0; ch < cube.chirps; ++ch) {
        double* out = cube.data.data() + cube.index(f, a, ch, 0);
        for (std::size_t i = 0; i < ns; ++i) {
          double v = base[i];
          if (is_target) v += target[i];
          if (noise_sd > 0.0) v += noise_sd * noise_rng.normal();
          out[i] = static_cast<double>(static_cast<float>(v));
        }
      }
    }
  }
  cube.metadata["generator"] = "pulsecmp synth";
  cube.metadata["seed"] = std::to_string(seed);
  cube.metadata["snr_db"] = std::to_string(snr_db);
  return cube;
}

PpgRecording synth_ppg(const TimeSeries& waveform, const PpgSynthParams& p, std::uint64_t seed) {
  if (!(p.decay_tau_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "decay_tau_s must be > 0");
  if (!(p.noise_sd >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_sd must be >= 0");
  if (waveform.empty()) throw Error(ErrorCode::kEmptyInput, "empty waveform");

  const double fs = waveform.sample_rate_hz;
  const double alpha = std::exp(-1.0 / (p.decay_tau_s * fs));
  const double sign = p.inverted ? -1.0 : 1.0;
  Rng rng(derive_seed(seed, 3));

  TimeSeries out;
  out.sample_rate_hz = fs;
  out.start_time_s = waveform.start_time_s;
  out.samples.resize(waveform.size());
  double state = waveform.samples.front();
  for (std::size_t i = 0; i < waveform.size(); ++i) {
    state = alpha * state + (1.0 - alpha) * waveform.samples[i];
    const double t = static_cast<double>(i) / fs;
    double v = p.dc_offset + p.drift_amp * std::sin(2.0 * kPi * p.drift_hz * t) +
               sign * p.gain_counts * state;
    if (p.noise_sd > 0.0) v += p.noise_sd * rng.normal();
    out.samples[i] = v;
  }
  PpgRecording rec;
  rec.channels.emplace("green_0", std::move(out));
  rec.metadata["generator"] = "pulsecmp synth";
  rec.metadata["seed"] = std::to_string(seed);
  return rec;
}

TimeSeries synth_reference(const TimeSeries& waveform, double sbp, double dbp) {
  if (!(dbp > 0.0) || !(sbp > dbp)) {
    throw Error(ErrorCode::kInvalidPressures, "invalid pressures: need sbp > dbp > 0");
  }
  if (waveform.empty()) throw Error(ErrorCode::kEmptyInput, "empty waveform");
  const auto [lo, hi] = std::minmax_element(waveform.samples.begin(), waveform.samples.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw Error(ErrorCode::kDegenerateWaveform, "degenerate waveform");
  TimeSeries out = waveform;
  const double lo_v = *lo;
  for (double& v : out.samples) v = dbp + (sbp - dbp) * (v - lo_v) / range;
  return out;
}

SyntheticRecording simulate(const SimulationConfig& config) {
  auto [wave, truth] = generate_waveform(config.model, config.duration_s, config.fs_hz, config.seed);
  truth.target_antenna = config.geometry.target_antenna;
  truth.target_range_bin = config.geometry.target_bin;
  SyntheticRecording rec;
  rec.radar = synth_radar_cube(truth.displacement, config.geometry, config.snr_db, config.seed);
  rec.ppg = synth_ppg(wave, config.ppg, config.seed);
  rec.reference = synth_reference(wave, config.sbp, config.dbp);
  rec.truth = std::move(truth);
  return rec;
}

}  // namespace pulsecmp
