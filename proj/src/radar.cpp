#include "pulsecmp/radar.hpp"

#include "pulsecmp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pulsecmp {

void validate(const RadarCube& cube) {
  if (cube.frames == 0 || cube.antennas == 0 || cube.chirps == 0 || cube.samples == 0) {
    throw Error(ErrorCode::kInvalidArgument, "radar cube dimensions must all be >= 1");
  }
  if (cube.antennas > kMaxAntennas) {
    throw Error(ErrorCode::kInvalidArgument,
                "radar cube has " + std::to_string(cube.antennas) + " antennas, at most 8 supported");
  }
  if (cube.data.size() != cube.frames * cube.antennas * cube.chirps * cube.samples) {
    throw Error(ErrorCode::kInvalidArgument, "radar cube payload does not match its dimensions");
  }
  if (!(cube.frame_rate_hz > 0.0) || !(cube.fast_time_rate_hz > 0.0) || !(cube.carrier_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "radar cube rates must be positive");
  }
}

RadarCube chirp_mean_removal(RadarCube cube) {
  validate(cube);
  for (std::size_t f = 0; f < cube.frames; ++f) {
    for (std::size_t a = 0; a < cube.antennas; ++a) {
      for (std::size_t c = 0; c < cube.chirps; ++c) {
        std::span<double> chirp = cube.chirp(f, a, c);
        const double m = mean(chirp);
        for (double& v : chirp) v -= m;
      }
    }
  }
  return cube;
}

SlowTimeCube extract_slow_time(const RadarCube& cube, std::size_t max_range_bins) {
  validate(cube);
  if (cube.samples < 2) {
    throw Error(ErrorCode::kInputTooShort, "chirps need at least 2 samples");
  }
  const std::size_t one_sided = cube.samples / 2 + 1;
  SlowTimeCube st;
  st.frames = cube.frames;
  st.antennas = cube.antennas;
  st.bins = max_range_bins == 0 ? one_sided : std::min(max_range_bins, one_sided);
  st.frame_rate_hz = cube.frame_rate_hz;
  st.data.assign(st.frames * st.antennas * st.bins, {0.0, 0.0});
  const double inv_chirps = 1.0 / static_cast<double>(cube.chirps);
  for (std::size_t f = 0; f < cube.frames; ++f) {
    for (std::size_t a = 0; a < cube.antennas; ++a) {
      std::complex<double>* out = st.data.data() + st.index(f, a, 0);
      for (std::size_t c = 0; c < cube.chirps; ++c) {
        const auto spectrum = range_fft(cube.chirp(f, a, c));
        for (std::size_t b = 0; b < st.bins; ++b) out[b] += spectrum[b];
      }
      for (std::size_t b = 0; b < st.bins; ++b) out[b] *= inv_chirps;
    }
  }
  return st;
}

namespace {

bool has_stable_echo(std::span<const double> magnitude) {
  const double m = mean(magnitude);
  if (!(m > 0.0)) return false;
  double var = 0.0;
  for (double v : magnitude) var += (v - m) * (v - m);
  const double sd = std::sqrt(var / static_cast<double>(magnitude.size()));
  return m >= kEchoStabilityRatio * sd;
}

std::span<const double> central_90(std::span<const double> x) {
  const std::size_t margin = x.size() / 20;
  return x.subspan(margin, x.size() - 2 * margin);
}

}  // namespace

TimeSeries bandpass_or_flat(const TimeSeries& x, const BandpassSpec& filter) {
  TimeSeries y = butterworth_bandpass(x, filter);
  double level = 0.0;
  for (double v : x.samples) level = std::max(level, std::abs(v));
  if (peak_to_peak(y.samples) <= 1e-9 * level) std::fill(y.samples.begin(), y.samples.end(), 0.0);
  return y;
}

PhaseGrid phase_per_bin(const SlowTimeCube& slow_time, const BandpassSpec& filter) {
  const double duration = static_cast<double>(slow_time.frames) / slow_time.frame_rate_hz;
  if (duration < kMinPhaseRecordingS) {
    throw Error(ErrorCode::kRecordingTooShort,
                "recording too short: " + std::to_string(duration) + " s, need at least 3 s");
  }
  validate_bandpass(filter, slow_time.frame_rate_hz);

  PhaseGrid grid;
  grid.antennas = slow_time.antennas;
  grid.bins = slow_time.bins;
  grid.series.resize(grid.antennas * grid.bins);
  grid.has_echo.assign(grid.antennas * grid.bins, false);

  std::vector<double> wrapped(slow_time.frames);
  std::vector<double> magnitude(slow_time.frames);
  for (std::size_t a = 0; a < grid.antennas; ++a) {
    for (std::size_t b = 0; b < grid.bins; ++b) {
      for (std::size_t f = 0; f < slow_time.frames; ++f) {
        const std::complex<double> v = slow_time.data[slow_time.index(f, a, b)];
        wrapped[f] = std::arg(v);
        magnitude[f] = std::abs(v);
      }
      TimeSeries& out = grid.series[a * grid.bins + b];
      out.sample_rate_hz = slow_time.frame_rate_hz;
      if (!has_stable_echo(magnitude)) {
        out.samples.assign(slow_time.frames, 0.0);
        continue;
      }
      grid.has_echo[a * grid.bins + b] = true;
      TimeSeries phase;
      phase.sample_rate_hz = slow_time.frame_rate_hz;
      phase.samples = unwrap_phase(std::span<const double>(wrapped));
      out = bandpass_or_flat(phase, filter);
    }
  }
  return grid;
}

BinSelection select_best_bin(const PhaseGrid& grid, std::vector<std::vector<double>>* per_bin_p2p) {
  if (grid.antennas == 0 || grid.bins == 0) {
    throw Error(ErrorCode::kEmptyInput, "no (antenna, bin) candidates");
  }
  if (per_bin_p2p) per_bin_p2p->assign(grid.antennas, std::vector<double>(grid.bins, 0.0));
  BinSelection best;
  bool first = true;
  for (std::size_t a = 0; a < grid.antennas; ++a) {
    for (std::size_t b = 0; b < grid.bins; ++b) {
      const double p2p = peak_to_peak(central_90(grid.at(a, b).samples));
      if (per_bin_p2p) (*per_bin_p2p)[a][b] = p2p;
      if (first || p2p > best.peak_to_peak) {
        best.antenna_index = a;
        best.range_bin = b;
        best.peak_to_peak = p2p;
        first = false;
      }
    }
  }
  return best;
}

PolarityResult correct_polarity(const TimeSeries& waveform, const PeakParams& params) {
  const PeakTrain train = detect_peaks(waveform, params);
  if (train.systolic_indices.size() < 3) {
    throw Error(ErrorCode::kInsufficientBeats, "insufficient beats for polarity check");
  }
  const auto& dia = train.diastolic_indices;
  double rise_sum = 0.0, decay_sum = 0.0;
  std::size_t rise_n = 0, decay_n = 0;
  for (std::size_t s : train.systolic_indices) {
    const auto after = std::upper_bound(dia.begin(), dia.end(), s);
    if (after != dia.begin()) {
      rise_sum += static_cast<double>(s - *std::prev(after));
      ++rise_n;
    }
    if (after != dia.end()) {
      decay_sum += static_cast<double>(*after - s);
      ++decay_n;
    }
  }
  PolarityResult result{waveform, false};
  if (rise_n == 0 || decay_n == 0) return result;
  const double rise = rise_sum / static_cast<double>(rise_n);
  const double decay = decay_sum / static_cast<double>(decay_n);
  if (rise > decay) {
    for (double& v : result.waveform.samples) v = -v;
    result.inverted = true;
  }
  return result;
}

RadarPulseResult process_radar(RadarCube cube, const RadarOptions& options) {
  validate(cube);
  if (cube.duration_s() < kMinRadarRecordingS) {
    throw Error(ErrorCode::kRecordingTooShort,
                "recording too short: " + std::to_string(cube.duration_s()) +
                    " s, radar processing needs at least 10 s");
  }
  cube = chirp_mean_removal(std::move(cube));
  const SlowTimeCube slow_time = extract_slow_time(cube, options.max_range_bins);
  cube = RadarCube{};  // release the raw samples early

  const PhaseGrid grid = phase_per_bin(slow_time, options.filter);
  RadarPulseResult result;
  result.selection = select_best_bin(grid, &result.per_bin_p2p);
  result.waveform = grid.at(result.selection.antenna_index, result.selection.range_bin);
  try {
    PolarityResult polarity = correct_polarity(result.waveform, options.peaks);
    result.waveform = std::move(polarity.waveform);
    result.selection.inverted = polarity.inverted;
  } catch (const Error& e) {
    // Too few beats to judge orientation: keep the waveform as selected.
    if (e.code() != ErrorCode::kInsufficientBeats) throw;
  }
  return result;
}

}  // namespace pulsecmp
