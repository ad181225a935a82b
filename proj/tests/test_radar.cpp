// Radar chain: mean removal, slow time, phase, bin selection, polarity.
#include "doctest.h"
#include "helpers.hpp"

#include "pulsecmp/error.hpp"
#include "pulsecmp/radar.hpp"
#include "pulsecmp/synth.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>

using namespace pulsecmp;

namespace {

RadarCube empty_cube(std::size_t frames, std::size_t antennas, std::size_t chirps, std::size_t samples) {
  RadarCube c;
  c.frames = frames;
  c.antennas = antennas;
  c.chirps = chirps;
  c.samples = samples;
  c.data.assign(frames * antennas * chirps * samples, 0.0);
  return c;
}

SlowTimeCube single_bin(std::size_t frames, const std::function<std::complex<double>(double)>& value) {
  SlowTimeCube s;
  s.frames = frames;
  s.antennas = 1;
  s.bins = 1;
  s.frame_rate_hz = 200.0;
  s.data.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) s.data[f] = value(static_cast<double>(f) / 200.0);
  return s;
}

// Foot-to-foot pulse: linear rise over `rise` s, linear decay for the rest of a 1 s beat.
TimeSeries sawtooth(double rise, double duration_s) {
  TimeSeries x;
  x.samples.resize(static_cast<std::size_t>(duration_s * 200.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double phi = std::fmod(x.time_at(i), 1.0);
    x.samples[i] = phi < rise ? phi / rise : (1.0 - phi) / (1.0 - rise);
  }
  return x;
}

PhaseGrid zero_grid(std::size_t antennas, std::size_t bins, std::size_t n) {
  PhaseGrid g;
  g.antennas = antennas;
  g.bins = bins;
  g.series.resize(antennas * bins);
  g.has_echo.assign(antennas * bins, false);
  for (auto& s : g.series) s.samples.assign(n, 0.0);
  return g;
}

}  // namespace

TEST_CASE("chirp_mean_removal: constant and two-sample chirps") {
  RadarCube c = empty_cube(1, 1, 2, 4);
  for (std::size_t s = 0; s < 4; ++s) c.chirp(0, 0, 0)[s] = 1.0;
  c = chirp_mean_removal(std::move(c));
  for (double v : c.chirp(0, 0, 0)) CHECK(v == 0.0);

  RadarCube d = empty_cube(1, 1, 1, 2);
  d.chirp(0, 0, 0)[1] = 2.0;
  d = chirp_mean_removal(std::move(d));
  CHECK(d.chirp(0, 0, 0)[0] == -1.0);
  CHECK(d.chirp(0, 0, 0)[1] == 1.0);
}

TEST_CASE("chirp_mean_removal: random cube has zero-mean chirps") {
  std::mt19937_64 rng(1);
  RadarCube c = empty_cube(5, 3, 4, 32);
  c.data = testutil::random_vector(rng, c.data.size(), -10.0, 30.0);
  c = chirp_mean_removal(std::move(c));
  for (std::size_t f = 0; f < 5; ++f)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(mean(c.chirp(f, a, k))) < 1e-12);
}

TEST_CASE("extract_slow_time: one chirp equals its range FFT") {
  std::mt19937_64 rng(2);
  RadarCube c = empty_cube(4, 2, 1, 16);
  c.data = testutil::random_vector(rng, c.data.size());
  const SlowTimeCube s = extract_slow_time(c);
  CHECK(s.bins == 9);
  for (std::size_t f = 0; f < 4; ++f) {
    for (std::size_t a = 0; a < 2; ++a) {
      const auto X = range_fft(c.chirp(f, a, 0));
      for (std::size_t b = 0; b < 9; ++b) CHECK(std::abs(s.data[s.index(f, a, b)] - X[b]) < 1e-12);
    }
  }
}

TEST_CASE("extract_slow_time: duplicated chirps average to one") {
  std::mt19937_64 rng(3);
  RadarCube one = empty_cube(3, 1, 1, 16);
  one.data = testutil::random_vector(rng, one.data.size());
  RadarCube two = empty_cube(3, 1, 2, 16);
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t s = 0; s < 16; ++s) two.chirp(f, 0, k)[s] = one.chirp(f, 0, 0)[s];
    }
  }
  const SlowTimeCube a = extract_slow_time(one);
  const SlowTimeCube b = extract_slow_time(two);
  for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(std::abs(a.data[i] - b.data[i]) < 1e-12);
}

TEST_CASE("extract_slow_time: max_range_bins truncates") {
  const SlowTimeCube s = extract_slow_time(empty_cube(2, 1, 1, 64), 10);
  CHECK(s.bins == 10);
}

TEST_CASE("extract_slow_time: coherent averaging gains sqrt(chirps) in SNR") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto bin7_noise_var = [&](std::size_t chirps) {
    RadarCube c = empty_cube(2000, 1, chirps, 64);
    for (std::size_t f = 0; f < c.frames; ++f)
      for (std::size_t k = 0; k < chirps; ++k)
        for (std::size_t n = 0; n < 64; ++n)
          c.chirp(f, 0, k)[n] = std::cos(2 * kPi * 7 * static_cast<double>(n) / 64) + noise(rng);
    const SlowTimeCube s = extract_slow_time(c);
    double var = 0.0;
    for (std::size_t f = 0; f < s.frames; ++f) var += std::norm(s.data[s.index(f, 0, 7)] - 32.0);
    return var / static_cast<double>(s.frames);
  };
  const double ratio = std::sqrt(bin7_noise_var(1) / bin7_noise_var(16));
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("phase_per_bin: constant bin gives zero phase") {
  const PhaseGrid g = phase_per_bin(single_bin(2000, [](double) { return std::complex<double>(0.3, -1.2); }));
  for (double v : g.at(0, 0).samples) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("phase_per_bin: 1.5 Hz phase modulation is recovered") {
  const PhaseGrid g = phase_per_bin(
      single_bin(4000, [](double t) { return std::polar(1.0, 0.5 * std::sin(2 * kPi * 1.5 * t)); }));
  const double gain = design_butterworth_bandpass({}, 200.0).zero_phase_gain(1.5);
  const auto& y = g.at(0, 0).samples;
  for (std::size_t i = 600; i < 3400; ++i) {
    const double expected = 0.5 * std::sin(2 * kPi * 1.5 * static_cast<double>(i) / 200.0);
    CHECK(std::abs(y[i] / gain - expected) <= 0.02 * 0.5);
  }
}

TEST_CASE("phase_per_bin: 0.05 Hz phase modulation is stopped") {
  const PhaseGrid g = phase_per_bin(
      single_bin(12000, [](double t) { return std::polar(1.0, 0.5 * std::sin(2 * kPi * 0.05 * t)); }));
  const double amp = testutil::tone_amplitude(g.at(0, 0).samples, 0.05, 200.0, 2000, 10000);
  CHECK(20 * std::log10(amp / 0.5) <= -40.0);
}

TEST_CASE("phase_per_bin: under 3 s is too short") {
  try {
    phase_per_bin(single_bin(599, [](double) { return std::complex<double>(1.0, 0.0); }));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRecordingTooShort);
  }
}

TEST_CASE("select_best_bin: single candidate") {
  PhaseGrid g = zero_grid(1, 1, 100);
  const BinSelection s = select_best_bin(g);
  CHECK(s.antenna_index == 0);
  CHECK(s.range_bin == 0);
}

TEST_CASE("select_best_bin: ties go to the lower antenna") {
  PhaseGrid g = zero_grid(3, 6, 1000);
  const TimeSeries wave = testutil::sine(1.0, 0.7, 5.0);
  g.series[0 * 6 + 3] = wave;
  g.series[2 * 6 + 5] = wave;
  const BinSelection s = select_best_bin(g);
  CHECK(s.antenna_index == 0);
  CHECK(s.range_bin == 3);
}

TEST_CASE("select_best_bin: invariant to positive scaling") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    PhaseGrid g = zero_grid(3, 5, 200);
    for (auto& s : g.series) s.samples = testutil::random_vector(rng, 200);
    const BinSelection a = select_best_bin(g);
    const double k = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    for (auto& s : g.series)
      for (double& v : s.samples) v *= k;
    const BinSelection b = select_best_bin(g);
    CHECK(a.antenna_index == b.antenna_index);
    CHECK(a.range_bin == b.range_bin);
  }
}

TEST_CASE("select_best_bin: synthetic target at 20 dB") {
  PulseModel model;
  const auto [wave, truth] = generate_waveform(model, 20.0, 200.0, 5);
  const RadarCube cube = synth_radar_cube(truth.displacement, CubeGeometry{}, 20.0, 5);
  const PhaseGrid grid = phase_per_bin(extract_slow_time(chirp_mean_removal(cube)));
  std::vector<std::vector<double>> p2p;
  const BinSelection s = select_best_bin(grid, &p2p);
  CHECK(s.antenna_index == 1);
  CHECK(s.range_bin == 7);
  for (std::size_t a = 0; a < p2p.size(); ++a)
    for (std::size_t b = 0; b < p2p[a].size(); ++b) CHECK(p2p[a][b] <= p2p[1][7]);
}

TEST_CASE("correct_polarity: fast rise is kept") {
  const TimeSeries x = sawtooth(0.15, 12.0);
  const PolarityResult r = correct_polarity(x);
  CHECK_FALSE(r.inverted);
  CHECK(r.waveform.samples == x.samples);
}

TEST_CASE("correct_polarity: slow rise is negated") {
  TimeSeries x = sawtooth(0.15, 12.0);
  for (double& v : x.samples) v = -v;
  const PolarityResult r = correct_polarity(x);
  CHECK(r.inverted);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(r.waveform.samples[i] == -x.samples[i]);
}

TEST_CASE("correct_polarity: symmetric triangle is kept") {
  const TimeSeries x = sawtooth(0.5, 12.0);
  const PolarityResult r = correct_polarity(x);
  CHECK_FALSE(r.inverted);
}

TEST_CASE("correct_polarity: fewer than 3 beats") {
  TimeSeries x;
  x.samples.assign(2000, 0.0);
  CHECK_THROWS_AS(correct_polarity(x), Error);
}

TEST_CASE("process_radar: lambda/8 displacement gives pi/2 phase") {
  TimeSeries d;
  d.samples.resize(4000);
  const double lambda = kSpeedOfLight / kDefaultCarrierHz;
  for (std::size_t i = 0; i < d.size(); ++i) d.samples[i] = lambda / 8 * std::sin(2 * kPi * d.time_at(i));
  const RadarPulseResult r = process_radar(synth_radar_cube(d, CubeGeometry{}, INFINITY, 8));
  CHECK(r.selection.antenna_index == 1);
  CHECK(r.selection.range_bin == 7);
  const double gain = design_butterworth_bandpass({}, 200.0).zero_phase_gain(1.0);
  const double amp = testutil::tone_amplitude(r.waveform.samples, 1.0, 200.0, 600, 3400) / gain;
  CHECK(amp == doctest::Approx(kPi / 2).epsilon(0.03));
}

TEST_CASE("process_radar: noise-free synthetic cube selects the target") {
  SimulationConfig cfg;
  cfg.duration_s = 15.0;
  cfg.snr_db = INFINITY;
  cfg.geometry.target_antenna = 2;
  cfg.geometry.target_bin = 11;
  const SyntheticRecording rec = simulate(cfg);
  const RadarPulseResult r = process_radar(rec.radar);
  CHECK(r.selection.antenna_index == 2);
  CHECK(r.selection.range_bin == 11);
}

TEST_CASE("process_radar: noise-only cube yields no beats") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> noise(0.0, 1.0);
  RadarCube c = empty_cube(2400, 3, 4, 32);
  for (double& v : c.data) v = noise(rng);
  const RadarPulseResult r = process_radar(c);
  CHECK(detect_peaks(r.waveform).empty());
}

TEST_CASE("process_radar: deterministic") {
  SimulationConfig cfg;
  cfg.duration_s = 12.0;
  const SyntheticRecording rec = simulate(cfg);
  const RadarPulseResult a = process_radar(rec.radar);
  const RadarPulseResult b = process_radar(rec.radar);
  CHECK(a.waveform.samples == b.waveform.samples);
  CHECK(a.per_bin_p2p == b.per_bin_p2p);
}

TEST_CASE("process_radar: validation and length errors") {
  RadarCube bad = empty_cube(2400, 1, 1, 16);
  bad.data.pop_back();
  CHECK_THROWS_AS(process_radar(bad), Error);
  try {
    process_radar(empty_cube(1999, 1, 1, 16));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRecordingTooShort);
  }
}
