#include "pulsecmp/acceptance.hpp"

#include "pulsecmp/compare.hpp"
#include "pulsecmp/error.hpp"
#include "pulsecmp/io.hpp"
#include "pulsecmp/metrics.hpp"
#include "pulsecmp/radar.hpp"
#include "pulsecmp/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <unistd.h>

namespace pulsecmp {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* format, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string fmt(const char* format, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

std::string fmt(const char* format, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

struct Check {
  CriterionResult& r;
  void operator()(bool ok, const std::string& what) {
    r.details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    if (!ok) r.pass = false;
  }
};

// ---------------------------------------------------------------- criterion 1

double per_beat_cosine(const TimeSeries& recovered, const TimeSeries& truth_phase, const PeakTrain& train) {
  const auto rec_beats = segment_beats(recovered, train);
  const auto truth_beats = segment_beats(truth_phase, train);
  std::vector<double> cos;
  for (const BeatSegment& r : rec_beats) {
    for (const BeatSegment& t : truth_beats) {
      if (t.diastolic_index == r.diastolic_index) {
        cos.push_back(cosine_similarity(r.normalized, t.normalized));
        break;
      }
    }
  }
  return cos.empty() ? 0.0 : mean(cos);
}

CriterionResult criterion_1() {
  CriterionResult r{1, "end-to-end radar recovery (10 seeds, 60 s, 20 dB)", true, {}, {}, 0.0};
  Check check{r};
  const auto t0 = Clock::now();
  std::vector<double> cosines;
  int bins_ok = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.snr_db = 20.0;
    cfg.duration_s = 60.0;
    auto [wave, truth] = generate_waveform(cfg.model, cfg.duration_s, cfg.fs_hz, seed);
    RadarCube cube = synth_radar_cube(truth.displacement, cfg.geometry, cfg.snr_db, seed);
    const double lambda = cube.wavelength_m();
    const RadarPulseResult result = process_radar(std::move(cube));
    const bool bin_ok = result.selection.antenna_index == cfg.geometry.target_antenna &&
                        result.selection.range_bin == cfg.geometry.target_bin;
    bins_ok += bin_ok;
    TimeSeries truth_phase = truth.displacement;
    for (double& v : truth_phase.samples) v *= 4.0 * kPi / lambda;
    const PeakTrain train = detect_peaks(result.waveform);
    const double c = per_beat_cosine(result.waveform, truth_phase, train);
    cosines.push_back(c);
    r.details.push_back("     seed " + std::to_string(seed) + ": bin (" +
                        std::to_string(result.selection.antenna_index) + ", " +
                        std::to_string(result.selection.range_bin) + ")" + fmt(" cosine %.5f", c));
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  check(bins_ok == 10, std::to_string(bins_ok) + "/10 seeds select the true (antenna, bin)");
  check(mean(cosines) >= 0.99, fmt("mean per-beat cosine %.5f >= 0.99", mean(cosines)));
  check(elapsed <= 30.0, fmt("runtime %.2f s <= 30 s", elapsed));
  return r;
}

// ---------------------------------------------------------------- criterion 2

double recovered_phase_amplitude(double amp_m, BinSelection* selection) {
  const double fs = kDefaultSampleRateHz;
  const CubeGeometry geometry;
  const std::size_t n = static_cast<std::size_t>(20.0 * fs);
  TimeSeries d;
  d.sample_rate_hz = fs;
  d.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.samples[i] = amp_m * std::sin(2.0 * kPi * static_cast<double>(i) / fs);
  const RadarPulseResult res =
      process_radar(synth_radar_cube(d, geometry, std::numeric_limits<double>::infinity(), 7));
  if (selection) *selection = res.selection;
  const auto& y = res.waveform.samples;
  const std::size_t margin = n / 20;
  const auto [lo, hi] = std::minmax_element(y.begin() + static_cast<std::ptrdiff_t>(margin),
                                            y.end() - static_cast<std::ptrdiff_t>(margin));
  const double gain = design_butterworth_bandpass(BandpassSpec{}, fs).zero_phase_gain(1.0);
  return 0.5 * (*hi - *lo) / gain;
}

CriterionResult criterion_2() {
  CriterionResult r{2, "phase-scale physics (lambda/8 -> pi/2, linearity)", true, {}, {}, 0.0};
  Check check{r};
  const double lambda = kSpeedOfLight / kDefaultCarrierHz;
  BinSelection sel;
  const double a8 = recovered_phase_amplitude(lambda / 8.0, &sel);
  const double rel = a8 / (kPi / 2.0) - 1.0;
  check(std::abs(rel) <= 0.03, fmt("lambda/8 amplitude %.6f rad vs pi/2 (%+.3f%%, tol 3%%)", a8, 100.0 * rel));
  const CubeGeometry g;
  check(sel.antenna_index == g.target_antenna && sel.range_bin == g.target_bin,
        "noise-free cube selects the target bin");

  const double amps[3] = {lambda / 80.0, lambda / 40.0, lambda / 20.0};
  double scale[3];
  for (int k = 0; k < 3; ++k) {
    scale[k] = recovered_phase_amplitude(amps[k], nullptr) / (4.0 * kPi * amps[k] / lambda);
  }
  check(std::abs(scale[1] / scale[0] - 1.0) <= 0.02 && std::abs(scale[2] / scale[1] - 1.0) <= 0.02 &&
            std::abs(scale[2] / scale[0] - 1.0) <= 0.02,
        fmt("recovered/expected over lambda/80..lambda/20: %.5f %.5f %.5f (within 2%%)", scale[0], scale[1],
            scale[2]));
  return r;
}

// ------------------------------------------------------------ criteria 3 and 5

struct BundleRun {
  std::vector<AgreementReport> reports;
};

const BundleRun& synthetic_bundles() {
  static const BundleRun run = [] {
    BundleRun out;
    const Config config;
    for (std::uint64_t seed = 101; seed <= 103; ++seed) {
      SimulationConfig sim;
      sim.seed = seed;
      sim.model.ibi_sd_ms = 30.0;
      sim.snr_db = 40.0;
      sim.duration_s = std::ceil(120.0 * 60.0 / sim.model.hr_mean_bpm) + 1.0;
      out.reports.push_back(
          run_compare(bundle_from_synthetic(simulate(sim), "synthetic_" + std::to_string(seed)), config));
    }
    return out;
  }();
  return run;
}

CriterionResult criterion_3() {
  CriterionResult r{3, "IBI fidelity (ibi_sd 30 ms, 120 beats, 3 bundles)", true, {}, {}, 0.0};
  Check check{r};
  const BundleRun& run = synthetic_bundles();
  for (const char* name : {"radar", "ppg"}) {
    double err = 0.0;
    std::size_t n = 0, truth_beats = 0;
    for (const auto& rep : run.reports) {
      const TruthCheck* tc = rep.truth_check(name);
      if (!tc) continue;
      err += tc->mean_abs_ibi_error_ms * static_cast<double>(tc->matched_intervals);
      n += tc->matched_intervals;
      truth_beats += tc->truth_beats;
    }
    const double mean_err = n ? err / static_cast<double>(n) : INFINITY;
    check(n > 0 && mean_err <= 5.0,
          std::string(name) + fmt(" mean |IBI error| %.3f ms <= 5 ms", mean_err) + " over " +
              std::to_string(n) + " intervals (" + std::to_string(truth_beats) + " true beats)");
  }
  std::vector<double> ref, test;
  for (const auto& rep : run.reports) {
    const PairResult* p = rep.pair("reference", "radar");
    if (!p) continue;
    ref.insert(ref.end(), p->ref_ibi_ms.begin(), p->ref_ibi_ms.end());
    test.insert(test.end(), p->test_ibi_ms.begin(), p->test_ibi_ms.end());
  }
  if (ref.size() < 2) {
    check(false, "radar-vs-reference Bland-Altman has fewer than 2 paired intervals");
  } else {
    const BlandAltman ba = bland_altman(test, ref);
    check(std::abs(ba.bias) <= 2.0, fmt("radar-vs-reference IBI bias %+.3f ms (|bias| <= 2 ms)", ba.bias));
    check(ba.sd <= 8.0, fmt("radar-vs-reference IBI sd %.3f ms <= 8 ms", ba.sd) + ", n = " +
                            std::to_string(ref.size()));
  }
  return r;
}

CriterionResult criterion_5() {
  CriterionResult r{5, "morphology ordering (AUC, inflections, cosine)", true, {}, {}, 0.0};
  Check check{r};
  const BundleRun& run = synthetic_bundles();
  auto pooled = [&](const char* name) {
    std::vector<BeatSegment> beats;
    for (const auto& rep : run.reports) {
      const ModalityResult* m = rep.modality(name);
      if (m && m->usable()) beats.insert(beats.end(), m->beats.begin(), m->beats.end());
    }
    return beats.empty() ? MorphologyMetrics{} : morphology_metrics(beats);
  };
  auto pooled_cosine = [&](const char* test) -> std::optional<double> {
    std::vector<BeatSegment> rb, tb;
    for (const auto& rep : run.reports) {
      const PairResult* p = rep.pair("reference", test);
      if (!p) continue;
      rb.insert(rb.end(), p->ref_beats.begin(), p->ref_beats.end());
      tb.insert(tb.end(), p->test_beats.begin(), p->test_beats.end());
    }
    if (rb.size() < 2) return std::nullopt;
    return compare_modalities(rb, tb).cosine_mean;
  };
  const MorphologyMetrics ref = pooled("reference");
  const MorphologyMetrics ppg = pooled("ppg");
  const MorphologyMetrics radar = pooled("radar");
  check(ppg.n_beats > 0 && ref.n_beats > 0 && ppg.auc_mean > ref.auc_mean,
        fmt("PPG AUC %.4f > reference AUC %.4f", ppg.auc_mean, ref.auc_mean));
  r.details.push_back(fmt("     inflections: reference %.4f, radar %.4f, PPG %.4f", ref.inflection_count_mean,
                          radar.inflection_count_mean, ppg.inflection_count_mean));
  check(radar.n_beats > 0 && ppg.n_beats > 0 && radar.inflection_count_mean >= ppg.inflection_count_mean,
        fmt("radar inflections %.4f >= PPG inflections %.4f", radar.inflection_count_mean,
            ppg.inflection_count_mean));
  const auto c_radar = pooled_cosine("radar");
  const auto c_ppg = pooled_cosine("ppg");
  check(c_radar && c_ppg && *c_radar > *c_ppg,
        fmt("radar-vs-reference cosine %.4f > PPG-vs-reference cosine %.4f", c_radar.value_or(NAN),
            c_ppg.value_or(NAN)));
  return r;
}

// ---------------------------------------------------------------- criterion 4

CriterionResult criterion_4() {
  CriterionResult r{4, "metric oracles", true, {}, {}, 0.0};
  Check check{r};
  const std::vector<double> a{1000, 1010, 990}, b{1005, 1000, 995};
  const BlandAltman ba = bland_altman(a, b);
  check(std::abs(ba.bias) <= 1e-9 && std::abs(ba.sd - 8.6603) <= 1e-4 &&
            std::abs(ba.loa_low + 17.3205) <= 1e-4 && std::abs(ba.loa_high - 17.3205) <= 1e-4,
        fmt("bland_altman bias %.10f sd %.10f limits +/-%.10f", ba.bias, ba.sd, ba.loa_high));
  const double exact_sd = std::sqrt(75.0);
  check(std::abs(ba.sd - exact_sd) <= 1e-9 && std::abs(ba.loa_high - 2.0 * exact_sd) <= 1e-9,
        "bland_altman sd = sqrt(150/2) to 1e-9");

  std::vector<double> half_sine(200);
  for (std::size_t i = 0; i < half_sine.size(); ++i) {
    half_sine[i] = std::sin(kPi * static_cast<double>(i) / 199.0);
  }
  const double auc = auc_normalized(half_sine);
  check(std::abs(auc - 2.0 / kPi) <= 1e-4, fmt("auc_normalized(half-sine) %.7f vs 2/pi %.7f", auc, 2.0 / kPi));

  const double cos = cosine_similarity(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 7});
  const bool cos_stated = std::abs(cos - 0.99746) <= 1e-5;
  const double independent = 31.0 / std::sqrt(14.0 * 69.0);
  check(cos_stated, fmt("cosine([1,2,3],[2,4,7]) %.6f vs stated 0.99746 +/- 1e-5", cos));
  r.details.push_back(fmt("     independent value 31/sqrt(966) = %.6f, implementation differs by %.1e", independent,
                          std::abs(cos - independent)));

  const double map = map_from_bp(120.0, 80.0);
  check(std::abs(map - 93.3333) <= 1e-4 && std::abs(map - 280.0 / 3.0) <= 1e-9,
        fmt("map_from_bp(120, 80) = %.10f (280/3 to 1e-9)", map));

  const TTestResult t = paired_t_test(std::vector<double>{2, 4, 6, 8});
  check(std::abs(t.p - 0.0305) <= 0.001, fmt("paired_t_test([2,4,6,8]) t = %.4f p = %.6f", t.t, t.p));

  // The only stated value that disagrees with its own derivation is the
  // cosine example; flag it when everything else holds and our result
  // matches the recomputation.
  const bool others_ok = std::count_if(r.details.begin(), r.details.end(), [](const std::string& d) {
                           return d.rfind("FAIL", 0) == 0;
                         }) == (cos_stated ? 0 : 1);
  if (!r.pass && !cos_stated && others_ok && std::abs(cos - independent) <= 1e-12) {
    r.known_defect = "stated cosine 0.99746 does not equal 29/(sqrt14*sqrt69) = 0.93306 nor the true 31/sqrt966 = 0.997410";
  }
  return r;
}

// ---------------------------------------------------------------- criterion 6

// Least-squares amplitude of a tone at f over samples [begin, end).
double tone_amplitude(const std::vector<double>& y, double f, double fs, std::size_t begin, std::size_t end) {
  double sc = 0.0, ss = 0.0, cc = 0.0, sn = 0.0, cs = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double w = 2.0 * kPi * f * static_cast<double>(i) / fs;
    const double c = std::cos(w), s = std::sin(w);
    sc += y[i] * c;
    sn += y[i] * s;
    cc += c * c;
    ss += s * s;
    cs += c * s;
  }
  const double det = cc * ss - cs * cs;
  const double a = (sc * ss - sn * cs) / det;
  const double b = (sn * cc - sc * cs) / det;
  return std::hypot(a, b);
}

std::vector<std::size_t> local_maxima(const std::vector<double>& y, std::size_t begin, std::size_t end) {
  std::vector<std::size_t> out;
  for (std::size_t i = std::max<std::size_t>(begin, 1); i + 1 < std::min(end, y.size()); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(i);
  }
  return out;
}

CriterionResult criterion_6() {
  CriterionResult r{6, "filter contract (magnitudes, zero phase)", true, {}, {}, 0.0};
  Check check{r};
  const double fs = kDefaultSampleRateHz;
  const std::size_t n = static_cast<std::size_t>(60.0 * fs);
  const std::size_t begin = static_cast<std::size_t>(15.0 * fs), end = static_cast<std::size_t>(45.0 * fs);
  auto tone = [&](double f, double phase) {
    TimeSeries x;
    x.sample_rate_hz = fs;
    x.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) x.samples[i] = std::sin(2.0 * kPi * f * static_cast<double>(i) / fs + phase);
    return x;
  };
  auto gain_db = [&](double f) {
    const TimeSeries y = butterworth_bandpass(tone(f, 0.0));
    return 20.0 * std::log10(tone_amplitude(y.samples, f, fs, begin, end));
  };
  const double g2 = gain_db(2.0);
  check(std::abs(g2) <= 0.5, fmt("2 Hz tone %+.4f dB (within +/-0.5 dB)", g2));
  const double g01 = gain_db(0.1);
  check(g01 <= -40.0, fmt("0.1 Hz tone %.2f dB <= -40 dB", g01));

  TimeSeries dc;
  dc.sample_rate_hz = fs;
  dc.samples.assign(n, 1.0);
  const TimeSeries ydc = butterworth_bandpass(dc);
  double peak = 0.0;
  for (double v : ydc.samples) peak = std::max(peak, std::abs(v));
  const double gdc = peak > 0.0 ? 20.0 * std::log10(peak) : -INFINITY;
  check(gdc <= -120.0, fmt("DC gain %.1f dB <= -120 dB", gdc));

  std::size_t worst = 0;
  for (double f : {1.0, 1.7, 2.5, 4.0, 6.0}) {
    const TimeSeries x = tone(f, 0.37);
    const TimeSeries y = butterworth_bandpass(x);
    const auto px = local_maxima(x.samples, begin, end);
    const auto py = local_maxima(y.samples, begin, end);
    for (std::size_t p : px) {
      std::size_t best = SIZE_MAX;
      for (std::size_t q : py) best = std::min<std::size_t>(best, p > q ? p - q : q - p);
      worst = std::max(worst, best);
    }
  }
  check(worst <= 1, "zero-phase peak shift " + std::to_string(worst) + " sample(s) <= 1 (tones 1-6 Hz)");
  return r;
}

// ---------------------------------------------------------------- criterion 7

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("pulsecmp_selftest_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

CriterionResult criterion_7(double elapsed_before) {
  CriterionResult r{7, "invariant suites, bit-exact round trips, selftest runtime", true, {}, {}, 0.0};
  Check check{r};
  const auto t0 = Clock::now();
  Rng rng(2024);
  constexpr int kCases = 100;

  int ok = 0;
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 300);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal(800.0, 100.0);
      b[i] = rng.normal(800.0, 100.0);
    }
    const BlandAltman self = bland_altman(a, a);
    const BlandAltman ab = bland_altman(a, b), ba = bland_altman(b, a);
    ok += self.bias == 0.0 && self.sd == 0.0 && self.loa_low == 0.0 && self.loa_high == 0.0 &&
          std::abs(ab.bias + ba.bias) <= 1e-9 && std::abs(ab.sd - ba.sd) <= 1e-9;
  }
  check(ok == kCases, "bland_altman identity and antisymmetry " + std::to_string(ok) + "/100");

  ok = 0;
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 7 + static_cast<std::size_t>(rng.uniform() * 200);
    std::vector<double> u(n), v(n), su(n), flipped(n), affine(n);
    const double k = 0.01 + 100.0 * rng.uniform();
    const double shift = rng.normal(0.0, 10.0);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.uniform();
      v[i] = rng.normal();
      su[i] = k * u[i];
      flipped[i] = 1.0 - u[i];
      affine[i] = k * u[i] + shift;
    }
    const bool cos_ok = std::abs(cosine_similarity(su, v) - cosine_similarity(u, v)) <= 1e-12;
    const bool auc_ok = std::abs(auc_normalized(flipped) - (1.0 - auc_normalized(u))) <= 1e-12;
    const bool infl_ok = count_inflections(affine) == count_inflections(u);
    ok += cos_ok && auc_ok && infl_ok;
  }
  check(ok == kCases, "cosine scaling, AUC complement, inflection affine invariance " + std::to_string(ok) + "/100");

  ok = 0;
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 500);
    std::vector<double> x(n);
    double acc = 0.0;
    for (double& v : x) {
      acc += rng.normal(0.0, 1.5);
      v = wrap_phase(acc);
    }
    const auto u = unwrap_phase(std::span<const double>(x));
    bool good = true;
    for (std::size_t i = 0; i < n; ++i) good &= std::abs(wrap_phase(u[i]) - x[i]) <= 1e-9;
    for (std::size_t i = 1; i < n; ++i) good &= std::abs(u[i] - u[i - 1]) <= kPi + 1e-9;
    ok += good;
  }
  check(ok == kCases, "unwrap consistency and bounded steps " + std::to_string(ok) + "/100");

  const auto dir = scratch_dir();
  ok = 0;
  for (int c = 0; c < kCases; ++c) {
    RadarCube cube;
    cube.frames = 1 + static_cast<std::size_t>(rng.uniform() * 5);
    cube.antennas = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    cube.chirps = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    cube.samples = 1 + static_cast<std::size_t>(rng.uniform() * 16);
    cube.frame_rate_hz = 50.0 + rng.uniform() * 500.0;
    cube.fast_time_rate_hz = 1e6 * (1.0 + rng.uniform());
    cube.carrier_hz = 60e9 + rng.normal(0.0, 1e9);
    cube.metadata["case"] = std::to_string(c);
    cube.metadata["note"] = "x y=z";
    cube.data.resize(cube.frames * cube.antennas * cube.chirps * cube.samples);
    for (double& v : cube.data) v = static_cast<float>(rng.normal(0.0, 1e3));
    write_radar_cube(dir / "cube.radc", cube);
    const RadarCube back = read_radar_cube(dir / "cube.radc");
    ok += back.frames == cube.frames && back.antennas == cube.antennas && back.chirps == cube.chirps &&
          back.samples == cube.samples && back.frame_rate_hz == cube.frame_rate_hz &&
          back.fast_time_rate_hz == cube.fast_time_rate_hz && back.carrier_hz == cube.carrier_hz &&
          back.metadata == cube.metadata &&
          std::memcmp(back.data.data(), cube.data.data(), cube.data.size() * sizeof(double)) == 0;
  }
  check(ok == kCases, "RADC round trip bit-exact " + std::to_string(ok) + "/100");

  ok = 0;
  for (int c = 0; c < kCases; ++c) {
    TimeSeries ts;
    ts.sample_rate_hz = 200.0;
    ts.samples.resize(2 + static_cast<std::size_t>(rng.uniform() * 300));
    for (double& v : ts.samples) v = rng.normal(1e4, 300.0);
    write_series_csv(dir / "series.csv", {{"pressure_mmHg", &ts}});
    const TimeSeries back = read_series_csv(dir / "series.csv", "pressure_mmHg");
    ok += back.sample_rate_hz == ts.sample_rate_hz && back.start_time_s == ts.start_time_s &&
          back.samples == ts.samples;
  }
  check(ok == kCases, "CSV round trip bit-exact " + std::to_string(ok) + "/100");

  auto [wave, truth] = generate_waveform(PulseModel{}, 12.0, 200.0, 77);
  truth.target_antenna = 1;
  truth.target_range_bin = 7;
  write_json(dir / "truth.json", truth_to_json(truth));
  const SynthGroundTruth back = truth_from_json(read_json(dir / "truth.json"));
  check(back.beat_times_s == truth.beat_times_s && back.displacement.samples == truth.displacement.samples &&
            back.seed == truth.seed && back.target_range_bin == truth.target_range_bin,
        "truth JSON round trip bit-exact");

  const RadarCube c1 = synth_radar_cube(truth.displacement, CubeGeometry{}, 20.0, 5);
  const RadarCube c2 = synth_radar_cube(truth.displacement, CubeGeometry{}, 20.0, 5);
  const auto [w2, t2] = generate_waveform(PulseModel{}, 12.0, 200.0, 77);
  check(c1.data == c2.data && w2.samples == wave.samples && t2.beat_times_s == truth.beat_times_s,
        "generators are deterministic for a fixed seed");

  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  const double total = elapsed_before + std::chrono::duration<double>(Clock::now() - t0).count();
  check(total <= 60.0, fmt("selftest runtime %.2f s <= 60 s", total));
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  const auto wanted = [&](int id) {
    return options.only.empty() || std::find(options.only.begin(), options.only.end(), id) != options.only.end();
  };
  std::vector<CriterionResult> results;
  const auto start = Clock::now();
  auto run = [&](int id, const std::function<CriterionResult()>& fn) {
    if (!wanted(id)) return;
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "criterion " + std::to_string(id);
      r.pass = false;
      r.details.push_back(std::string("FAIL exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (options.on_result) options.on_result(r);
    results.push_back(std::move(r));
  };
  run(1, criterion_1);
  run(2, criterion_2);
  run(3, criterion_3);
  run(4, criterion_4);
  run(5, criterion_5);
  run(6, criterion_6);
  run(7, [&] { return criterion_7(std::chrono::duration<double>(Clock::now() - start).count()); });
  return results;
}

std::string format_result_line(const CriterionResult& r) {
  std::string line = std::string(r.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + ": " + r.title;
  line += fmt(" [%.2f s]", r.seconds);
  if (!r.pass && !r.known_defect.empty()) line += " (known defect in expected value: " + r.known_defect + ")";
  return line;
}

bool acceptance_ok(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CriterionResult& r) { return r.pass || !r.known_defect.empty(); });
}

}  // namespace pulsecmp
