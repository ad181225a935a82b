#include "pulsecmp/metrics.hpp"

#include "pulsecmp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pulsecmp {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Power series of I_x(a, b); converges well for x < (a + 1) / (a + b + 2).
double beta_series(double a, double b, double x) {
  const double log_prefix = a * std::log(x) + b * std::log1p(-x) - std::log(a) -
                            (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 1000000; ++n) {
    term *= (a + b + n) / (a + 1.0 + n) * x;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::exp(log_prefix) * sum;
}

}  // namespace

double map_from_bp(double sbp, double dbp) {
  if (!(dbp > 0.0) || !(sbp > dbp)) {
    throw Error(ErrorCode::kInvalidPressures, "invalid pressures: need sbp > dbp > 0");
  }
  return dbp + (sbp - dbp) / 3.0;
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

BlandAltman bland_altman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bland_altman needs paired series of equal length");
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::kInsufficientBeats, "bland_altman needs at least 2 pairs");
  }
  BlandAltman ba;
  std::vector<double> diffs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    diffs[i] = a[i] - b[i];
    ba.points.emplace_back(0.5 * (a[i] + b[i]), diffs[i]);
  }
  ba.bias = mean(diffs);
  ba.sd = sample_sd(diffs);
  ba.loa_low = ba.bias - 2.0 * ba.sd;
  ba.loa_high = ba.bias + 2.0 * ba.sd;
  return ba;
}

int count_inflections(std::span<const double> beat, int smooth_win, double eps) {
  if (beat.size() < 7) {
    throw Error(ErrorCode::kInputTooShort, "count_inflections needs at least 7 samples");
  }
  const auto [lo, hi] = std::minmax_element(beat.begin(), beat.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return 0;

  const std::size_t n = beat.size();
  const std::size_t half = static_cast<std::size_t>(std::max(smooth_win, 1) / 2);
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = i >= half ? i - half : 0;
    const std::size_t end = std::min(n - 1, i + half);
    double s = 0.0;
    for (std::size_t j = begin; j <= end; ++j) s += beat[j];
    smooth[i] = s / static_cast<double>(end - begin + 1);
  }

  const double snap = eps * range;
  int crossings = 0;
  int last_sign = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = smooth[i] - smooth[i - 1];
    const int sign = std::abs(d) < snap ? 0 : (d > 0.0 ? 1 : -1);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++crossings;
    last_sign = sign;
  }
  return crossings;
}

double auc_normalized(std::span<const double> beat) {
  if (beat.size() < 2) {
    throw Error(ErrorCode::kInputTooShort, "auc_normalized needs at least 2 samples");
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < beat.size(); ++i) sum += beat[i - 1] + beat[i];
  return 0.5 * sum / static_cast<double>(beat.size() - 1);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cosine_similarity needs equal lengths");
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) {
    throw Error(ErrorCode::kZeroNorm, "cosine_similarity of a zero-norm vector");
  }
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "incomplete_beta needs a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return beta_series(a, b, x);
  return 1.0 - beta_series(b, a, 1.0 - x);
}

double students_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::kInvalidArgument, "degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> diffs) {
  if (diffs.size() < 2) {
    throw Error(ErrorCode::kInsufficientBeats, "paired_t_test needs at least 2 differences");
  }
  if (std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; })) {
    return {0.0, 1.0};
  }
  const double m = mean(diffs);
  const double sd = sample_sd(diffs);
  if (!(sd > 0.0)) throw Error(ErrorCode::kZeroVariance, "zero variance");
  const double n = static_cast<double>(diffs.size());
  const double t = m / (sd / std::sqrt(n));
  return {t, students_t_two_sided(t, n - 1.0)};
}

MorphologyMetrics morphology_metrics(std::span<const BeatSegment> beats) {
  MorphologyMetrics mm;
  mm.n_beats = beats.size();
  if (beats.empty()) return mm;
  std::vector<double> counts, aucs;
  for (const BeatSegment& b : beats) {
    counts.push_back(count_inflections(b.normalized));
    aucs.push_back(auc_normalized(b.normalized));
  }
  mm.inflection_count_mean = mean(counts);
  mm.inflection_count_sd = sample_sd(counts);
  mm.auc_mean = mean(aucs);
  mm.auc_sd = sample_sd(aucs);
  return mm;
}

PairwiseComparison compare_modalities(std::span<const BeatSegment> ref_beats,
                                      std::span<const BeatSegment> test_beats) {
  if (ref_beats.size() != test_beats.size()) {
    throw Error(ErrorCode::kInvalidArgument, "compare_modalities needs paired beat lists");
  }
  if (ref_beats.size() < 2) {
    throw Error(ErrorCode::kInsufficientBeats, "compare_modalities needs at least 2 beat pairs");
  }
  const std::size_t n = ref_beats.size();
  std::vector<double> d_infl(n), d_auc(n), cosines(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ref_beats[i].normalized;
    const auto& t = test_beats[i].normalized;
    d_infl[i] = static_cast<double>(count_inflections(r) - count_inflections(t));
    d_auc[i] = auc_normalized(t) - auc_normalized(r);
    cosines[i] = cosine_similarity(r, t);
  }
  auto p_value = [](std::span<const double> d) -> std::optional<double> {
    try {
      return paired_t_test(d).p;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kZeroVariance) return std::nullopt;
      throw;
    }
  };
  PairwiseComparison pc;
  pc.n_pairs = n;
  pc.mean_diff_inflections = mean(d_infl);
  pc.p_inflections = p_value(d_infl);
  pc.mean_diff_auc = mean(d_auc);
  pc.p_auc = p_value(d_auc);
  pc.cosine_mean = mean(cosines);
  pc.cosine_sd = sample_sd(cosines);
  return pc;
}

BpSummary bp_summary(const TimeSeries& pressure, const PeakTrain& train) {
  std::vector<double> sys, dia;
  for (std::size_t i : train.systolic_indices) sys.push_back(pressure.samples.at(i));
  for (std::size_t i : train.diastolic_indices) dia.push_back(pressure.samples.at(i));
  if (sys.empty() || dia.empty()) {
    throw Error(ErrorCode::kInsufficientBeats, "no beats to read blood pressure from");
  }
  BpSummary bp;
  bp.sbp = median(sys);
  bp.dbp = median(dia);
  bp.map = map_from_bp(bp.sbp, bp.dbp);
  return bp;
}

}  // namespace pulsecmp
