#pragma once

#include "pulsecmp/beats.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pulsecmp {

// Differences are a - b. sd uses the n-1 denominator; limits are bias +/- 2 sd.
struct BlandAltman {
  double bias = 0.0;
  double sd = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  std::vector<std::pair<double, double>> points;  // (mean, diff)
};

struct MorphologyMetrics {
  std::size_t n_beats = 0;
  double inflection_count_mean = 0.0;
  double inflection_count_sd = 0.0;
  double auc_mean = 0.0;
  double auc_sd = 0.0;
};

// Inflection differences are ref - test, AUC differences test - ref.
// A p-value is empty when every paired difference is the same non-zero
// value (the t statistic is undefined).
struct PairwiseComparison {
  std::size_t n_pairs = 0;
  double mean_diff_inflections = 0.0;
  std::optional<double> p_inflections;
  double mean_diff_auc = 0.0;
  std::optional<double> p_auc;
  double cosine_mean = 0.0;
  double cosine_sd = 0.0;
};

struct BpSummary {
  double sbp = 0.0;
  double dbp = 0.0;
  double map = 0.0;
};

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
};

double map_from_bp(double sbp, double dbp);

BlandAltman bland_altman(std::span<const double> a, std::span<const double> b);

// Number of zero crossings of the smoothed first difference, i.e. interior
// extrema. Differences below eps * range snap to zero and a run of zeros
// between opposite signs counts once.
int count_inflections(std::span<const double> beat, int smooth_win = 5, double eps = 1e-3);

// Trapezoidal area over a unit time axis.
double auc_normalized(std::span<const double> beat);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with df degrees of freedom.
double students_t_two_sided(double t, double df);

TTestResult paired_t_test(std::span<const double> diffs);

MorphologyMetrics morphology_metrics(std::span<const BeatSegment> beats);

PairwiseComparison compare_modalities(std::span<const BeatSegment> ref_beats,
                                      std::span<const BeatSegment> test_beats);

// Median systolic and diastolic levels of a pressure waveform.
BpSummary bp_summary(const TimeSeries& pressure, const PeakTrain& train);

double sample_sd(std::span<const double> x);

}  // namespace pulsecmp
