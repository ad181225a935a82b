#pragma once

#include "pulsecmp/signal.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace pulsecmp {

struct PeakParams {
  double min_separation_s = 0.33;
  // Fraction of the median peak-to-peak over sliding windows.
  double prominence_rel = 0.3;
  double window_s = 2.0;
};

// Systolic maxima and the diastolic feet around them. Between two
// consecutive diastolic indices there is exactly one systolic index.
struct PeakTrain {
  std::vector<std::size_t> systolic_indices;
  std::vector<std::size_t> diastolic_indices;
  double sample_rate_hz = kDefaultSampleRateHz;
  double start_time_s = 0.0;

  bool empty() const noexcept { return systolic_indices.empty(); }
  double diastolic_time(std::size_t k) const {
    return start_time_s + static_cast<double>(diastolic_indices[k]) / sample_rate_hz;
  }
};

inline constexpr double kMinPlausibleIbiMs = 250.0;
inline constexpr double kMaxPlausibleIbiMs = 3000.0;

struct IbiSeries {
  std::vector<double> intervals_ms;
  std::vector<double> anchor_times_s;
  // Position of the earlier diastolic peak of each interval in the source train.
  std::vector<std::size_t> anchor_indices;

  std::size_t size() const noexcept { return intervals_ms.size(); }
  bool empty() const noexcept { return intervals_ms.empty(); }
};

inline constexpr std::size_t kDefaultBeatLength = 200;

struct BeatSegment {
  TimeSeries raw;
  std::vector<double> normalized;
  // Index of the opening diastolic peak within the PeakTrain.
  std::size_t diastolic_index = 0;
};

struct AverageBeat {
  std::vector<double> mean;
  std::vector<double> sd;
  std::size_t n_beats = 0;
};

struct AlignParams {
  double max_lag_s = 5.0;
  double pair_tol_s = 0.25;
  double grid_rate_hz = 200.0;
};

struct Alignment {
  // b is later than a by lag_s: b_j - lag_s lines up with a_i.
  double lag_s = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Empty train when nothing clears the prominence gate; never throws for
// flat or noisy input.
PeakTrain detect_peaks(const TimeSeries& x, const PeakParams& params = {});

IbiSeries extract_ibi(const PeakTrain& train);

std::vector<BeatSegment> segment_beats(const TimeSeries& x, const PeakTrain& train,
                                       std::size_t length = kDefaultBeatLength);

// Min-max scaling to [0, 1]; the input must not be flat.
std::vector<double> min_max_normalize(std::span<const double> x);

AverageBeat average_beats(std::span<const BeatSegment> segments);

Alignment align_beat_events(const PeakTrain& a, const PeakTrain& b, const AlignParams& params = {});

// Beat pairs (a_segment, b_segment) whose opening and closing diastolic
// peaks are both matched by the alignment.
std::vector<std::pair<std::size_t, std::size_t>> pair_segments(
    std::span<const BeatSegment> a, std::span<const BeatSegment> b, const Alignment& alignment);

// Same rule for inter-beat intervals: returns index pairs into a.intervals_ms
// and b.intervals_ms.
std::vector<std::pair<std::size_t, std::size_t>> pair_intervals(const IbiSeries& a,
                                                                const IbiSeries& b,
                                                                const Alignment& alignment);

}  // namespace pulsecmp
