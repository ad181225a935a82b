#include "pulsecmp/beats.hpp"

#include "pulsecmp/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <tuple>

namespace pulsecmp {

namespace {

// Local maxima; a flat plateau reports its middle sample.
std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return peaks;
}

// Keeps the highest peaks, dropping any lower peak closer than `distance`.
std::vector<std::size_t> select_by_distance(std::span<const double> x,
                                            const std::vector<std::size_t>& peaks,
                                            std::size_t distance) {
  std::vector<std::size_t> order(peaks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[peaks[a]] > x[peaks[b]]; });
  std::vector<bool> keep(peaks.size(), true);
  for (std::size_t k : order) {
    if (!keep[k]) continue;
    for (std::size_t j = k; j-- > 0;) {
      if (peaks[k] - peaks[j] >= distance) break;
      keep[j] = false;
    }
    for (std::size_t j = k + 1; j < peaks.size(); ++j) {
      if (peaks[j] - peaks[k] >= distance) break;
      keep[j] = false;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    if (keep[k]) out.push_back(peaks[k]);
  }
  return out;
}

double prominence(std::span<const double> x, std::size_t peak) {
  const double h = x[peak];
  double left_min = h;
  for (std::size_t j = peak; j-- > 0;) {
    if (x[j] > h) break;
    left_min = std::min(left_min, x[j]);
  }
  double right_min = h;
  for (std::size_t j = peak + 1; j < x.size(); ++j) {
    if (x[j] > h) break;
    right_min = std::min(right_min, x[j]);
  }
  return h - std::max(left_min, right_min);
}

// Median of max-min over every window of `w` consecutive samples.
double median_window_p2p(std::span<const double> x, std::size_t w) {
  const std::size_t n = x.size();
  if (w >= n) return peak_to_peak(x);
  std::deque<std::size_t> maxq, minq;
  std::vector<double> p2p;
  p2p.reserve(n - w + 1);
  for (std::size_t i = 0; i < n; ++i) {
    while (!maxq.empty() && x[maxq.back()] <= x[i]) maxq.pop_back();
    maxq.push_back(i);
    while (!minq.empty() && x[minq.back()] >= x[i]) minq.pop_back();
    minq.push_back(i);
    if (i + 1 >= w) {
      const std::size_t start = i + 1 - w;
      while (maxq.front() < start) maxq.pop_front();
      while (minq.front() < start) minq.pop_front();
      p2p.push_back(x[maxq.front()] - x[minq.front()]);
    }
  }
  auto mid = p2p.begin() + static_cast<std::ptrdiff_t>(p2p.size() / 2);
  std::nth_element(p2p.begin(), mid, p2p.end());
  double med = *mid;
  if (p2p.size() % 2 == 0) {
    const double lower = *std::max_element(p2p.begin(), mid);
    med = 0.5 * (med + lower);
  }
  return med;
}

std::size_t argmin_in(std::span<const double> x, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  for (std::size_t i = lo + 1; i <= hi; ++i) {
    if (x[i] < x[best]) best = i;
  }
  return best;
}

}  // namespace

PeakTrain detect_peaks(const TimeSeries& x, const PeakParams& params) {
  PeakTrain train;
  train.sample_rate_hz = x.sample_rate_hz;
  train.start_time_s = x.start_time_s;
  const std::span<const double> s(x.samples);
  if (s.size() < 3) return train;

  std::vector<std::size_t> peaks = local_maxima(s);
  if (peaks.empty()) return train;

  const auto distance = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.min_separation_s * x.sample_rate_hz)));
  peaks = select_by_distance(s, peaks, distance);

  const auto window = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(params.window_s * x.sample_rate_hz)));
  const double threshold = params.prominence_rel * median_window_p2p(s, window);
  if (!(threshold > 0.0)) return train;

  for (std::size_t p : peaks) {
    if (prominence(s, p) >= threshold) train.systolic_indices.push_back(p);
  }
  const auto& sys = train.systolic_indices;
  if (sys.empty()) return train;

  // Foot before the first systolic peak only counts when it is a genuine
  // trough inside the record, likewise after the last one.
  if (sys.front() > 1) {
    const std::size_t m = argmin_in(s, 0, sys.front() - 1);
    if (m > 0) train.diastolic_indices.push_back(m);
  }
  for (std::size_t k = 0; k + 1 < sys.size(); ++k) {
    train.diastolic_indices.push_back(argmin_in(s, sys[k] + 1, sys[k + 1] - 1));
  }
  if (sys.back() + 2 < s.size()) {
    const std::size_t m = argmin_in(s, sys.back() + 1, s.size() - 1);
    if (m + 1 < s.size()) train.diastolic_indices.push_back(m);
  }
  return train;
}

IbiSeries extract_ibi(const PeakTrain& train) {
  IbiSeries ibi;
  const auto& d = train.diastolic_indices;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double ms =
        static_cast<double>(d[k + 1] - d[k]) / train.sample_rate_hz * 1000.0;
    if (ms <= kMinPlausibleIbiMs || ms >= kMaxPlausibleIbiMs) continue;
    ibi.intervals_ms.push_back(ms);
    ibi.anchor_times_s.push_back(train.diastolic_time(k));
    ibi.anchor_indices.push_back(k);
  }
  return ibi;
}

std::vector<double> min_max_normalize(std::span<const double> x) {
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) {
    throw Error(ErrorCode::kDegenerateWaveform, "cannot normalize a flat segment");
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - lo) / range;
  out[static_cast<std::size_t>(lo_it - x.begin())] = 0.0;
  out[static_cast<std::size_t>(hi_it - x.begin())] = 1.0;
  return out;
}

std::vector<BeatSegment> segment_beats(const TimeSeries& x, const PeakTrain& train,
                                       std::size_t length) {
  std::vector<BeatSegment> segments;
  const auto& d = train.diastolic_indices;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const std::size_t begin = d[k];
    const std::size_t end = d[k + 1];
    if (end >= x.size() || end <= begin) continue;
    BeatSegment seg;
    seg.diastolic_index = k;
    seg.raw.sample_rate_hz = x.sample_rate_hz;
    seg.raw.start_time_s = x.time_at(begin);
    seg.raw.samples.assign(x.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                           x.samples.begin() + static_cast<std::ptrdiff_t>(end + 1));
    if (!(peak_to_peak(seg.raw.samples) >= 1e-12)) continue;
    seg.normalized = min_max_normalize(resample_linear(seg.raw, length));
    segments.push_back(std::move(seg));
  }
  return segments;
}

AverageBeat average_beats(std::span<const BeatSegment> segments) {
  if (segments.empty()) {
    throw Error(ErrorCode::kInsufficientBeats, "average_beats needs at least one segment");
  }
  const std::size_t len = segments.front().normalized.size();
  AverageBeat avg;
  avg.n_beats = segments.size();
  avg.mean.assign(len, 0.0);
  avg.sd.assign(len, 0.0);
  for (const BeatSegment& s : segments) {
    if (s.normalized.size() != len) {
      throw Error(ErrorCode::kInvalidArgument, "segments differ in normalized length");
    }
    for (std::size_t i = 0; i < len; ++i) avg.mean[i] += s.normalized[i];
  }
  const auto n = static_cast<double>(segments.size());
  for (double& m : avg.mean) m /= n;
  for (const BeatSegment& s : segments) {
    for (std::size_t i = 0; i < len; ++i) {
      const double dev = s.normalized[i] - avg.mean[i];
      avg.sd[i] += dev * dev;
    }
  }
  for (double& v : avg.sd) v = std::sqrt(v / n);
  return avg;
}

Alignment align_beat_events(const PeakTrain& a, const PeakTrain& b, const AlignParams& params) {
  if (a.diastolic_indices.empty() || b.diastolic_indices.empty()) {
    throw Error(ErrorCode::kInsufficientBeats, "align_beat_events needs two non-empty trains");
  }
  const double grid = params.grid_rate_hz;
  auto to_grid = [&](const PeakTrain& t) {
    std::vector<long long> g;
    for (std::size_t k = 0; k < t.diastolic_indices.size(); ++k) {
      g.push_back(std::llround(t.diastolic_time(k) * grid));
    }
    return g;
  };
  const std::vector<long long> ga = to_grid(a);
  const std::vector<long long> gb = to_grid(b);
  const long long max_lag = std::llround(params.max_lag_s * grid);

  // Cross-correlation of two binary impulse trains: count coincidences per lag.
  std::map<long long, long long> counts;
  std::size_t lo = 0;
  for (long long ta : ga) {
    while (lo < gb.size() && gb[lo] < ta - max_lag) ++lo;
    for (std::size_t j = lo; j < gb.size() && gb[j] <= ta + max_lag; ++j) {
      ++counts[gb[j] - ta];
    }
  }
  long long best_lag = 0;
  long long best_count = -1;
  for (const auto& [lag, count] : counts) {
    const bool better = count > best_count ||
                        (count == best_count && std::llabs(lag) < std::llabs(best_lag));
    if (better) {
      best_lag = lag;
      best_count = count;
    }
  }

  Alignment result;
  result.lag_s = static_cast<double>(best_lag) / grid;

  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < a.diastolic_indices.size(); ++i) {
    const double ta = a.diastolic_time(i);
    for (std::size_t j = 0; j < b.diastolic_indices.size(); ++j) {
      const double dt = std::abs(b.diastolic_time(j) - result.lag_s - ta);
      if (dt <= params.pair_tol_s) candidates.emplace_back(dt, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<bool> used_a(a.diastolic_indices.size(), false);
  std::vector<bool> used_b(b.diastolic_indices.size(), false);
  for (const auto& [dt, i, j] : candidates) {
    if (used_a[i] || used_b[j]) continue;
    used_a[i] = used_b[j] = true;
    result.pairs.emplace_back(i, j);
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

namespace {

std::map<std::size_t, std::size_t> pair_map(const Alignment& alignment) {
  std::map<std::size_t, std::size_t> m;
  for (const auto& [i, j] : alignment.pairs) m[i] = j;
  return m;
}

bool consecutive_match(const std::map<std::size_t, std::size_t>& m, std::size_t ia,
                       std::size_t ib) {
  const auto open = m.find(ia);
  const auto close = m.find(ia + 1);
  return open != m.end() && close != m.end() && open->second == ib && close->second == ib + 1;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> pair_segments(
    std::span<const BeatSegment> a, std::span<const BeatSegment> b, const Alignment& alignment) {
  const auto m = pair_map(alignment);
  std::map<std::size_t, std::size_t> b_by_start;
  for (std::size_t k = 0; k < b.size(); ++k) b_by_start[b[k].diastolic_index] = k;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto open = m.find(a[k].diastolic_index);
    if (open == m.end()) continue;
    const auto seg_b = b_by_start.find(open->second);
    if (seg_b == b_by_start.end()) continue;
    if (consecutive_match(m, a[k].diastolic_index, open->second)) out.emplace_back(k, seg_b->second);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_intervals(const IbiSeries& a,
                                                                const IbiSeries& b,
                                                                const Alignment& alignment) {
  const auto m = pair_map(alignment);
  std::map<std::size_t, std::size_t> b_by_anchor;
  for (std::size_t k = 0; k < b.size(); ++k) b_by_anchor[b.anchor_indices[k]] = k;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto open = m.find(a.anchor_indices[k]);
    if (open == m.end()) continue;
    const auto iv = b_by_anchor.find(open->second);
    if (iv == b_by_anchor.end()) continue;
    if (consecutive_match(m, a.anchor_indices[k], open->second)) out.emplace_back(k, iv->second);
  }
  return out;
}

}  // namespace pulsecmp
