#pragma once

#include "pulsecmp/signal.hpp"

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace testutil {

inline pulsecmp::TimeSeries sine(double f_hz, double amp, double duration_s, double fs = 200.0) {
  pulsecmp::TimeSeries x;
  x.sample_rate_hz = fs;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  x.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.samples[i] = amp * std::sin(2.0 * pulsecmp::kPi * f_hz * static_cast<double>(i) / fs);
  }
  return x;
}

// Least-squares amplitude of a tone at f_hz over samples [begin, end).
inline double tone_amplitude(const std::vector<double>& y, double f_hz, double fs, std::size_t begin,
                             std::size_t end) {
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double w = 2.0 * pulsecmp::kPi * f_hz * static_cast<double>(i) / fs;
    const double s = std::sin(w), c = std::cos(w);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    ys += y[i] * s;
    yc += y[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

// Gaussian pulse per beat: foot at each beat start, peak at 30% of the beat.
inline pulsecmp::TimeSeries pulse_train(const std::vector<double>& beat_starts_s, double duration_s,
                                        double fs = 200.0) {
  pulsecmp::TimeSeries x;
  x.sample_rate_hz = fs;
  x.samples.assign(static_cast<std::size_t>(std::llround(duration_s * fs)), 0.0);
  for (std::size_t k = 0; k + 1 < beat_starts_s.size(); ++k) {
    const double t0 = beat_starts_s[k];
    const double len = beat_starts_s[k + 1] - t0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double phi = (x.time_at(i) - t0) / len;
      if (phi < 0.0 || phi >= 1.0) continue;
      x.samples[i] += std::exp(-0.5 * std::pow((phi - 0.3) / 0.08, 2));
    }
  }
  return x;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace testutil
