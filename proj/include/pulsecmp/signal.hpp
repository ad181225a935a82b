#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pulsecmp {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kDefaultSampleRateHz = 200.0;

// Uniformly sampled scalar signal. Sample i sits at
// start_time_s + i / sample_rate_hz.
struct TimeSeries {
  std::vector<double> samples;
  double sample_rate_hz = kDefaultSampleRateHz;
  double start_time_s = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double time_at(std::size_t i) const noexcept {
    return start_time_s + static_cast<double>(i) / sample_rate_hz;
  }
  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct ComplexSeries {
  std::vector<std::complex<double>> values;
  double sample_rate_hz = kDefaultSampleRateHz;
};

struct BandpassSpec {
  int order = 4;
  double low_cut_hz = 0.5;
  double high_cut_hz = 8.0;
};

// Transposed direct-form II biquad, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Digital Butterworth bandpass as a cascade of second-order sections.
struct BandpassDesign {
  std::vector<Biquad> sections;
  double sample_rate_hz = kDefaultSampleRateHz;

  // Single-pass magnitude response at f_hz.
  double magnitude(double f_hz) const;
  // Magnitude of the forward-backward (zero-phase) application, |H|^2.
  double zero_phase_gain(double f_hz) const { return magnitude(f_hz) * magnitude(f_hz); }
};

// Throws Error(kInvalidCutoff) unless 0 < low < high < fs/2 and order >= 1.
void validate_bandpass(const BandpassSpec& spec, double sample_rate_hz);

// Bilinear-transform design with prewarped band edges; one analog
// prototype pole of `order` maps to two bandpass poles, so the digital
// filter has 2*order poles and `order` sections.
BandpassDesign design_butterworth_bandpass(const BandpassSpec& spec, double sample_rate_hz);

// Reflection length used at each end before forward-backward filtering:
// 3 * order * ceil(fs / low_cut), capped at n - 1.
std::size_t filtfilt_pad_length(const BandpassSpec& spec, double sample_rate_hz, std::size_t n);

// Zero-phase forward-backward application with odd reflection padding and
// steady-state section initial conditions.
std::vector<double> filtfilt(const BandpassDesign& design, std::span<const double> x,
                             std::size_t pad);

TimeSeries butterworth_bandpass(const TimeSeries& x, const BandpassSpec& spec = {});

// Maps an angle to [-pi, pi].
double wrap_phase(double radians);

TimeSeries unwrap_phase(const TimeSeries& wrapped);
std::vector<double> unwrap_phase(std::span<const double> wrapped);

// One-sided DFT (bins 0..N/2), rectangular window, no zero padding.
std::vector<std::complex<double>> range_fft(std::span<const double> chirp);

// Linear interpolation onto target_len points spanning the first and last
// sample times inclusive.
std::vector<double> resample_linear(const TimeSeries& x, std::size_t target_len);
std::vector<double> resample_linear(std::span<const double> x, std::size_t target_len);

double mean(std::span<const double> x);
double peak_to_peak(std::span<const double> x);

}  // namespace pulsecmp
