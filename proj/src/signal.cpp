#include "pulsecmp/signal.hpp"

#include "pulsecmp/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

namespace pulsecmp {

namespace {

using cplx = std::complex<double>;

std::vector<double> run_cascade(const std::vector<Biquad>& sections, std::vector<double> x) {
  if (x.empty()) return x;
  // Steady-state initial conditions for a constant input equal to x[0].
  double level = x.front();
  for (const Biquad& s : sections) {
    const double dc_gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double y_ss = dc_gain * level;
    double z1 = y_ss - s.b0 * level;
    double z2 = s.b2 * level - s.a2 * y_ss;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level = y_ss;
  }
  return x;
}

// FFTW planning is not thread-safe; plans are cached per length and only
// executed through the new-array interface afterwards.
class R2cPlanCache {
 public:
  fftw_plan get(int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(static_cast<std::size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, plan);
    return plan;
  }

  ~R2cPlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<int, fftw_plan> plans_;
};

R2cPlanCache& plan_cache() {
  static R2cPlanCache cache;
  return cache;
}

}  // namespace

double BandpassDesign::magnitude(double f_hz) const {
  const double w = 2.0 * kPi * f_hz / sample_rate_hz;
  const cplx zinv = std::polar(1.0, -w);
  const cplx zinv2 = zinv * zinv;
  cplx h{1.0, 0.0};
  for (const Biquad& s : sections) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv2) / (1.0 + s.a1 * zinv + s.a2 * zinv2);
  }
  return std::abs(h);
}

void validate_bandpass(const BandpassSpec& spec, double sample_rate_hz) {
  if (spec.order < 1) {
    throw Error(ErrorCode::kInvalidArgument, "filter order must be >= 1");
  }
  if (!(sample_rate_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  const double nyquist = sample_rate_hz / 2.0;
  if (!(spec.low_cut_hz > 0.0) || !(spec.high_cut_hz > spec.low_cut_hz) ||
      !(spec.high_cut_hz < nyquist)) {
    throw Error(ErrorCode::kInvalidCutoff,
                "invalid cutoff: need 0 < low < high < fs/2 (low=" +
                    std::to_string(spec.low_cut_hz) + ", high=" +
                    std::to_string(spec.high_cut_hz) + ", fs=" + std::to_string(sample_rate_hz) +
                    ")");
  }
}

BandpassDesign design_butterworth_bandpass(const BandpassSpec& spec, double sample_rate_hz) {
  validate_bandpass(spec, sample_rate_hz);
  const int n = spec.order;
  const double fs2 = 2.0 * sample_rate_hz;
  const double w_lo = fs2 * std::tan(kPi * spec.low_cut_hz / sample_rate_hz);
  const double w_hi = fs2 * std::tan(kPi * spec.high_cut_hz / sample_rate_hz);
  const double bw = w_hi - w_lo;
  const double w0_sq = w_lo * w_hi;

  std::vector<cplx> analog_poles;
  analog_poles.reserve(2 * static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const cplx p = std::polar(1.0, kPi * (2.0 * k + n - 1.0) / (2.0 * n));
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0_sq);
    analog_poles.push_back(half + root);
    analog_poles.push_back(half - root);
  }

  // Bilinear map. Analog zeros: n at s = 0 -> z = 1; n at infinity -> z = -1.
  cplx gain = std::pow(cplx(bw, 0.0), n) * std::pow(cplx(fs2, 0.0), n);
  std::vector<cplx> poles;
  poles.reserve(analog_poles.size());
  for (const cplx& p : analog_poles) {
    gain /= (fs2 - p);
    poles.push_back((fs2 + p) / (fs2 - p));
  }
  const double k_digital = gain.real();

  std::vector<cplx> upper;
  std::vector<double> reals;
  for (const cplx& p : poles) {
    if (std::abs(p.imag()) <= 1e-12 * std::max(1.0, std::abs(p))) {
      reals.push_back(p.real());
    } else if (p.imag() > 0.0) {
      upper.push_back(p);
    }
  }
  std::sort(upper.begin(), upper.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
  std::sort(reals.begin(), reals.end());

  BandpassDesign design;
  design.sample_rate_hz = sample_rate_hz;
  const double section_gain = std::pow(k_digital, 1.0 / n);
  auto push = [&](double a1, double a2) {
    Biquad s;
    s.b0 = section_gain;
    s.b1 = 0.0;
    s.b2 = -section_gain;
    s.a1 = a1;
    s.a2 = a2;
    design.sections.push_back(s);
  };
  for (const cplx& p : upper) push(-2.0 * p.real(), std::norm(p));
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    push(-(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]);
  }
  return design;
}

std::size_t filtfilt_pad_length(const BandpassSpec& spec, double sample_rate_hz, std::size_t n) {
  if (n == 0) return 0;
  const double impulse = std::ceil(sample_rate_hz / spec.low_cut_hz);
  const auto pad = static_cast<std::size_t>(3.0 * spec.order * impulse);
  return std::min(pad, n - 1);
}

std::vector<double> filtfilt(const BandpassDesign& design, std::span<const double> x,
                             std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  pad = std::min(pad, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  const double first = x.front();
  const double last = x.back();
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * first - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * last - x[n - 1 - i]);

  ext = run_cascade(design.sections, std::move(ext));
  std::reverse(ext.begin(), ext.end());
  ext = run_cascade(design.sections, std::move(ext));
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

TimeSeries butterworth_bandpass(const TimeSeries& x, const BandpassSpec& spec) {
  const BandpassDesign design = design_butterworth_bandpass(spec, x.sample_rate_hz);
  if (x.size() < 3 * static_cast<std::size_t>(spec.order)) {
    throw Error(ErrorCode::kInputTooShort,
                "input too short: " + std::to_string(x.size()) + " samples, need at least " +
                    std::to_string(3 * spec.order));
  }
  TimeSeries out;
  out.sample_rate_hz = x.sample_rate_hz;
  out.start_time_s = x.start_time_s;
  out.samples = filtfilt(design, x.samples, filtfilt_pad_length(spec, x.sample_rate_hz, x.size()));
  return out;
}

double wrap_phase(double radians) {
  return std::atan2(std::sin(radians), std::cos(radians));
}

std::vector<double> unwrap_phase(std::span<const double> wrapped) {
  if (wrapped.empty()) throw Error(ErrorCode::kEmptyInput, "empty input");
  std::vector<double> out(wrapped.size());
  out[0] = wrapped[0];
  double turns = 0.0;
  for (std::size_t i = 1; i < wrapped.size(); ++i) {
    const double d = wrapped[i] - wrapped[i - 1];
    if (std::abs(d) > kPi) turns -= std::round(d / (2.0 * kPi));
    out[i] = wrapped[i] + 2.0 * kPi * turns;
  }
  return out;
}

TimeSeries unwrap_phase(const TimeSeries& wrapped) {
  TimeSeries out;
  out.sample_rate_hz = wrapped.sample_rate_hz;
  out.start_time_s = wrapped.start_time_s;
  out.samples = unwrap_phase(std::span<const double>(wrapped.samples));
  return out;
}

std::vector<std::complex<double>> range_fft(std::span<const double> chirp) {
  if (chirp.size() < 2) {
    throw Error(ErrorCode::kInputTooShort, "range_fft needs at least 2 samples");
  }
  const int n = static_cast<int>(chirp.size());
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
  // FFTW does not modify the input of an out-of-place r2c transform.
  fftw_execute_dft_r2c(plan_cache().get(n), const_cast<double*>(chirp.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> resample_linear(std::span<const double> x, std::size_t target_len) {
  if (x.size() < 2 || target_len < 2) {
    throw Error(ErrorCode::kInputTooShort, "resample_linear needs at least 2 input and output points");
  }
  const std::size_t n = x.size();
  std::vector<double> out(target_len);
  for (std::size_t j = 0; j < target_len; ++j) {
    const double pos = static_cast<double>(j * (n - 1)) / static_cast<double>(target_len - 1);
    const auto idx = std::min(static_cast<std::size_t>(pos), n - 2);
    const double frac = pos - static_cast<double>(idx);
    out[j] = frac == 0.0 ? x[idx] : x[idx] + frac * (x[idx + 1] - x[idx]);
  }
  out.front() = x.front();
  out.back() = x.back();
  return out;
}

std::vector<double> resample_linear(const TimeSeries& x, std::size_t target_len) {
  return resample_linear(std::span<const double>(x.samples), target_len);
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double peak_to_peak(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

}  // namespace pulsecmp
