#include "hnoise/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fft.hpp"
#include "text.hpp"

namespace hnoise {

const char* to_string(Window w) { return w == Window::hann ? "hann" : "rectangular"; }
const char* to_string(Detrend d) { return d == Detrend::constant ? "constant" : "none"; }

Window parse_window(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rectangular" || name == "rect" || name == "boxcar") return Window::rectangular;
  throw std::invalid_argument("unknown window '" + name + "'");
}

Detrend parse_detrend(const std::string& name) {
  if (name == "constant" || name == "mean") return Detrend::constant;
  if (name == "none") return Detrend::none;
  throw std::invalid_argument("unknown detrend '" + name + "'");
}

namespace {

std::vector<double> window_weights(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::hann) {
    // Periodic Hann, the usual choice for spectral estimation.
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
    }
  }
  return w;
}

// Accumulates one segment's one-sided periodogram into acc.
class SegmentPeriodogram {
 public:
  SegmentPeriodogram(std::size_t length, double delta_t, Window window, Detrend detrend)
      : length_(length), delta_t_(delta_t), detrend_(detrend), weights_(window_weights(window, length)) {
    const double power = std::inner_product(weights_.begin(), weights_.end(), weights_.begin(), 0.0);
    scale_ = delta_t_ / power;
    buffer_.resize(length);
  }

  std::size_t bins() const { return length_ / 2 + 1; }

  void accumulate(std::span<const double> segment, std::span<double> acc) {
    double mean = 0.0;
    if (detrend_ == Detrend::constant) {
      mean = std::accumulate(segment.begin(), segment.end(), 0.0) / static_cast<double>(length_);
    }
    for (std::size_t j = 0; j < length_; ++j) buffer_[j] = (segment[j] - mean) * weights_[j];
    const auto spectrum = detail::real_forward(buffer_);
    for (std::size_t l = 0; l < spectrum.size(); ++l) {
      const bool edge = l == 0 || 2 * l == length_;
      acc[l] += (edge ? 1.0 : 2.0) * scale_ * std::norm(spectrum[l]);
    }
  }

 private:
  std::size_t length_;
  double delta_t_;
  Detrend detrend_;
  std::vector<double> weights_;
  std::vector<double> buffer_;
  double scale_ = 0.0;
};

SpectrumEstimate make_estimate(std::size_t length, double delta_t, Window window, Detrend detrend) {
  SpectrumEstimate est;
  est.segment_length = length;
  est.delta_t = delta_t;
  est.window = window;
  est.detrend = detrend;
  est.level = Level::beta;
  const double df = 1.0 / (static_cast<double>(length) * delta_t);
  for (std::size_t l = 0; l <= length / 2; ++l) est.frequencies.push_back(static_cast<double>(l) * df);
  est.values.assign(est.frequencies.size(), 0.0);
  return est;
}

}  // namespace

SpectrumEstimate periodogram(std::span<const double> series, double delta_t, Window window,
                             Detrend detrend) {
  if (series.size() < 8) {
    throw std::invalid_argument("periodogram needs at least 8 samples");
  }
  if (!(delta_t > 0.0)) {
    throw std::invalid_argument("delta_t must be positive");
  }
  SpectrumEstimate est = make_estimate(series.size(), delta_t, window, detrend);
  SegmentPeriodogram seg(series.size(), delta_t, window, detrend);
  seg.accumulate(series, est.values);
  est.n_segments = 1;
  est.n_series = 1;
  return est;
}

SpectrumEstimate welch_psd(std::span<const std::vector<double>> series, double delta_t,
                           const WelchOptions& options) {
  if (series.empty()) {
    throw std::invalid_argument("welch_psd needs at least one series");
  }
  if (!(delta_t > 0.0)) {
    throw std::invalid_argument("delta_t must be positive");
  }
  if (!(options.overlap_fraction >= 0.0 && options.overlap_fraction < 1.0)) {
    throw std::invalid_argument("overlap_fraction must lie in [0, 1)");
  }
  const std::size_t n = series.front().size();
  for (const auto& s : series) {
    if (s.size() != n) throw std::invalid_argument("welch_psd series lengths differ");
  }
  const std::size_t length = options.segment_length == 0 ? n : options.segment_length;
  if (length > n) {
    throw std::invalid_argument("segment_length " + std::to_string(length) +
                                " exceeds series length " + std::to_string(n));
  }
  if (length < 8) {
    throw std::invalid_argument("segment_length must be at least 8");
  }
  const auto overlap = static_cast<std::size_t>(std::floor(static_cast<double>(length) * options.overlap_fraction));
  const std::size_t step = length - overlap;
  const std::size_t per_series = (n - length) / step + 1;

  SpectrumEstimate est = make_estimate(length, delta_t, options.window, options.detrend);
  SegmentPeriodogram seg(length, delta_t, options.window, options.detrend);
  for (const auto& s : series) {
    for (std::size_t k = 0; k < per_series; ++k) {
      seg.accumulate(std::span<const double>(s).subspan(k * step, length), est.values);
    }
  }
  est.n_series = series.size();
  est.n_segments = per_series * series.size();
  const double inv = 1.0 / static_cast<double>(est.n_segments);
  for (double& v : est.values) v *= inv;
  return est;
}

SpectrumEstimate welch_psd(const SampleMatrix& samples, const WelchOptions& options) {
  std::vector<std::vector<double>> columns;
  columns.reserve(samples.n_qubits());
  for (std::size_t i = 0; i < samples.n_qubits(); ++i) columns.push_back(samples.column(i));
  return welch_psd(columns, samples.schedule().delta_t.seconds(), options);
}

SpectrumEstimate welch_psd(std::span<const NoiseTrace> traces, const WelchOptions& options) {
  if (traces.empty()) {
    throw std::invalid_argument("welch_psd needs at least one trace");
  }
  std::vector<std::vector<double>> columns;
  columns.reserve(traces.size());
  for (const auto& t : traces) columns.push_back(t.values);
  return welch_psd(columns, traces.front().sample_period, options);
}

SpectrumEstimate scale_to_phi(const SpectrumEstimate& beta, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("alpha must be positive");
  }
  if (beta.level != Level::beta) {
    throw std::invalid_argument("scale_to_phi expects a beta-level spectrum");
  }
  SpectrumEstimate out = beta;
  const double scale = 4.0 * alpha * alpha;
  for (double& v : out.values) v /= scale;
  out.level = Level::phi;
  out.alpha = alpha;
  return out;
}

SpectrumEstimate remove_f0(const SpectrumEstimate& spectrum) {
  SpectrumEstimate out = spectrum;
  if (spectrum.f0_removed) {
    out.diagnostics.push_back("remove_f0: DC bin already removed");
    return out;
  }
  if (!out.values.empty()) {
    out.values.erase(out.values.begin());
    out.frequencies.erase(out.frequencies.begin());
  }
  out.f0_removed = true;
  return out;
}

SumRuleReport check_sum_rule(const SpectrumEstimate& spectrum, double alpha, double /*delta_t*/) {
  SumRuleReport report;
  if (spectrum.level == Level::beta) {
    report.target = 1.0;
  } else {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    report.target = 1.0 / (4.0 * alpha * alpha);
  }
  for (std::size_t l = 1; l < spectrum.size(); ++l) {
    report.integral += 0.5 * (spectrum.values[l] + spectrum.values[l - 1]) *
                       (spectrum.frequencies[l] - spectrum.frequencies[l - 1]);
  }
  report.relative_error = std::abs(report.integral - report.target) / report.target;
  return report;
}

double loglog_slope(const SpectrumEstimate& spectrum, double f_lo, double f_hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t l = 0; l < spectrum.size(); ++l) {
    const double f = spectrum.frequencies[l];
    if (f <= 0.0 || f < f_lo || f > f_hi || spectrum.values[l] <= 0.0) continue;
    const double x = std::log10(f);
    const double y = std::log10(spectrum.values[l]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) {
    throw std::invalid_argument("loglog_slope needs at least two positive bins in band");
  }
  const double mm = static_cast<double>(m);
  return (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
}

void write_spectrum_csv(std::ostream& out, const SpectrumEstimate& spectrum) {
  out << "f_hz,psd_seconds,psd_microseconds,level\n";
  const char* level = to_string(spectrum.level);
  for (std::size_t l = 0; l < spectrum.size(); ++l) {
    out << detail::format_double(spectrum.frequencies[l]) << ','
        << detail::format_double(spectrum.values[l]) << ','
        << detail::format_double(to_microseconds(spectrum.values[l])) << ',' << level << '\n';
  }
}

std::string spectrum_metadata_json(const SpectrumEstimate& spectrum) {
  nlohmann::ordered_json meta;
  meta["level"] = to_string(spectrum.level);
  meta["window"] = to_string(spectrum.window);
  meta["detrend"] = to_string(spectrum.detrend);
  meta["segment_length"] = spectrum.segment_length;
  meta["n_segments"] = spectrum.n_segments;
  meta["n_series"] = spectrum.n_series;
  meta["delta_t_seconds"] = spectrum.delta_t;
  meta["f0_removed"] = spectrum.f0_removed;
  meta["alpha"] = spectrum.alpha ? nlohmann::ordered_json(*spectrum.alpha) : nlohmann::ordered_json();
  meta["diagnostics"] = spectrum.diagnostics;
  return meta.dump(2) + "\n";
}

}  // namespace hnoise
