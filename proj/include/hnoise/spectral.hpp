#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hnoise/core.hpp"
#include "hnoise/estimation.hpp"
#include "hnoise/noise_synth.hpp"

namespace hnoise {

enum class Window { rectangular, hann };
enum class Detrend { none, constant };

const char* to_string(Window w);
const char* to_string(Detrend d);
Window parse_window(const std::string& name);
Detrend parse_detrend(const std::string& name);

/// One-sided PSD in seconds on f_l = l / (L dt), l = 0..L/2 (or from l = 1
/// once the DC bin has been removed). DC and Nyquist bins carry no factor 2,
/// so sum_l P_l df is the mean square of the input.
struct SpectrumEstimate {
  std::vector<double> frequencies;
  std::vector<double> values;
  Level level = Level::beta;
  Window window = Window::hann;
  Detrend detrend = Detrend::constant;
  std::size_t segment_length = 0;
  /// Segments averaged in total (segments per series x series).
  std::size_t n_segments = 0;
  std::size_t n_series = 0;
  double delta_t = 0.0;
  bool f0_removed = false;
  /// alpha used to convert beta -> phi.
  std::optional<double> alpha;
  std::vector<std::string> diagnostics;

  std::size_t size() const { return values.size(); }
  double frequency_step() const { return 1.0 / (static_cast<double>(segment_length) * delta_t); }
};

/// P(f_l) = (2 dt / sum w^2) |sum_j w_j x_j e^{-2 pi i l j / N}|^2 on interior bins.
SpectrumEstimate periodogram(std::span<const double> series, double delta_t,
                             Window window = Window::hann, Detrend detrend = Detrend::constant);

struct WelchOptions {
  /// 0 selects the full series length.
  std::size_t segment_length = 0;
  double overlap_fraction = 0.0;
  Window window = Window::hann;
  Detrend detrend = Detrend::constant;
};

/// Average of per-segment periodograms over every segment of every series.
SpectrumEstimate welch_psd(std::span<const std::vector<double>> series, double delta_t,
                           const WelchOptions& options = {});
SpectrumEstimate welch_psd(const SampleMatrix& samples, const WelchOptions& options = {});
SpectrumEstimate welch_psd(std::span<const NoiseTrace> traces, const WelchOptions& options = {});

/// Divides every value by 4 alpha^2 and relabels the spectrum as phi-level.
SpectrumEstimate scale_to_phi(const SpectrumEstimate& beta, double alpha);

/// Drops the DC bin. A second call is a no-op that records a diagnostic.
SpectrumEstimate remove_f0(const SpectrumEstimate& spectrum);

struct SumRuleReport {
  double integral = 0.0;
  double target = 0.0;
  double relative_error = 0.0;
};

/// Trapezoid integral of the spectrum against 1 (beta level) or 1/(4 alpha^2) (phi level).
SumRuleReport check_sum_rule(const SpectrumEstimate& spectrum, double alpha, double delta_t);

/// Least-squares slope of log10 P against log10 f over bins in [f_lo, f_hi].
double loglog_slope(const SpectrumEstimate& spectrum, double f_lo, double f_hi);

/// CSV with header f_hz,psd_seconds,psd_microseconds,level.
void write_spectrum_csv(std::ostream& out, const SpectrumEstimate& spectrum);
/// JSON metadata sidecar (window, segments, alpha, ...).
std::string spectrum_metadata_json(const SpectrumEstimate& spectrum);

}  // namespace hnoise
