#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hnoise/core.hpp"
#include "hnoise/sampler.hpp"

namespace hnoise {

enum class Level { beta, phi };
const char* to_string(Level level);

/// Lag-indexed correlation <x(t_k) x(0)>, k = 0..k_max, t_k = k dt.
struct CorrelationSeries {
  std::vector<std::size_t> lags;
  std::vector<double> times;
  std::vector<double> values;
  /// Observations entering each lag: N - k.
  std::vector<std::size_t> counts;
  /// Jackknife over qubits; binomial 1/sqrt(N-k) for a single qubit.
  std::vector<double> stderrs;
  Level level = Level::beta;
  double delta_t = 0.0;
  /// Set once converted to phi: the beta -> phi relation does not hold at t = 0.
  bool lag0_excluded = false;

  std::size_t size() const { return values.size(); }
};

inline std::size_t default_k_max(std::size_t n_runs) { return n_runs / 2; }

/// values[k] = (1/(N-k)) sum_{j<N-k} x(j+k) x(j). Requires k_max <= N/2.
CorrelationSeries qubit_correlation(std::span<const double> series, std::size_t k_max,
                                    double delta_t);
CorrelationSeries qubit_correlation(const SampleMatrix& samples, std::size_t qubit,
                                    std::size_t k_max);

/// Mean over qubits of qubit_correlation. Sums are accumulated exactly in
/// integers, so the result does not depend on qubit order.
CorrelationSeries averaged_correlation(const SampleMatrix& samples, std::size_t k_max);
inline CorrelationSeries averaged_correlation(const SampleMatrix& samples) {
  return averaged_correlation(samples, default_k_max(samples.n_runs()));
}

struct CalibrationPoint {
  double phi = 0.0;
  double p_minus = 0.0;
  /// Binomial standard error sqrt(p (1 - p) / n).
  double stderr_p = 0.0;
  std::uint64_t count_total = 0;
  bool used = false;
};

struct CalibrationResult {
  double alpha = 0.0;
  double alpha_stderr = 0.0;
  std::vector<CalibrationPoint> points;
  /// Largest |phi| that entered the regression.
  double linear_range_max = 0.0;
  /// Non-fatal findings: non-positive slope, too few points.
  std::vector<std::string> diagnostics;

  bool ok() const { return alpha > 0.0; }
};

/// Weighted least-squares slope of (p_- - 1/2) against phi through the origin,
/// with inverse binomial variances as weights. Points with |phi| above
/// linear_range are reported but not fitted. Throws CalibrationRangeError when
/// no point is usable.
CalibrationResult fit_alpha(std::span<const SweepPoint> sweep, double linear_range = 1e-2);

/// <phi phi>(k) = <beta beta>(k) / (4 alpha^2) for k >= 1.
CorrelationSeries beta_to_phi(const CorrelationSeries& beta, double alpha);

/// sqrt(<phi(dt) phi(0)>); empty when the lag-1 value is negative (noise floor).
std::optional<double> rms_phi(const CorrelationSeries& phi);

/// Optional alpha re-tuning: each alpha moves within +-stderr so the phi-level
/// curves of all schedules collapse onto each other in least squares. Curves
/// are compared on the lag grid of the longest delta_t.
std::vector<double> collapse_alphas(std::span<const CorrelationSeries> beta_curves,
                                    std::span<const double> alphas,
                                    std::span<const double> alpha_stderrs);

/// CSV with header lag,t_seconds,value,count,stderr.
void write_correlation_csv(std::ostream& out, const CorrelationSeries& series);

}  // namespace hnoise
