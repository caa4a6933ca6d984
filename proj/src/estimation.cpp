#include "hnoise/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <limits>
#include <set>
#include <stdexcept>

#include "hnoise/errors.hpp"
#include "text.hpp"

namespace hnoise {

const char* to_string(Level level) { return level == Level::beta ? "beta" : "phi"; }

namespace {

void check_k_max(std::size_t n, std::size_t k_max) {
  if (n < 2) {
    throw std::invalid_argument("correlation needs at least two samples");
  }
  if (k_max > n / 2) {
    throw std::invalid_argument("k_max = " + std::to_string(k_max) + " exceeds N/2 = " +
                                std::to_string(n / 2));
  }
}

CorrelationSeries empty_series(std::size_t n, std::size_t k_max, double delta_t) {
  CorrelationSeries out;
  out.delta_t = delta_t;
  out.level = Level::beta;
  for (std::size_t k = 0; k <= k_max; ++k) {
    out.lags.push_back(k);
    out.times.push_back(static_cast<double>(k) * delta_t);
    out.counts.push_back(n - k);
  }
  out.values.assign(k_max + 1, 0.0);
  out.stderrs.assign(k_max + 1, 0.0);
  return out;
}

// Exact lagged sums of a +-1 series.
void lagged_sums(std::span<const std::int8_t> x, std::size_t k_max, std::span<std::int64_t> out) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k <= k_max; ++k) {
    std::int32_t s = 0;
    const std::int8_t* a = x.data();
    const std::int8_t* b = x.data() + k;
    for (std::size_t j = 0; j + k < n; ++j) {
      s += static_cast<std::int32_t>(a[j]) * b[j];
    }
    out[k] = s;
  }
}

double white_stderr(std::size_t k, std::size_t count) {
  return k == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(count));
}

}  // namespace

CorrelationSeries qubit_correlation(std::span<const double> series, std::size_t k_max,
                                    double delta_t) {
  const std::size_t n = series.size();
  check_k_max(n, k_max);
  CorrelationSeries out = empty_series(n, k_max, delta_t);
  for (std::size_t k = 0; k <= k_max; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j + k < n; ++j) {
      s += series[j + k] * series[j];
    }
    out.values[k] = s / static_cast<double>(n - k);
    out.stderrs[k] = white_stderr(k, n - k);
  }
  return out;
}

CorrelationSeries qubit_correlation(const SampleMatrix& samples, std::size_t qubit,
                                    std::size_t k_max) {
  const std::vector<double> col = samples.column(qubit);
  return qubit_correlation(col, k_max, samples.schedule().delta_t.seconds());
}

CorrelationSeries averaged_correlation(const SampleMatrix& samples, std::size_t k_max) {
  const std::size_t n_runs = samples.n_runs();
  const std::size_t n_qubits = samples.n_qubits();
  check_k_max(n_runs, k_max);
  CorrelationSeries out = empty_series(n_runs, k_max, samples.schedule().delta_t.seconds());

  std::vector<std::int64_t> total(k_max + 1, 0);
  // Sum of squared per-qubit sums, for the jackknife spread.
  std::vector<double> total_sq(k_max + 1, 0.0);
  std::vector<std::int8_t> column(n_runs);
  std::vector<std::int64_t> sums(k_max + 1);
  for (std::size_t i = 0; i < n_qubits; ++i) {
    for (std::size_t j = 0; j < n_runs; ++j) column[j] = samples.at(j, i);
    lagged_sums(column, k_max, sums);
    for (std::size_t k = 0; k <= k_max; ++k) {
      total[k] += sums[k];
      const double c = static_cast<double>(sums[k]) / static_cast<double>(n_runs - k);
      total_sq[k] += c * c;
    }
  }

  const double n = static_cast<double>(n_qubits);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double denom = static_cast<double>(n_runs - k);
    const double mean = static_cast<double>(total[k]) / (n * denom);
    out.values[k] = mean;
    if (n_qubits == 1) {
      out.stderrs[k] = white_stderr(k, n_runs - k);
    } else {
      // Jackknife of a mean reduces to the sample standard error.
      const double var = std::max(0.0, (total_sq[k] - n * mean * mean) / (n - 1.0));
      out.stderrs[k] = std::sqrt(var / n);
    }
  }
  return out;
}

CalibrationResult fit_alpha(std::span<const SweepPoint> sweep, double linear_range) {
  CalibrationResult result;
  double sxx = 0.0;
  double sxy = 0.0;
  std::set<double> distinct;
  std::size_t used = 0;
  for (const SweepPoint& sp : sweep) {
    if (sp.count_total == 0) {
      throw std::invalid_argument("sweep point with zero runs");
    }
    CalibrationPoint cp;
    cp.phi = sp.phi;
    cp.p_minus = sp.fraction_minus();
    cp.count_total = sp.count_total;
    const double n = static_cast<double>(sp.count_total);
    cp.stderr_p = std::sqrt(cp.p_minus * (1.0 - cp.p_minus) / n);
    cp.used = std::abs(sp.phi) <= linear_range;
    if (cp.used) {
      // Floor keeps saturated points (p = 0 or 1) at finite weight.
      const double var = std::max(cp.p_minus * (1.0 - cp.p_minus), 1.0 / n) / n;
      const double w = 1.0 / var;
      sxx += w * sp.phi * sp.phi;
      sxy += w * sp.phi * (cp.p_minus - 0.5);
      result.linear_range_max = std::max(result.linear_range_max, std::abs(sp.phi));
      if (sp.phi != 0.0) distinct.insert(sp.phi);
      ++used;
    }
    result.points.push_back(cp);
  }
  if (used == 0 || sxx == 0.0) {
    throw CalibrationRangeError("no calibration point with 0 < |phi| <= " +
                                detail::format_double(linear_range));
  }
  if (distinct.size() < 2) {
    result.diagnostics.push_back("fewer than two distinct nonzero phi values inside the linear range");
  }

  result.alpha = sxy / sxx;
  if (used > 1) {
    double chi2 = 0.0;
    for (const CalibrationPoint& cp : result.points) {
      if (!cp.used) continue;
      const double n = static_cast<double>(cp.count_total);
      const double var = std::max(cp.p_minus * (1.0 - cp.p_minus), 1.0 / n) / n;
      const double r = (cp.p_minus - 0.5) - result.alpha * cp.phi;
      chi2 += r * r / var;
    }
    result.alpha_stderr = std::sqrt(chi2 / static_cast<double>(used - 1) / sxx);
  } else {
    result.alpha_stderr = std::sqrt(1.0 / sxx);
  }
  if (!(result.alpha > 0.0)) {
    result.diagnostics.push_back(
        "non-positive alpha slope; check the sign convention of p_- versus h");
  }
  return result;
}

CorrelationSeries beta_to_phi(const CorrelationSeries& beta, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("alpha must be positive");
  }
  if (beta.level != Level::beta) {
    throw std::invalid_argument("beta_to_phi expects a beta-level series");
  }
  CorrelationSeries out = beta;
  const double scale = 4.0 * alpha * alpha;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.values[k] /= scale;
    out.stderrs[k] /= scale;
  }
  out.level = Level::phi;
  out.lag0_excluded = true;
  return out;
}

std::optional<double> rms_phi(const CorrelationSeries& phi) {
  if (phi.level != Level::phi) {
    throw std::invalid_argument("rms_phi expects a phi-level series");
  }
  if (phi.size() < 2) {
    throw std::invalid_argument("rms_phi needs the lag-1 value");
  }
  const double c1 = phi.values[1];
  if (c1 < 0.0) {
    return std::nullopt;
  }
  return std::sqrt(c1);
}

namespace {

double interpolate(const CorrelationSeries& c, double t) {
  const double pos = t / c.delta_t;
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= c.size()) return c.values.back();
  const double frac = pos - static_cast<double>(k);
  return c.values[k] * (1.0 - frac) + c.values[k + 1] * frac;
}

}  // namespace

std::vector<double> collapse_alphas(std::span<const CorrelationSeries> beta_curves,
                                    std::span<const double> alphas,
                                    std::span<const double> alpha_stderrs) {
  const std::size_t m = beta_curves.size();
  if (alphas.size() != m || alpha_stderrs.size() != m) {
    throw std::invalid_argument("collapse_alphas: mismatched input lengths");
  }
  std::vector<double> out(alphas.begin(), alphas.end());
  if (m < 2) return out;

  double dt_max = 0.0;
  double t_end = std::numeric_limits<double>::infinity();
  for (const auto& c : beta_curves) {
    if (c.level != Level::beta || c.size() < 2) {
      throw std::invalid_argument("collapse_alphas expects beta-level curves with lag >= 1");
    }
    dt_max = std::max(dt_max, c.delta_t);
    t_end = std::min(t_end, c.times.back());
  }
  std::vector<double> grid;
  for (double t = dt_max; t <= t_end * (1.0 + 1e-12); t += dt_max) grid.push_back(t);
  if (grid.empty()) return out;

  // b[i][t]: beta curve i on the common grid. The phi curve is g_i b_i with g_i = 1/(4 alpha_i^2).
  std::vector<std::vector<double>> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (double t : grid) b[i].push_back(interpolate(beta_curves[i], t));
  }
  std::vector<double> g(m), lo(m), hi(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(alphas[i] > 0.0)) throw std::invalid_argument("alpha must be positive");
    const double s = std::abs(alpha_stderrs[i]);
    g[i] = 1.0 / (4.0 * alphas[i] * alphas[i]);
    lo[i] = 1.0 / (4.0 * (alphas[i] + s) * (alphas[i] + s));
    const double a_lo = alphas[i] - s;
    hi[i] = a_lo > 0.0 ? 1.0 / (4.0 * a_lo * a_lo) : std::numeric_limits<double>::max();
  }

  // Coordinate descent: the objective is quadratic in each g_i.
  for (int sweep = 0; sweep < 200; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double bb = 0.0;
      double cross = 0.0;
      for (std::size_t t = 0; t < grid.size(); ++t) bb += b[i][t] * b[i][t];
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        for (std::size_t t = 0; t < grid.size(); ++t) cross += b[i][t] * b[j][t] * g[j];
      }
      if (bb <= 0.0) continue;
      const double next = std::clamp(cross / (static_cast<double>(m - 1) * bb), lo[i], hi[i]);
      change = std::max(change, std::abs(next - g[i]) / g[i]);
      g[i] = next;
    }
    if (change < 1e-12) break;
  }
  for (std::size_t i = 0; i < m; ++i) out[i] = 1.0 / std::sqrt(4.0 * g[i]);
  return out;
}

void write_correlation_csv(std::ostream& out, const CorrelationSeries& series) {
  out << "lag,t_seconds,value,count,stderr\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << series.lags[k] << ',' << detail::format_double(series.times[k]) << ','
        << detail::format_double(series.values[k]) << ',' << series.counts[k] << ','
        << detail::format_double(series.stderrs[k]) << '\n';
  }
}

}  // namespace hnoise
