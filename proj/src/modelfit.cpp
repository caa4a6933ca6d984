#include "hnoise/modelfit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hnoise/errors.hpp"

namespace hnoise {

namespace {
constexpr double kMicrosecond = 1e-6;
}

double white_background(double amplitude_hz, double exponent, double alpha, double delta_t) {
  if (!(exponent > 0.0 && exponent < 1.0)) {
    throw std::invalid_argument("white_background needs 0 < a < 1");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(delta_t > 0.0)) throw std::invalid_argument("delta_t must be positive");
  if (!(amplitude_hz >= 0.0)) throw std::invalid_argument("amplitude must be non-negative");
  const double shot = (delta_t / kMicrosecond) / (2.0 * alpha * alpha);
  const double flux = std::pow(2.0 * delta_t * amplitude_hz, exponent) / (1.0 - exponent);
  return shot - flux;
}

std::vector<double> model_curve(double amplitude_hz, double exponent, double white,
                                std::span<const double> frequencies) {
  std::vector<double> out;
  out.reserve(frequencies.size());
  for (double f : frequencies) {
    if (!(f > 0.0)) throw std::invalid_argument("model_curve needs f > 0");
    const double flux = amplitude_hz == 0.0 ? 0.0 : std::pow(amplitude_hz / f, exponent);
    out.push_back((flux + white) * kMicrosecond);
  }
  return out;
}

SpectrumEstimate model_spectrum(double amplitude_hz, double exponent, double alpha, double delta_t,
                                std::size_t n_runs) {
  if (n_runs < 4) throw std::invalid_argument("model_spectrum needs n_runs >= 4");
  SpectrumEstimate est;
  est.level = Level::phi;
  est.window = Window::rectangular;
  est.detrend = Detrend::none;
  est.segment_length = n_runs;
  est.n_segments = 1;
  est.n_series = 1;
  est.delta_t = delta_t;
  est.f0_removed = true;
  est.alpha = alpha;
  const double df = 1.0 / (static_cast<double>(n_runs) * delta_t);
  for (std::size_t l = 1; l <= n_runs / 2; ++l) est.frequencies.push_back(static_cast<double>(l) * df);
  est.values = model_curve(amplitude_hz, exponent,
                           white_background(amplitude_hz, exponent, alpha, delta_t), est.frequencies);
  return est;
}

bool FluxNoiseFit::feasible() const {
  return std::all_of(backgrounds.begin(), backgrounds.end(),
                     [](const ScheduleBackground& b) { return b.feasible; });
}

namespace {

struct PreparedSpectrum {
  std::vector<double> log_f;
  std::vector<double> log_s;
  double alpha;
  double delta_t;
};

class Objective {
 public:
  Objective(std::span<const FitInput> inputs, const FitOptions& options) : options_(options) {
    if (inputs.empty()) throw std::invalid_argument("global_fit needs at least one spectrum");
    for (const FitInput& in : inputs) {
      if (in.spectrum.level != Level::phi) {
        throw std::invalid_argument("global_fit expects phi-level spectra");
      }
      if (!in.spectrum.f0_removed) {
        throw std::invalid_argument("global_fit expects spectra with the f = 0 bin removed");
      }
      if (!(in.alpha > 0.0) || !(in.delta_t > 0.0)) {
        throw std::invalid_argument("global_fit inputs need alpha > 0 and delta_t > 0");
      }
      PreparedSpectrum p{{}, {}, in.alpha, in.delta_t};
      std::size_t positive = 0;
      for (std::size_t l = 0; l < in.spectrum.size(); ++l) {
        const double f = in.spectrum.frequencies[l];
        const double s = in.spectrum.values[l];
        if (f > 0.0 && positive++ < options.skip_low_bins) continue;
        if (f > 0.0 && s > 0.0 && std::isfinite(s)) {
          p.log_f.push_back(std::log10(f));
          p.log_s.push_back(std::log10(s / kMicrosecond));
        } else {
          ++skipped_;
        }
      }
      n_points_ += p.log_f.size();
      spectra_.push_back(std::move(p));
    }
    if (n_points_ == 0) throw std::invalid_argument("global_fit: no positive spectral bins");
  }

  double operator()(double log10_a, double exponent) const {
    ++evaluations_;
    const double amplitude = std::pow(10.0, log10_a);
    double total = 0.0;
    for (const PreparedSpectrum& p : spectra_) {
      double w = white_background(amplitude, exponent, p.alpha, p.delta_t);
      if (w < 0.0) {
        total += options_.infeasibility_penalty * static_cast<double>(p.log_f.size()) * w * w;
        w = 0.0;
      }
      for (std::size_t l = 0; l < p.log_f.size(); ++l) {
        const double flux = std::pow(10.0, exponent * (log10_a - p.log_f[l]));
        const double r = p.log_s[l] - std::log10(flux + w);
        total += r * r;
      }
    }
    return total;
  }

  bool feasible_at(double log10_a, double exponent) const {
    const double amplitude = std::pow(10.0, log10_a);
    return std::all_of(spectra_.begin(), spectra_.end(), [&](const PreparedSpectrum& p) {
      return white_background(amplitude, exponent, p.alpha, p.delta_t) >= 0.0;
    });
  }

  std::size_t n_points() const { return n_points_; }
  std::size_t skipped() const { return skipped_; }
  std::size_t evaluations() const { return evaluations_; }

 private:
  FitOptions options_;
  std::vector<PreparedSpectrum> spectra_;
  std::size_t n_points_ = 0;
  std::size_t skipped_ = 0;
  mutable std::size_t evaluations_ = 0;
};

using Point = std::array<double, 2>;

struct Box {
  Point lo;
  Point hi;
  Point clamp(Point p) const {
    for (int d = 0; d < 2; ++d) p[d] = std::clamp(p[d], lo[d], hi[d]);
    return p;
  }
};

struct SearchResult {
  Point x;
  double f;
  bool converged;
};

// Nelder-Mead on a box: every trial point is projected back inside.
SearchResult nelder_mead(const Objective& obj, const Box& box, Point start, Point step,
                         double tol, std::size_t budget) {
  std::array<Point, 3> v{start, start, start};
  v[1][0] += step[0];
  v[2][1] += step[1];
  for (auto& p : v) p = box.clamp(p);
  // A vertex clamped onto another would make the simplex degenerate.
  if (v[1] == v[0]) v[1][0] -= step[0];
  if (v[2] == v[0]) v[2][1] -= step[1];
  for (auto& p : v) p = box.clamp(p);
  std::array<double, 3> fv{};
  for (int i = 0; i < 3; ++i) fv[i] = obj(v[i][0], v[i][1]);
  std::size_t used = 3;
  const double size_tol = std::sqrt(tol);

  auto eval = [&](const Point& p) {
    ++used;
    return obj(p[0], p[1]);
  };
  auto lerp = [](const Point& a, const Point& b, double t) {
    return Point{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  };

  bool converged = false;
  while (used < budget) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::array<Point, 3> sv{v[order[0]], v[order[1]], v[order[2]]};
    std::array<double, 3> sf{fv[order[0]], fv[order[1]], fv[order[2]]};
    v = sv;
    fv = sf;

    double diameter = 0.0;
    for (int i = 1; i < 3; ++i) {
      for (int d = 0; d < 2; ++d) diameter = std::max(diameter, std::abs(v[i][d] - v[0][d]));
    }
    if (fv[2] - fv[0] <= tol && diameter <= size_tol) {
      converged = true;
      break;
    }

    const Point centroid{(v[0][0] + v[1][0]) / 2.0, (v[0][1] + v[1][1]) / 2.0};
    const Point xr = box.clamp(lerp(centroid, v[2], -1.0));
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const Point xe = box.clamp(lerp(centroid, v[2], -2.0));
      const double fe = eval(xe);
      if (fe < fr) {
        v[2] = xe;
        fv[2] = fe;
      } else {
        v[2] = xr;
        fv[2] = fr;
      }
    } else if (fr < fv[1]) {
      v[2] = xr;
      fv[2] = fr;
    } else {
      const bool outside = fr < fv[2];
      const Point xc = box.clamp(outside ? lerp(centroid, xr, 0.5) : lerp(centroid, v[2], 0.5));
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[2])) {
        v[2] = xc;
        fv[2] = fc;
      } else {
        for (int i = 1; i < 3; ++i) {
          v[i] = lerp(v[0], v[i], 0.5);
          fv[i] = eval(v[i]);
        }
      }
    }
  }
  const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
  return {v[static_cast<std::size_t>(best)], fv[static_cast<std::size_t>(best)], converged};
}

struct LocalQuadratic {
  Point gradient;
  std::array<Point, 2> hessian;
};

// Central differences; the step shrinks near a bound so points stay inside.
LocalQuadratic local_quadratic(const Objective& obj, const Box& box, const Point& x) {
  Point h{};
  for (int d = 0; d < 2; ++d) {
    h[d] = std::min({1e-4, (x[d] - box.lo[d]) / 2.0, (box.hi[d] - x[d]) / 2.0});
    h[d] = std::max(h[d], 1e-9);
  }
  auto f = [&](double dx, double da) { return obj(x[0] + dx, x[1] + da); };
  const double f0 = f(0, 0);
  LocalQuadratic q{};
  const double fxp = f(h[0], 0), fxm = f(-h[0], 0);
  const double fap = f(0, h[1]), fam = f(0, -h[1]);
  q.gradient = {(fxp - fxm) / (2 * h[0]), (fap - fam) / (2 * h[1])};
  q.hessian[0][0] = (fxp - 2 * f0 + fxm) / (h[0] * h[0]);
  q.hessian[1][1] = (fap - 2 * f0 + fam) / (h[1] * h[1]);
  const double fpp = f(h[0], h[1]), fpm = f(h[0], -h[1]);
  const double fmp = f(-h[0], h[1]), fmm = f(-h[0], -h[1]);
  q.hessian[0][1] = q.hessian[1][0] = (fpp - fpm - fmp + fmm) / (4 * h[0] * h[1]);
  return q;
}

bool invert(const std::array<Point, 2>& m, std::array<Point, 2>& inv) {
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (!(m[0][0] > 0.0) || !(det > 0.0)) return false;
  inv[0][0] = m[1][1] / det;
  inv[1][1] = m[0][0] / det;
  inv[0][1] = inv[1][0] = -m[0][1] / det;
  return true;
}

// Newton iterations from the simplex optimum drive the gradient to the
// finite-difference noise floor.
SearchResult newton_polish(const Objective& obj, const Box& box, SearchResult start) {
  SearchResult cur = start;
  for (int iter = 0; iter < 30; ++iter) {
    const LocalQuadratic q = local_quadratic(obj, box, cur.x);
    std::array<Point, 2> inv{};
    if (!invert(q.hessian, inv)) break;
    const Point step{-(inv[0][0] * q.gradient[0] + inv[0][1] * q.gradient[1]),
                     -(inv[1][0] * q.gradient[0] + inv[1][1] * q.gradient[1])};
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 20; ++ls, t *= 0.5) {
      const Point trial = box.clamp({cur.x[0] + t * step[0], cur.x[1] + t * step[1]});
      const double ft = obj(trial[0], trial[1]);
      if (ft <= cur.f) {
        improved = ft < cur.f || trial != cur.x;
        const double gain = cur.f - ft;
        cur = {trial, ft, cur.converged};
        if (gain <= 1e-15 * std::max(1.0, cur.f)) return cur;
        break;
      }
    }
    if (!improved) break;
  }
  return cur;
}

}  // namespace

double fit_objective(std::span<const FitInput> inputs, double log10_amplitude, double exponent,
                     const FitOptions& options) {
  const Objective obj(inputs, options);
  return obj(log10_amplitude, exponent);
}

FluxNoiseFit global_fit(std::span<const FitInput> inputs, const FitOptions& options) {
  const Objective obj(inputs, options);
  const Box box{{options.log10_amplitude_min, options.exponent_min},
                {options.log10_amplitude_max, options.exponent_max}};
  if (!(box.lo[0] < box.hi[0]) || !(box.lo[1] < box.hi[1]) || box.lo[1] <= 0.0 || box.hi[1] >= 1.0) {
    throw std::invalid_argument("invalid fit bounds");
  }
  const std::size_t grid = std::max<std::size_t>(options.grid_points, 1);
  const Point cell{(box.hi[0] - box.lo[0]) / static_cast<double>(grid),
                   (box.hi[1] - box.lo[1]) / static_cast<double>(grid)};

  bool any_feasible = false;
  SearchResult best{{0.0, 0.0}, std::numeric_limits<double>::infinity(), false};
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const Point start{box.lo[0] + (static_cast<double>(i) + 0.5) * cell[0],
                        box.lo[1] + (static_cast<double>(j) + 0.5) * cell[1]};
      any_feasible = any_feasible || obj.feasible_at(start[0], start[1]);
      SearchResult r = nelder_mead(obj, box, start, {cell[0] / 2, cell[1] / 2}, options.tolerance,
                                   options.max_evaluations);
      if (r.f < best.f) best = r;
    }
  }
  // Restart from the winner with a small simplex to rule out a collapsed one.
  SearchResult again = nelder_mead(obj, box, best.x, {cell[0] / 50, cell[1] / 50}, options.tolerance,
                                   options.max_evaluations);
  if (again.f <= best.f) best = again;
  best = newton_polish(obj, box, best);
  any_feasible = any_feasible || obj.feasible_at(best.x[0], best.x[1]);
  if (!any_feasible) {
    throw FitInfeasibleError("white background is negative for every (A, a) searched");
  }

  FluxNoiseFit fit;
  fit.amplitude_hz = std::pow(10.0, best.x[0]);
  fit.exponent = best.x[1];
  fit.objective = best.f;
  fit.n_points = obj.n_points();
  fit.skipped_low_bins = options.skip_low_bins;
  fit.residual_norm = std::sqrt(best.f / static_cast<double>(fit.n_points));
  fit.converged = best.converged;
  if (!fit.converged) {
    fit.diagnostics.push_back("simplex search hit its evaluation budget; result is best-so-far");
  }
  if (obj.skipped() > 0) {
    fit.diagnostics.push_back(std::to_string(obj.skipped()) + " non-positive bins ignored");
  }
  const double edge = 1e-6;
  if (best.x[0] - box.lo[0] < edge || box.hi[0] - best.x[0] < edge) {
    fit.diagnostics.push_back("amplitude at search bound");
  }
  if (best.x[1] - box.lo[1] < edge || box.hi[1] - best.x[1] < edge) {
    fit.diagnostics.push_back("exponent at search bound");
  }

  for (const FitInput& in : inputs) {
    ScheduleBackground b;
    b.delta_t = in.delta_t;
    b.alpha = in.alpha;
    b.white = white_background(fit.amplitude_hz, fit.exponent, in.alpha, in.delta_t);
    b.feasible = b.white >= 0.0;
    fit.backgrounds.push_back(b);
  }
  if (!fit.feasible()) {
    fit.diagnostics.push_back("white background negative for at least one schedule");
  }

  const LocalQuadratic q = local_quadratic(obj, box, best.x);
  std::array<Point, 2> inv{};
  const double dof = static_cast<double>(fit.n_points) - 2.0;
  if (dof > 0.0 && invert(q.hessian, inv)) {
    // Least squares: H ~ 2 J^T J, so cov = 2 s^2 H^-1 with s^2 = objective / dof.
    const double s2 = best.f / dof;
    const double var_log_a = 2.0 * s2 * inv[0][0];
    const double var_exp = 2.0 * s2 * inv[1][1];
    fit.amplitude_stderr = fit.amplitude_hz * std::log(10.0) * std::sqrt(std::max(var_log_a, 0.0));
    fit.exponent_stderr = std::sqrt(std::max(var_exp, 0.0));
  } else {
    fit.amplitude_stderr = std::numeric_limits<double>::quiet_NaN();
    fit.exponent_stderr = std::numeric_limits<double>::quiet_NaN();
    fit.diagnostics.push_back("objective curvature not positive definite; uncertainties unavailable");
  }
  fit.evaluations = obj.evaluations();
  return fit;
}

std::vector<ResidualSummary> residual_diagnostics(const FluxNoiseFit& fit,
                                                  std::span<const FitInput> inputs) {
  std::vector<ResidualSummary> out;
  for (const FitInput& in : inputs) {
    ResidualSummary s;
    s.delta_t = in.delta_t;
    const double w = std::max(0.0, white_background(fit.amplitude_hz, fit.exponent, in.alpha, in.delta_t));
    std::vector<double> f, r;
    std::size_t positive = 0;
    for (std::size_t l = 0; l < in.spectrum.size(); ++l) {
      const double fl = in.spectrum.frequencies[l];
      const double sl = in.spectrum.values[l];
      if (!(fl > 0.0) || positive++ < fit.skipped_low_bins || !(sl > 0.0)) continue;
      const double model = model_curve(fit.amplitude_hz, fit.exponent, w, std::span(&fl, 1))[0];
      f.push_back(fl);
      r.push_back(std::log10(sl) - std::log10(model));
    }
    if (f.empty()) {
      out.push_back(s);
      continue;
    }
    const double f_min = *std::min_element(f.begin(), f.end());
    const double f_max = *std::max_element(f.begin(), f.end());
    double low_sum = 0.0, high_sum = 0.0, high_sq = 0.0;
    for (std::size_t l = 0; l < f.size(); ++l) {
      if (f[l] <= 10.0 * f_min) {
        low_sum += r[l];
        ++s.low_band_bins;
      }
      if (f[l] >= f_max / 10.0) {
        high_sum += r[l];
        high_sq += r[l] * r[l];
        ++s.high_band_bins;
      }
    }
    s.low_band_mean = low_sum / static_cast<double>(s.low_band_bins);
    s.high_band_mean = high_sum / static_cast<double>(s.high_band_bins);
    if (s.high_band_bins > 1) {
      const double n = static_cast<double>(s.high_band_bins);
      s.high_band_spread = std::sqrt(std::max(0.0, (high_sq - n * s.high_band_mean * s.high_band_mean) / (n - 1.0)));
    }
    s.flagged = s.low_band_mean > std::max(3.0 * s.high_band_spread, kResidualFlagFloor);
    out.push_back(s);
  }
  return out;
}

}  // namespace hnoise
