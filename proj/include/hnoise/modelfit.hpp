#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hnoise/spectral.hpp"

namespace hnoise {

/// Sum-rule white background in microsecond report units:
///   W = (dt / 1 us) / (2 alpha^2) - (2 dt A)^a / (1 - a).
/// May be negative; callers flag that as infeasible.
double white_background(double amplitude_hz, double exponent, double alpha, double delta_t);

/// [(A/f)^a + W] * 1 us, in seconds, per frequency.
std::vector<double> model_curve(double amplitude_hz, double exponent, double white,
                                std::span<const double> frequencies);

/// Phi-level spectrum without DC evaluated exactly from the model with the
/// sum-rule background, on the grid f_l = l / (N dt), l = 1..N/2.
SpectrumEstimate model_spectrum(double amplitude_hz, double exponent, double alpha, double delta_t,
                                std::size_t n_runs);

/// One schedule's phi-level spectrum with the alpha and run period that produced it.
struct FitInput {
  SpectrumEstimate spectrum;
  double alpha = 0.0;
  double delta_t = 0.0;
};

struct FitOptions {
  double log10_amplitude_min = -1.0;
  double log10_amplitude_max = 5.0;
  double exponent_min = 0.05;
  double exponent_max = 0.95;
  /// Multi-start grid is grid_points x grid_points.
  std::size_t grid_points = 5;
  double tolerance = 1e-9;
  std::size_t max_evaluations = 4000;
  /// Weight of the quadratic penalty on negative W, per bin of the spectrum.
  double infeasibility_penalty = 1.0;
  /// Lowest positive-frequency bins left out of each spectrum. A tapered
  /// window with mean removal pulls the first bin below the model.
  std::size_t skip_low_bins = 0;
};

struct ScheduleBackground {
  double delta_t = 0.0;
  double alpha = 0.0;
  double white = 0.0;
  bool feasible = true;
};

struct FluxNoiseFit {
  double amplitude_hz = 0.0;
  double amplitude_stderr = 0.0;
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  std::vector<ScheduleBackground> backgrounds;
  /// Sum of squared log10 residuals at the optimum, penalty included.
  double objective = 0.0;
  /// sqrt(objective / n_points).
  double residual_norm = 0.0;
  std::size_t n_points = 0;
  /// FitOptions::skip_low_bins in effect; residual_diagnostics honours it.
  std::size_t skipped_low_bins = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<std::string> diagnostics;

  bool feasible() const;
};

/// Log-space objective of the global fit at (log10 A, a).
double fit_objective(std::span<const FitInput> inputs, double log10_amplitude, double exponent,
                     const FitOptions& options = {});

/// Fits shared (A, a) to every spectrum at once; W per spectrum follows from
/// the sum rule. Spectra must be phi-level with the DC bin removed.
/// Throws FitInfeasibleError if W < 0 everywhere that was searched.
FluxNoiseFit global_fit(std::span<const FitInput> inputs, const FitOptions& options = {});

struct ResidualSummary {
  double delta_t = 0.0;
  /// Mean log10 residual (data - model) over the lowest frequency decade.
  double low_band_mean = 0.0;
  /// Mean and standard deviation over the highest frequency decade.
  double high_band_mean = 0.0;
  double high_band_spread = 0.0;
  std::size_t low_band_bins = 0;
  std::size_t high_band_bins = 0;
  bool flagged = false;
};

/// Smallest low-band excess, in decades, that can raise a flag.
inline constexpr double kResidualFlagFloor = 0.02;

/// Flags a spectrum whose low band sits above the fit by more than three
/// high-band residual spreads (and at least kResidualFlagFloor).
std::vector<ResidualSummary> residual_diagnostics(const FluxNoiseFit& fit,
                                                  std::span<const FitInput> inputs);

}  // namespace hnoise
