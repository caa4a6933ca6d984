#pragma once

#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hnoise/estimation.hpp"
#include "hnoise/modelfit.hpp"
#include "hnoise/pipeline/config.hpp"
#include "hnoise/random.hpp"
#include "hnoise/sampler.hpp"
#include "hnoise/spectral.hpp"

namespace hnoise::pipeline {

BackendProfile simulated_profile(const PipelineConfig& config);

/// Builds the configured backend. Replay files are parsed and matched to every
/// configured schedule here, before any computation starts.
std::unique_ptr<AnnealerBackend> make_backend(const PipelineConfig& config);

/// Seed spaces per schedule, keyed by t_a so that reordering schedules does
/// not change any stream.
SeedSpec run_seeds(const PipelineConfig& config, const AnnealSchedule& schedule);
SeedSpec calibration_seeds(const PipelineConfig& config, const AnnealSchedule& schedule);

/// "ta100us": file-name tag of a schedule.
std::string schedule_label(const AnnealSchedule& schedule);

struct CalibrationOutcome {
  AnnealSchedule schedule;
  CalibrationResult result;
  std::vector<std::string> warnings;
};

/// Interleaved bias sweep over config.phi_grid followed by fit_alpha.
CalibrationOutcome calibrate_schedule(const AnnealerBackend& backend, const PipelineConfig& config,
                                      const AnnealSchedule& schedule);

struct AlphaInput {
  double alpha = 0.0;
  double alpha_stderr = 0.0;
  /// "config" or "calibration".
  std::string source;
};

struct ScheduleAnalysis {
  AnnealSchedule schedule;
  double alpha = 0.0;
  double alpha_stderr = 0.0;
  std::string alpha_source;
  CorrelationSeries beta_correlation;
  CorrelationSeries phi_correlation;
  /// Full beta-level estimate, DC included.
  SpectrumEstimate beta_spectrum;
  /// Phi-level with the DC bin removed; this is what the fit sees.
  SpectrumEstimate phi_spectrum;
  SumRuleReport beta_sum_rule;
  SumRuleReport phi_sum_rule;
  std::optional<double> rms_phi;
};

struct AnalysisResult {
  std::vector<ScheduleAnalysis> schedules;
  /// Empty when the fit was infeasible; fit_error then holds the reason.
  std::optional<FluxNoiseFit> fit;
  std::string fit_error;
  std::vector<ResidualSummary> residuals;
  std::vector<std::string> warnings;
};

/// Correlations, spectra, sum rules and the global fit for one sample matrix
/// per schedule. samples[i] and alphas[i] belong to the same schedule.
AnalysisResult analyze(const PipelineConfig& config, std::span<const SampleMatrix> samples,
                       std::span<const AlphaInput> alphas);

/// Fit report JSON: A_hz, A_stderr, a, a_stderr, per_schedule, residual_norm,
/// flags, plus provenance (config hash, seed, version).
std::string fit_report_json(const PipelineConfig& config, const AnalysisResult& analysis);

struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> messages;
};

/// Per-qubit injected noise traces (simulated backend only).
CommandResult cmd_synth(const PipelineConfig& config);
/// Degenerate-run samples, one JSONL per schedule.
CommandResult cmd_run(const PipelineConfig& config);
/// Bias sweeps and alpha per schedule.
CommandResult cmd_calibrate(const PipelineConfig& config);
/// Reads samples and alphas from the output directory and writes correlations,
/// spectra, the fit report and plots. Throws FitInfeasibleError after writing
/// everything else when no feasible fit exists.
CommandResult cmd_analyze(const PipelineConfig& config);
/// Re-renders the summary and PSD plot from persisted analysis outputs.
CommandResult cmd_report(const PipelineConfig& config);

/// 2 config, 3 data format, 4 fit infeasible, 5 anything else.
int exit_code_for(std::exception_ptr error);

}  // namespace hnoise::pipeline
