#include "hnoise/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hnoise/errors.hpp"
#include "hnoise/noise_synth.hpp"
#include "hnoise/pipeline/manifest.hpp"
#include "hnoise/pipeline/svg.hpp"
#include "text.hpp"

namespace hnoise::pipeline {

namespace fs = std::filesystem;
using detail::format_double;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kRunTag = 0x72756e;          // "run"
constexpr std::uint64_t kCalibrationTag = 0x63616c;  // "cal"

std::string samples_path(const AnnealSchedule& s) { return "samples/samples_" + schedule_label(s) + ".jsonl"; }
std::string calibration_path(const AnnealSchedule& s) {
  return "calibration/calibration_" + schedule_label(s) + ".json";
}

std::string us_text(Duration d) { return format_double(d.microseconds()); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json provenance(const PipelineConfig& config) {
  return {{"tool", "hnoise"}, {"version", tool_version()}, {"config_hash", config_hash(config)},
          {"seed", config.seed}};
}

json sum_rule_json(const SumRuleReport& r) {
  return {{"integral", r.integral}, {"target", r.target}, {"relative_error", r.relative_error}};
}

std::string correlation_csv(const CorrelationSeries& c) {
  std::ostringstream out;
  write_correlation_csv(out, c);
  return out.str();
}

std::string spectrum_csv(const SpectrumEstimate& s) {
  std::ostringstream out;
  write_spectrum_csv(out, s);
  return out.str();
}

std::string fit_curve_csv(const FluxNoiseFit& fit, const ScheduleAnalysis& a, double white) {
  std::ostringstream out;
  out << "f_hz,model_seconds,model_microseconds,flux_microseconds,white_microseconds\n";
  const auto model = model_curve(fit.amplitude_hz, fit.exponent, std::max(white, 0.0),
                                 a.phi_spectrum.frequencies);
  for (std::size_t l = 0; l < model.size(); ++l) {
    const double f = a.phi_spectrum.frequencies[l];
    out << format_double(f) << ',' << format_double(model[l]) << ','
        << format_double(model[l] * 1e6) << ','
        << format_double(std::pow(fit.amplitude_hz / f, fit.exponent)) << ','
        << format_double(std::max(white, 0.0)) << '\n';
  }
  return out.str();
}

// Minimal reader for the CSVs written above: header plus numeric columns.
std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::size_t columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',') && row.size() < columns) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != columns) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(columns) + " numeric columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

PlotSpec psd_plot(const std::vector<std::string>& labels,
                  const std::vector<std::vector<double>>& freqs,
                  const std::vector<std::vector<double>>& data_us,
                  const std::vector<std::vector<double>>& model_us) {
  PlotSpec plot;
  plot.title = "Estimated noise spectral density";
  plot.x_label = "f (Hz)";
  plot.y_label = "S(f) (us)";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    plot.series.push_back({labels[i], freqs[i], data_us[i], palette(i), false, false});
    if (i < model_us.size() && !model_us[i].empty()) {
      plot.series.push_back({labels[i] + " fit", freqs[i], model_us[i], palette(i), true, false});
    }
  }
  return plot;
}

std::vector<double> to_us(const std::vector<double>& seconds) {
  std::vector<double> out(seconds.size());
  std::transform(seconds.begin(), seconds.end(), out.begin(), [](double v) { return v * 1e6; });
  return out;
}

std::string delta_t_label(const AnnealSchedule& s) { return "dt = " + us_text(s.delta_t) + " us"; }

}  // namespace

BackendProfile simulated_profile(const PipelineConfig& config) {
  BackendProfile p;
  p.name = config.backend_name;
  p.n_qubits = config.n_qubits;
  p.t_d = config.t_d;
  p.alpha_table = config.alpha_table;
  p.noise = config.noise;
  p.infrared = config.infrared;
  p.bias_range = config.bias_range;
  p.linear_range = config.linear_range;
  return p;
}

std::unique_ptr<AnnealerBackend> make_backend(const PipelineConfig& config) {
  validate(config);
  if (config.backend_kind == BackendKind::simulated) {
    return std::make_unique<SimulatedBackend>(simulated_profile(config));
  }
  std::vector<SampleMatrix> recordings;
  for (const auto& file : config.replay_files) {
    if (!fs::exists(file)) throw ConfigError("replay file " + file.string() + " does not exist");
    recordings.push_back(read_samples_jsonl(file));
  }
  auto backend = std::make_unique<ReplayBackend>(std::move(recordings), config.backend_name);
  for (const AnnealSchedule& s : schedules(config)) {
    const auto recs = backend->recordings();
    const bool found = std::any_of(recs.begin(), recs.end(),
                                   [&](const SampleMatrix& m) { return m.schedule() == s; });
    if (!found) {
      std::string have;
      for (const auto& m : recs) {
        have += (have.empty() ? "" : ", ") + std::string("t_a=") + us_text(m.schedule().t_a) +
                " t_d=" + us_text(m.schedule().t_d) + " N=" + std::to_string(m.n_runs());
      }
      throw ConfigError("no replay recording for t_a = " + us_text(s.t_a) + " us, t_d = " +
                        us_text(s.t_d) + " us, N = " + std::to_string(s.n_runs) +
                        " (recordings: " + have + ")");
    }
  }
  return backend;
}

SeedSpec run_seeds(const PipelineConfig& config, const AnnealSchedule& schedule) {
  return SeedSpec(config.seed).child(kRunTag).child(static_cast<std::uint64_t>(schedule.t_a.nanoseconds()));
}

SeedSpec calibration_seeds(const PipelineConfig& config, const AnnealSchedule& schedule) {
  return SeedSpec(config.seed)
      .child(kCalibrationTag)
      .child(static_cast<std::uint64_t>(schedule.t_a.nanoseconds()));
}

std::string schedule_label(const AnnealSchedule& schedule) { return "ta" + us_text(schedule.t_a) + "us"; }

CalibrationOutcome calibrate_schedule(const AnnealerBackend& backend, const PipelineConfig& config,
                                      const AnnealSchedule& schedule) {
  const BiasSweep sweep = run_bias_sweep(backend, schedule, config.phi_grid, config.runs_per_point,
                                         calibration_seeds(config, schedule));
  CalibrationOutcome out{schedule, fit_alpha(sweep.points, config.linear_range), sweep.warnings};
  return out;
}

AnalysisResult analyze(const PipelineConfig& config, std::span<const SampleMatrix> samples,
                       std::span<const AlphaInput> alphas) {
  if (samples.size() != alphas.size() || samples.empty()) {
    throw std::invalid_argument("analyze needs one alpha per sample matrix");
  }
  AnalysisResult result;
  WelchOptions welch;
  welch.segment_length = config.segment_length;
  welch.overlap_fraction = config.overlap;
  welch.window = config.window;
  welch.detrend = config.detrend;

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SampleMatrix& m = samples[i];
    ScheduleAnalysis a;
    a.schedule = m.schedule();
    a.alpha = alphas[i].alpha;
    a.alpha_stderr = alphas[i].alpha_stderr;
    a.alpha_source = alphas[i].source;
    const std::size_t k_max = config.k_max == 0 ? default_k_max(m.n_runs()) : config.k_max;
    a.beta_correlation = averaged_correlation(m, k_max);
    a.beta_spectrum = welch_psd(m, welch);
    result.schedules.push_back(std::move(a));
  }

  if (config.collapse && result.schedules.size() > 1) {
    std::vector<CorrelationSeries> curves;
    std::vector<double> a0, s0;
    for (const auto& a : result.schedules) {
      curves.push_back(a.beta_correlation);
      a0.push_back(a.alpha);
      s0.push_back(a.alpha_stderr);
    }
    const auto tuned = collapse_alphas(curves, a0, s0);
    for (std::size_t i = 0; i < tuned.size(); ++i) {
      result.schedules[i].alpha = tuned[i];
      result.schedules[i].alpha_source += "+collapse";
    }
  }

  std::vector<FitInput> inputs;
  for (auto& a : result.schedules) {
    const double dt = a.schedule.delta_t.seconds();
    a.phi_correlation = beta_to_phi(a.beta_correlation, a.alpha);
    a.rms_phi = rms_phi(a.phi_correlation);
    if (!a.rms_phi) {
      result.warnings.push_back(schedule_label(a.schedule) +
                                ": lag-1 phi correlation is negative; rms not reported");
    }
    a.phi_spectrum = remove_f0(scale_to_phi(a.beta_spectrum, a.alpha));
    a.beta_sum_rule = check_sum_rule(a.beta_spectrum, a.alpha, dt);
    a.phi_sum_rule = check_sum_rule(a.phi_spectrum, a.alpha, dt);
    inputs.push_back({a.phi_spectrum, a.alpha, dt});
  }

  try {
    result.fit = global_fit(inputs, config.fit);
    result.residuals = residual_diagnostics(*result.fit, inputs);
  } catch (const FitInfeasibleError& e) {
    result.fit_error = e.what();
  }
  return result;
}

std::string fit_report_json(const PipelineConfig& config, const AnalysisResult& analysis) {
  json doc = provenance(config);
  json flags = json::array();
  json per_schedule = json::array();
  const FluxNoiseFit* fit = analysis.fit ? &*analysis.fit : nullptr;
  if (fit) {
    doc["A_hz"] = fit->amplitude_hz;
    doc["A_stderr"] = number_or_null(fit->amplitude_stderr);
    doc["a"] = fit->exponent;
    doc["a_stderr"] = number_or_null(fit->exponent_stderr);
  } else {
    doc["A_hz"] = nullptr;
    doc["A_stderr"] = nullptr;
    doc["a"] = nullptr;
    doc["a_stderr"] = nullptr;
    flags.push_back("fit_infeasible");
  }
  for (std::size_t i = 0; i < analysis.schedules.size(); ++i) {
    const ScheduleAnalysis& a = analysis.schedules[i];
    json entry = {{"t_a_us", a.schedule.t_a.microseconds()},
                  {"t_d_us", a.schedule.t_d.microseconds()},
                  {"delta_t_us", a.schedule.delta_t.microseconds()},
                  {"n_runs", a.schedule.n_runs},
                  {"alpha", a.alpha},
                  {"alpha_stderr", a.alpha_stderr},
                  {"alpha_source", a.alpha_source}};
    if (fit) {
      const ScheduleBackground& b = fit->backgrounds[i];
      entry["W"] = b.white;
      entry["feasible"] = b.feasible;
      if (!b.feasible) flags.push_back("negative_white_background:" + schedule_label(a.schedule));
    } else {
      entry["W"] = nullptr;
      entry["feasible"] = false;
    }
    entry["rms_phi"] = a.rms_phi ? json(*a.rms_phi) : json(nullptr);
    entry["sum_rule"] = {{"beta", sum_rule_json(a.beta_sum_rule)}, {"phi", sum_rule_json(a.phi_sum_rule)}};
    if (i < analysis.residuals.size()) {
      const ResidualSummary& r = analysis.residuals[i];
      entry["residuals"] = {{"low_band_mean", r.low_band_mean},
                            {"high_band_mean", r.high_band_mean},
                            {"high_band_spread", r.high_band_spread},
                            {"low_band_bins", r.low_band_bins},
                            {"high_band_bins", r.high_band_bins},
                            {"flagged", r.flagged}};
      if (r.flagged) flags.push_back("low_frequency_excess:" + schedule_label(a.schedule));
    }
    per_schedule.push_back(entry);
  }
  doc["per_schedule"] = per_schedule;
  doc["residual_norm"] = fit ? json(fit->residual_norm) : json(nullptr);
  doc["flags"] = flags;
  if (fit) {
    doc["objective"] = fit->objective;
    doc["n_points"] = fit->n_points;
    doc["skipped_low_bins"] = fit->skipped_low_bins;
    doc["evaluations"] = fit->evaluations;
    doc["converged"] = fit->converged;
    doc["diagnostics"] = fit->diagnostics;
  } else {
    doc["diagnostics"] = json::array({analysis.fit_error});
  }
  doc["warnings"] = analysis.warnings;
  doc["estimator"] = {{"window", to_string(config.window)},
                      {"detrend", to_string(config.detrend)},
                      {"segment_length", config.segment_length},
                      {"overlap", config.overlap},
                      {"k_max", config.k_max}};
  return doc.dump(2) + "\n";
}

CommandResult cmd_synth(const PipelineConfig& config) {
  validate(config);
  if (config.backend_kind != BackendKind::simulated) {
    throw ConfigError("synth needs backend.kind = simulated");
  }
  const auto scheds = schedules(config);
  std::vector<std::vector<NoiseTrace>> per_schedule;
  for (const auto& s : scheds) {
    per_schedule.push_back(synthesize_ensemble(config.noise, config.n_qubits, s.n_runs,
                                               s.delta_t.seconds(), run_seeds(config, s),
                                               config.infrared));
  }
  OutputWriter writer(config, "synth");
  CommandResult result;
  for (std::size_t q = 0; q < config.n_qubits; ++q) {
    std::string csv = "run";
    for (const auto& s : scheds) csv += ",phi_" + schedule_label(s);
    csv += '\n';
    for (std::size_t j = 0; j < config.n_runs; ++j) {
      csv += std::to_string(j);
      for (const auto& traces : per_schedule) csv += ',' + format_double(traces[q].values[j]);
      csv += '\n';
    }
    char name[64];
    std::snprintf(name, sizeof(name), "traces/trace_q%04zu.csv", q);
    result.files.push_back(writer.write(name, csv, "noise_trace"));
  }
  writer.finish();
  result.messages.push_back("wrote " + std::to_string(config.n_qubits) + " noise traces");
  return result;
}

CommandResult cmd_run(const PipelineConfig& config) {
  const auto backend = make_backend(config);
  const auto scheds = schedules(config);
  OutputWriter writer(config, "run");
  CommandResult result;
  for (const auto& s : scheds) {
    const SamplingRun run = backend->sample_detailed(BiasProgram::degenerate(backend->n_qubits()), s,
                                                     run_seeds(config, s));
    std::ostringstream out;
    write_samples_jsonl(out, run.samples);
    result.files.push_back(writer.write(samples_path(s), out.str(), "samples"));
    if (run.clamp_events > 0) {
      result.messages.push_back(schedule_label(s) + ": " + std::to_string(run.clamp_events) +
                                " draws clamped to probability 0 or 1");
    }
  }
  writer.finish();
  return result;
}

CommandResult cmd_calibrate(const PipelineConfig& config) {
  const auto backend = make_backend(config);
  if (config.backend_kind == BackendKind::replay) {
    throw ConfigError("a replay backend holds no bias-sweep data; set calibration.alpha instead");
  }
  const auto scheds = schedules(config);
  std::vector<CalibrationOutcome> outcomes;
  for (const auto& s : scheds) outcomes.push_back(calibrate_schedule(*backend, config, s));

  OutputWriter writer(config, "calibrate");
  CommandResult result;
  std::string table = "t_a_us,alpha,alpha_stderr\n";
  PlotSeries series{"alpha", {}, {}, palette(0), false, false};
  for (const auto& o : outcomes) {
    json points = json::array();
    for (const auto& p : o.result.points) {
      points.push_back({{"phi", p.phi},
                        {"p_minus", p.p_minus},
                        {"stderr_p", p.stderr_p},
                        {"count_total", p.count_total},
                        {"used", p.used}});
    }
    json doc = provenance(config);
    doc["backend"] = backend->name();
    doc["t_a_us"] = o.schedule.t_a.microseconds();
    doc["t_d_us"] = o.schedule.t_d.microseconds();
    doc["alpha"] = o.result.alpha;
    doc["alpha_stderr"] = o.result.alpha_stderr;
    doc["linear_range_max"] = o.result.linear_range_max;
    doc["points"] = points;
    doc["diagnostics"] = o.result.diagnostics;
    doc["warnings"] = o.warnings;
    result.files.push_back(writer.write(calibration_path(o.schedule), doc.dump(2) + "\n", "calibration"));
    table += us_text(o.schedule.t_a) + ',' + format_double(o.result.alpha) + ',' +
             format_double(o.result.alpha_stderr) + '\n';
    series.x.push_back(o.schedule.t_a.microseconds());
    series.y.push_back(o.result.alpha);
    for (const auto& w : o.warnings) result.messages.push_back(schedule_label(o.schedule) + ": " + w);
    for (const auto& d : o.result.diagnostics) {
      result.messages.push_back(schedule_label(o.schedule) + ": " + d);
    }
  }
  result.files.push_back(writer.write("calibration/alpha_table.csv", table, "alpha_table"));
  series.markers = series.x.size() < 2;
  PlotSpec plot;
  plot.title = "alpha versus annealing time";
  plot.x_label = "t_a (us)";
  plot.y_label = "alpha";
  plot.log_y = false;
  plot.series.push_back(series);
  result.files.push_back(writer.write("calibration/alpha_vs_ta.svg", render_svg(plot), "plot"));
  writer.finish();
  return result;
}

CommandResult cmd_analyze(const PipelineConfig& config) {
  validate(config);
  const fs::path out_dir = config.out_dir;
  const auto scheds = schedules(config);

  // All inputs are checked before any computation.
  std::vector<AlphaInput> alphas;
  for (const auto& s : scheds) {
    if (auto it = config.alpha_override.find(s.t_a); it != config.alpha_override.end()) {
      alphas.push_back({it->second, 0.0, "config"});
      continue;
    }
    const fs::path cal = out_dir / calibration_path(s);
    if (!fs::exists(cal)) {
      throw ConfigError("no alpha for t_a = " + us_text(s.t_a) +
                        " us: run `hnoise calibrate` first or set calibration.alpha");
    }
    const json doc = read_json(cal);
    try {
      const double alpha = doc.at("alpha").get<double>();
      if (!(alpha > 0.0)) throw FormatError(cal.string() + ": alpha must be positive");
      alphas.push_back({alpha, doc.at("alpha_stderr").get<double>(), "calibration"});
    } catch (const json::exception& e) {
      throw FormatError(cal.string() + ": " + e.what());
    }
  }
  std::vector<SampleMatrix> samples;
  for (const auto& s : scheds) {
    const fs::path path = out_dir / samples_path(s);
    if (!fs::exists(path)) {
      throw ConfigError("missing " + path.string() + ": run `hnoise run` first");
    }
    SampleMatrix m = read_samples_jsonl(path);
    if (!(m.schedule() == s)) {
      throw FormatError(path.string() + ": recorded schedule (t_a = " + us_text(m.schedule().t_a) +
                        " us, t_d = " + us_text(m.schedule().t_d) + " us, N = " +
                        std::to_string(m.n_runs()) + ") does not match the configuration");
    }
    samples.push_back(std::move(m));
  }

  const AnalysisResult analysis = analyze(config, samples, alphas);

  OutputWriter writer(config, "analyze");
  CommandResult result;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> freqs, data_us, model_us;
  PlotSpec corr_plot;
  corr_plot.title = "Solution-state time correlation (phi level)";
  corr_plot.x_label = "t (s)";
  corr_plot.y_label = "<phi(t) phi(0)>";
  corr_plot.log_y = false;
  json sum_rules = json::array();
  for (std::size_t i = 0; i < analysis.schedules.size(); ++i) {
    const ScheduleAnalysis& a = analysis.schedules[i];
    const std::string tag = schedule_label(a.schedule);
    result.files.push_back(writer.write("analysis/correlation_beta_" + tag + ".csv",
                                        correlation_csv(a.beta_correlation), "correlation"));
    result.files.push_back(writer.write("analysis/correlation_phi_" + tag + ".csv",
                                        correlation_csv(a.phi_correlation), "correlation"));
    result.files.push_back(writer.write("analysis/spectrum_beta_" + tag + ".csv",
                                        spectrum_csv(a.beta_spectrum), "spectrum"));
    result.files.push_back(writer.write("analysis/spectrum_beta_" + tag + ".json",
                                        spectrum_metadata_json(a.beta_spectrum), "spectrum_metadata"));
    result.files.push_back(writer.write("analysis/spectrum_phi_" + tag + ".csv",
                                        spectrum_csv(a.phi_spectrum), "spectrum"));
    result.files.push_back(writer.write("analysis/spectrum_phi_" + tag + ".json",
                                        spectrum_metadata_json(a.phi_spectrum), "spectrum_metadata"));
    labels.push_back(delta_t_label(a.schedule));
    freqs.push_back(a.phi_spectrum.frequencies);
    data_us.push_back(to_us(a.phi_spectrum.values));
    if (analysis.fit) {
      const double w = analysis.fit->backgrounds[i].white;
      result.files.push_back(writer.write("analysis/fit_curve_" + tag + ".csv",
                                          fit_curve_csv(*analysis.fit, a, w), "fit_curve"));
      model_us.push_back(to_us(model_curve(analysis.fit->amplitude_hz, analysis.fit->exponent,
                                           std::max(w, 0.0), a.phi_spectrum.frequencies)));
    }
    PlotSeries c{delta_t_label(a.schedule), {}, {}, palette(i), false, true};
    for (std::size_t k = 1; k < a.phi_correlation.size(); ++k) {
      c.x.push_back(a.phi_correlation.times[k]);
      c.y.push_back(a.phi_correlation.values[k]);
    }
    corr_plot.series.push_back(std::move(c));
    sum_rules.push_back({{"schedule", tag},
                         {"beta", sum_rule_json(a.beta_sum_rule)},
                         {"phi", sum_rule_json(a.phi_sum_rule)}});
  }
  json sum_doc = provenance(config);
  sum_doc["schedules"] = sum_rules;
  result.files.push_back(writer.write("analysis/sum_rule.json", sum_doc.dump(2) + "\n", "sum_rule"));
  result.files.push_back(writer.write("analysis/fit_report.json", fit_report_json(config, analysis),
                                      "fit_report"));
  result.files.push_back(
      writer.write("analysis/psd.svg", render_svg(psd_plot(labels, freqs, data_us, model_us)), "plot"));
  result.files.push_back(writer.write("analysis/correlation.svg", render_svg(corr_plot), "plot"));
  writer.finish();

  for (const auto& w : analysis.warnings) result.messages.push_back(w);
  if (!analysis.fit) throw FitInfeasibleError(analysis.fit_error);
  const FluxNoiseFit& fit = *analysis.fit;
  std::ostringstream msg;
  msg << "A = " << fit.amplitude_hz << " +- " << fit.amplitude_stderr << " Hz, a = " << fit.exponent
      << " +- " << fit.exponent_stderr;
  result.messages.push_back(msg.str());
  for (const auto& r : analysis.residuals) {
    if (r.flagged) {
      result.messages.push_back("low-frequency excess over the flux-noise law at dt = " +
                                format_double(r.delta_t * 1e6) + " us");
    }
  }
  return result;
}

CommandResult cmd_report(const PipelineConfig& config) {
  validate(config);
  const fs::path dir = fs::path(config.out_dir) / "analysis";
  const fs::path report_path = dir / "fit_report.json";
  if (!fs::exists(report_path)) {
    throw ConfigError("missing " + report_path.string() + ": run `hnoise analyze` first");
  }
  const json report = read_json(report_path);

  std::ostringstream md;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> freqs, data_us, model_us;
  try {
    md << "# Hamiltonian noise benchmark\n\n";
    md << "- config hash: `" << report.at("config_hash").get<std::string>() << "`\n";
    md << "- seed: " << report.at("seed").get<std::uint64_t>() << "\n";
    md << "- tool version: " << report.at("version").get<std::string>() << "\n\n";
    if (report.at("A_hz").is_null()) {
      md << "No feasible fit.\n\n";
    } else {
      md << "| quantity | value | stderr |\n|---|---|---|\n";
      md << "| A (Hz) | " << report.at("A_hz").dump() << " | " << report.at("A_stderr").dump() << " |\n";
      md << "| a | " << report.at("a").dump() << " | " << report.at("a_stderr").dump() << " |\n\n";
    }
    md << "| t_a (us) | dt (us) | alpha | alpha source | W (us) | rms phi | low-f excess |\n"
          "|---|---|---|---|---|---|---|\n";
    bool configured_alpha = false;
    for (const auto& s : report.at("per_schedule")) {
      const std::string source = s.at("alpha_source").get<std::string>();
      configured_alpha = configured_alpha || source.starts_with("config");
      const bool flagged = s.contains("residuals") && s.at("residuals").at("flagged").get<bool>();
      md << "| " << s.at("t_a_us").dump() << " | " << s.at("delta_t_us").dump() << " | "
         << s.at("alpha").dump() << " | " << source << " | " << s.at("W").dump() << " | " << s.at("rms_phi").dump()
         << " | " << (flagged ? "yes" : "no") << " |\n";
      const std::string tag = "ta" + format_double(s.at("t_a_us").get<double>()) + "us";
      const auto spectrum = read_numeric_csv(dir / ("spectrum_phi_" + tag + ".csv"), 3);
      std::vector<double> f, d;
      for (const auto& row : spectrum) {
        f.push_back(row[0]);
        d.push_back(row[2]);
      }
      std::vector<double> m;
      const fs::path curve = dir / ("fit_curve_" + tag + ".csv");
      if (fs::exists(curve)) {
        for (const auto& row : read_numeric_csv(curve, 5)) m.push_back(row[2]);
      }
      labels.push_back("dt = " + format_double(s.at("delta_t_us").get<double>()) + " us");
      freqs.push_back(std::move(f));
      data_us.push_back(std::move(d));
      model_us.push_back(std::move(m));
    }
    if (configured_alpha) {
      md << "\nalpha from configuration is a placeholder, not a measured device value.\n";
    }
    const auto& flags = report.at("flags");
    md << "\nflags: " << (flags.empty() ? std::string("none") : flags.dump()) << "\n";
  } catch (const json::exception& e) {
    throw FormatError(report_path.string() + ": " + e.what());
  }

  OutputWriter writer(config, "report");
  CommandResult result;
  result.files.push_back(writer.write("report/summary.md", md.str(), "report"));
  result.files.push_back(
      writer.write("report/psd.svg", render_svg(psd_plot(labels, freqs, data_us, model_us)), "plot"));
  writer.finish();
  return result;
}

int exit_code_for(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return 2;
  } catch (const CalibrationRangeError&) {
    return 2;
  } catch (const FormatError&) {
    return 3;
  } catch (const FitInfeasibleError&) {
    return 4;
  } catch (...) {
    return 5;
  }
}

}  // namespace hnoise::pipeline
