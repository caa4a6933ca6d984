#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstring>

#include "hnoise/core.hpp"
#include "hnoise/errors.hpp"
#include "hnoise/estimation.hpp"
#include "hnoise/modelfit.hpp"
#include "hnoise/noise_synth.hpp"
#include "hnoise/random.hpp"
#include "hnoise/sampler.hpp"
#include "hnoise/spectral.hpp"

namespace py = pybind11;
using namespace hnoise;

namespace {

InfraredMode parse_infrared(const std::string& name) {
  if (name == "truncate") return InfraredMode::truncate;
  if (name == "static_offset") return InfraredMode::static_offset;
  throw std::invalid_argument("infrared must be 'truncate' or 'static_offset', got '" + name + "'");
}

py::array_t<double> traces_to_array(const std::vector<NoiseTrace>& traces) {
  const std::size_t rows = traces.size(), cols = rows ? traces.front().values.size() : 0;
  py::array_t<double> out({rows, cols});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t q = 0; q < rows; ++q)
    for (std::size_t j = 0; j < cols; ++j) view(q, j) = traces[q].values[j];
  return out;
}

std::vector<std::vector<double>> array_to_rows(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array (series x samples)");
  std::vector<std::vector<double>> rows(a.shape(0));
  auto view = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    rows[i].resize(a.shape(1));
    for (py::ssize_t j = 0; j < a.shape(1); ++j) rows[i][j] = view(i, j);
  }
  return rows;
}

SampleMatrix matrix_from_array(const AnnealSchedule& schedule,
                               const py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("readouts must be a 2-D array (runs x qubits)");
  if (static_cast<std::size_t>(a.shape(0)) != schedule.n_runs) {
    throw std::invalid_argument("readout rows must equal schedule.n_runs");
  }
  std::vector<std::int8_t> data(a.data(), a.data() + a.size());
  return SampleMatrix(schedule, static_cast<std::size_t>(a.shape(1)), std::move(data), SampleOrigin::replayed);
}

WelchOptions welch_options(std::size_t segment_length, double overlap, const std::string& window,
                           const std::string& detrend) {
  return {segment_length, overlap, parse_window(window), parse_detrend(detrend)};
}

BackendProfile make_profile(std::size_t n_qubits, double t_d_us, const std::map<double, double>& alpha_by_t_a_us,
                            double amplitude_hz, double exponent, double common_mode_fraction,
                            const std::string& infrared) {
  BackendProfile p;
  p.n_qubits = n_qubits;
  p.t_d = Duration::from_microseconds(t_d_us);
  for (auto [t_a, alpha] : alpha_by_t_a_us) p.alpha_table[Duration::from_microseconds(t_a)] = alpha;
  p.noise = {amplitude_hz, exponent, common_mode_fraction};
  p.infrared = parse_infrared(infrared);
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_hnoise, m) {
  m.doc() = "Hamiltonian-noise benchmarking: synthesis, sampling, correlations, spectra and model fits";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<CalibrationRangeError>(m, "CalibrationRangeError", PyExc_ValueError);
  py::register_exception<FitInfeasibleError>(m, "FitInfeasibleError", PyExc_RuntimeError);

  py::class_<AnnealSchedule>(m, "AnnealSchedule")
      .def_property_readonly("t_a_us", [](const AnnealSchedule& s) { return s.t_a.microseconds(); })
      .def_property_readonly("t_d_us", [](const AnnealSchedule& s) { return s.t_d.microseconds(); })
      .def_property_readonly("delta_t_us", [](const AnnealSchedule& s) { return s.delta_t.microseconds(); })
      .def_property_readonly("delta_t", [](const AnnealSchedule& s) { return s.delta_t.seconds(); })
      .def_readonly("n_runs", &AnnealSchedule::n_runs)
      .def("__repr__", [](const AnnealSchedule& s) {
        return "AnnealSchedule(t_a_us=" + format_microseconds(s.t_a) + ", t_d_us=" + format_microseconds(s.t_d) +
               ", n_runs=" + std::to_string(s.n_runs) + ")";
      });
  m.def(
      "make_schedule",
      [](double t_a_us, double t_d_us, std::size_t n_runs) {
        return make_schedule(Duration::from_microseconds(t_a_us), Duration::from_microseconds(t_d_us), n_runs);
      },
      py::arg("t_a_us"), py::arg("t_d_us"), py::arg("n_runs"));

  py::class_<SampleMatrix>(m, "SampleMatrix")
      .def(py::init(&matrix_from_array), py::arg("schedule"), py::arg("readouts"))
      .def_property_readonly("schedule", &SampleMatrix::schedule)
      .def_property_readonly("n_runs", &SampleMatrix::n_runs)
      .def_property_readonly("n_qubits", &SampleMatrix::n_qubits)
      .def_property_readonly("readouts",
                             [](const SampleMatrix& s) {
                               py::array_t<std::int8_t> out({s.n_runs(), s.n_qubits()});
                               std::memcpy(out.mutable_data(), s.raw().data(), s.raw().size());
                               return out;
                             })
      .def("__eq__", &SampleMatrix::operator==);
  m.def("read_samples_jsonl", py::overload_cast<const std::filesystem::path&>(&read_samples_jsonl), py::arg("path"));
  m.def("write_samples_jsonl",
        py::overload_cast<const std::filesystem::path&, const SampleMatrix&>(&write_samples_jsonl), py::arg("path"),
        py::arg("samples"));

  py::class_<FluxNoiseSpec>(m, "FluxNoiseSpec")
      .def(py::init([](double amplitude_hz, double exponent, double common_mode_fraction) {
             FluxNoiseSpec s{amplitude_hz, exponent, common_mode_fraction};
             s.validate();
             return s;
           }),
           py::arg("amplitude_hz"), py::arg("exponent"), py::arg("common_mode_fraction") = 0.0)
      .def_readwrite("amplitude_hz", &FluxNoiseSpec::amplitude_hz)
      .def_readwrite("exponent", &FluxNoiseSpec::exponent)
      .def_readwrite("common_mode_fraction", &FluxNoiseSpec::common_mode_fraction);
  m.def("model_psd", &model_psd, py::arg("spec"), py::arg("frequency_hz"));
  m.def(
      "synthesize_ensemble",
      [](const FluxNoiseSpec& spec, std::size_t n_qubits, std::size_t n_samples, double sample_period,
         std::uint64_t seed, const std::string& infrared) {
        return traces_to_array(
            synthesize_ensemble(spec, n_qubits, n_samples, sample_period, SeedSpec(seed), parse_infrared(infrared)));
      },
      py::arg("spec"), py::arg("n_qubits"), py::arg("n_samples"), py::arg("sample_period"), py::arg("seed"),
      py::arg("infrared") = "truncate");

  py::class_<SimulatedBackend>(m, "SimulatedBackend")
      .def(py::init([](std::size_t n_qubits, double t_d_us, const std::map<double, double>& alpha_by_t_a_us,
                       double amplitude_hz, double exponent, double common_mode_fraction,
                       const std::string& infrared) {
             return SimulatedBackend(make_profile(n_qubits, t_d_us, alpha_by_t_a_us, amplitude_hz, exponent,
                                                  common_mode_fraction, infrared));
           }),
           py::arg("n_qubits"), py::arg("t_d_us"), py::arg("alpha_by_t_a_us"), py::arg("amplitude_hz"),
           py::arg("exponent"), py::arg("common_mode_fraction") = 0.0, py::arg("infrared") = "static_offset")
      .def_property_readonly("n_qubits", &SimulatedBackend::n_qubits)
      .def(
          "sample_degenerate",
          [](const SimulatedBackend& b, const AnnealSchedule& s, std::uint64_t seed) {
            return run_degenerate_protocol(b, s, SeedSpec(seed));
          },
          py::arg("schedule"), py::arg("seed"))
      .def(
          "sample_with_noise",
          [](const SimulatedBackend& b, const AnnealSchedule& s, std::uint64_t seed) {
            auto run = b.sample_detailed(BiasProgram::degenerate(b.n_qubits()), s, SeedSpec(seed));
            return py::make_tuple(std::move(run.samples), traces_to_array(run.injected));
          },
          py::arg("schedule"), py::arg("seed"), "Degenerate samples and the injected flux traces (qubits x runs).")
      .def(
          "bias_sweep",
          [](const SimulatedBackend& b, const AnnealSchedule& s, const std::vector<double>& phi_grid,
             std::size_t runs_per_point, std::uint64_t seed) {
            const auto sweep = run_bias_sweep(b, s, phi_grid, runs_per_point, SeedSpec(seed));
            return py::make_tuple(sweep.points, sweep.warnings);
          },
          py::arg("schedule"), py::arg("phi_grid"), py::arg("runs_per_point"), py::arg("seed"));

  py::class_<SweepPoint>(m, "SweepPoint")
      .def(py::init([](double phi, std::uint64_t minus, std::uint64_t total) { return SweepPoint{phi, minus, total}; }),
           py::arg("phi"), py::arg("count_minus"), py::arg("count_total"))
      .def_readonly("phi", &SweepPoint::phi)
      .def_readonly("count_minus", &SweepPoint::count_minus)
      .def_readonly("count_total", &SweepPoint::count_total)
      .def_property_readonly("fraction_minus", &SweepPoint::fraction_minus);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("alpha", &CalibrationResult::alpha)
      .def_readonly("alpha_stderr", &CalibrationResult::alpha_stderr)
      .def_readonly("linear_range_max", &CalibrationResult::linear_range_max)
      .def_readonly("diagnostics", &CalibrationResult::diagnostics)
      .def_property_readonly("ok", &CalibrationResult::ok);
  m.def(
      "fit_alpha",
      [](const std::vector<SweepPoint>& sweep, double linear_range) { return fit_alpha(sweep, linear_range); },
      py::arg("sweep"), py::arg("linear_range") = 1e-2);

  py::class_<CorrelationSeries>(m, "CorrelationSeries")
      .def_readonly("lags", &CorrelationSeries::lags)
      .def_readonly("times", &CorrelationSeries::times)
      .def_readonly("values", &CorrelationSeries::values)
      .def_readonly("counts", &CorrelationSeries::counts)
      .def_readonly("stderrs", &CorrelationSeries::stderrs)
      .def_readonly("delta_t", &CorrelationSeries::delta_t)
      .def_readonly("lag0_excluded", &CorrelationSeries::lag0_excluded)
      .def_property_readonly("level", [](const CorrelationSeries& c) { return to_string(c.level); })
      .def("__len__", &CorrelationSeries::size);
  m.def(
      "averaged_correlation",
      [](const SampleMatrix& s, std::optional<std::size_t> k_max) {
        return averaged_correlation(s, k_max.value_or(default_k_max(s.n_runs())));
      },
      py::arg("samples"), py::arg("k_max") = py::none());
  m.def(
      "qubit_correlation",
      [](const std::vector<double>& series, std::optional<std::size_t> k_max, double delta_t) {
        return qubit_correlation(series, k_max.value_or(default_k_max(series.size())), delta_t);
      },
      py::arg("series"), py::arg("k_max") = py::none(), py::arg("delta_t") = 1.0);
  m.def("beta_to_phi", &beta_to_phi, py::arg("beta"), py::arg("alpha"));
  m.def("rms_phi", &rms_phi, py::arg("phi"));

  py::class_<SpectrumEstimate>(m, "SpectrumEstimate")
      .def_readonly("frequencies", &SpectrumEstimate::frequencies)
      .def_readwrite("values", &SpectrumEstimate::values)
      .def_readonly("delta_t", &SpectrumEstimate::delta_t)
      .def_readonly("segment_length", &SpectrumEstimate::segment_length)
      .def_readonly("n_segments", &SpectrumEstimate::n_segments)
      .def_readonly("f0_removed", &SpectrumEstimate::f0_removed)
      .def_readonly("alpha", &SpectrumEstimate::alpha)
      .def_readonly("diagnostics", &SpectrumEstimate::diagnostics)
      .def_property_readonly("level", [](const SpectrumEstimate& s) { return to_string(s.level); })
      .def_property_readonly("window", [](const SpectrumEstimate& s) { return to_string(s.window); })
      .def("__len__", &SpectrumEstimate::size);
  m.def(
      "periodogram",
      [](const std::vector<double>& series, double delta_t, const std::string& window, const std::string& detrend) {
        return periodogram(series, delta_t, parse_window(window), parse_detrend(detrend));
      },
      py::arg("series"), py::arg("delta_t"), py::arg("window") = "hann", py::arg("detrend") = "constant");
  m.def(
      "welch_psd",
      [](const SampleMatrix& s, std::size_t segment_length, double overlap, const std::string& window,
         const std::string& detrend) {
        return welch_psd(s, welch_options(segment_length, overlap, window, detrend));
      },
      py::arg("samples"), py::arg("segment_length") = 0, py::arg("overlap_fraction") = 0.0,
      py::arg("window") = "hann", py::arg("detrend") = "constant");
  m.def(
      "welch_psd_series",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& series, double delta_t,
         std::size_t segment_length, double overlap, const std::string& window, const std::string& detrend) {
        const auto rows = array_to_rows(series);
        return welch_psd(rows, delta_t, welch_options(segment_length, overlap, window, detrend));
      },
      py::arg("series"), py::arg("delta_t"), py::arg("segment_length") = 0, py::arg("overlap_fraction") = 0.0,
      py::arg("window") = "hann", py::arg("detrend") = "constant");
  m.def("scale_to_phi", &scale_to_phi, py::arg("beta"), py::arg("alpha"));
  m.def("remove_f0", &remove_f0, py::arg("spectrum"));
  m.def(
      "check_sum_rule",
      [](const SpectrumEstimate& s, double alpha, double delta_t) {
        const auto r = check_sum_rule(s, alpha, delta_t);
        return py::dict(py::arg("integral") = r.integral, py::arg("target") = r.target,
                        py::arg("relative_error") = r.relative_error);
      },
      py::arg("spectrum"), py::arg("alpha"), py::arg("delta_t"));
  m.def("loglog_slope", &loglog_slope, py::arg("spectrum"), py::arg("f_lo"), py::arg("f_hi"));

  m.def("white_background", &white_background, py::arg("amplitude_hz"), py::arg("exponent"), py::arg("alpha"),
        py::arg("delta_t"));
  m.def(
      "model_curve",
      [](double amplitude_hz, double exponent, double white, const std::vector<double>& f) {
        return model_curve(amplitude_hz, exponent, white, f);
      },
      py::arg("amplitude_hz"), py::arg("exponent"), py::arg("white"), py::arg("frequencies"));
  m.def("model_spectrum", &model_spectrum, py::arg("amplitude_hz"), py::arg("exponent"), py::arg("alpha"),
        py::arg("delta_t"), py::arg("n_runs"));

  py::class_<FitInput>(m, "FitInput")
      .def(py::init([](SpectrumEstimate s, double alpha, double delta_t) { return FitInput{std::move(s), alpha, delta_t}; }),
           py::arg("spectrum"), py::arg("alpha"), py::arg("delta_t"))
      .def_readonly("spectrum", &FitInput::spectrum)
      .def_readonly("alpha", &FitInput::alpha)
      .def_readonly("delta_t", &FitInput::delta_t);

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("log10_amplitude_min", &FitOptions::log10_amplitude_min)
      .def_readwrite("log10_amplitude_max", &FitOptions::log10_amplitude_max)
      .def_readwrite("exponent_min", &FitOptions::exponent_min)
      .def_readwrite("exponent_max", &FitOptions::exponent_max)
      .def_readwrite("grid_points", &FitOptions::grid_points)
      .def_readwrite("tolerance", &FitOptions::tolerance)
      .def_readwrite("max_evaluations", &FitOptions::max_evaluations)
      .def_readwrite("skip_low_bins", &FitOptions::skip_low_bins);

  py::class_<ScheduleBackground>(m, "ScheduleBackground")
      .def_readonly("delta_t", &ScheduleBackground::delta_t)
      .def_readonly("alpha", &ScheduleBackground::alpha)
      .def_readonly("white", &ScheduleBackground::white)
      .def_readonly("feasible", &ScheduleBackground::feasible);

  py::class_<FluxNoiseFit>(m, "FluxNoiseFit")
      .def_readonly("amplitude_hz", &FluxNoiseFit::amplitude_hz)
      .def_readonly("amplitude_stderr", &FluxNoiseFit::amplitude_stderr)
      .def_readonly("exponent", &FluxNoiseFit::exponent)
      .def_readonly("exponent_stderr", &FluxNoiseFit::exponent_stderr)
      .def_readonly("backgrounds", &FluxNoiseFit::backgrounds)
      .def_readonly("objective", &FluxNoiseFit::objective)
      .def_readonly("residual_norm", &FluxNoiseFit::residual_norm)
      .def_readonly("n_points", &FluxNoiseFit::n_points)
      .def_readonly("converged", &FluxNoiseFit::converged)
      .def_readonly("diagnostics", &FluxNoiseFit::diagnostics)
      .def_property_readonly("feasible", &FluxNoiseFit::feasible);
  m.def(
      "global_fit",
      [](const std::vector<FitInput>& inputs, const FitOptions& options) { return global_fit(inputs, options); },
      py::arg("inputs"), py::arg("options") = FitOptions{});

  py::class_<ResidualSummary>(m, "ResidualSummary")
      .def_readonly("delta_t", &ResidualSummary::delta_t)
      .def_readonly("low_band_mean", &ResidualSummary::low_band_mean)
      .def_readonly("high_band_mean", &ResidualSummary::high_band_mean)
      .def_readonly("high_band_spread", &ResidualSummary::high_band_spread)
      .def_readonly("flagged", &ResidualSummary::flagged);
  m.def(
      "residual_diagnostics",
      [](const FluxNoiseFit& fit, const std::vector<FitInput>& inputs) { return residual_diagnostics(fit, inputs); },
      py::arg("fit"), py::arg("inputs"));
}
