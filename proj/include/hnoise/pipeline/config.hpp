#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hnoise/core.hpp"
#include "hnoise/modelfit.hpp"
#include "hnoise/noise_synth.hpp"
#include "hnoise/spectral.hpp"

namespace hnoise::pipeline {

enum class BackendKind { simulated, replay };

/// Everything a benchmark run depends on. Stored as an INI file with the
/// sections [backend], [schedules], [calibration], [estimator], [fit], [run].
struct PipelineConfig {
  // [backend]
  BackendKind backend_kind = BackendKind::simulated;
  std::string backend_name = "simulated";
  std::size_t n_qubits = 256;
  Duration t_d = Duration::from_nanoseconds(295'000);
  std::map<Duration, double> alpha_table;
  FluxNoiseSpec noise{23.0, 0.7, 0.0};
  InfraredMode infrared = InfraredMode::static_offset;
  double bias_range = 1.0;
  std::vector<std::filesystem::path> replay_files;

  // [schedules]
  std::vector<Duration> t_a;
  std::size_t n_runs = 1000;

  // [calibration]
  std::vector<double> phi_grid{-0.008, -0.004, 0.004, 0.008};
  std::size_t runs_per_point = 1000;
  double linear_range = 1e-2;
  /// Injected alpha(t_a); takes precedence over calibration files.
  std::map<Duration, double> alpha_override;

  // [estimator]
  /// 0 selects N/2.
  std::size_t k_max = 0;
  Window window = Window::hann;
  Detrend detrend = Detrend::constant;
  std::size_t segment_length = 0;
  double overlap = 0.0;
  bool collapse = false;

  // [fit]
  FitOptions fit = default_fit_options();

  // [run]
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "hnoise_out";

  static FitOptions default_fit_options() {
    FitOptions o;
    o.skip_low_bins = 1;
    return o;
  }
};

/// Simulated profile with 2000Q-like timing: t_d = 295 us, t_a = 1, 100, 500 us.
PipelineConfig default_config();

/// Reads an INI file on top of default_config(). Unknown sections or keys,
/// malformed values and out-of-range fields throw ConfigError naming the key.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& ini_text, const std::string& source = "<config>");

/// Sets one "section.key" to a textual value, as in the INI file.
void set_field(PipelineConfig& config, const std::string& dotted_key, const std::string& value);

/// Throws ConfigError naming the first invalid field.
void validate(const PipelineConfig& config);

/// Canonical INI text: fixed key order, shortest round-trip numbers.
std::string to_ini(const PipelineConfig& config, bool include_out_dir = true);

/// SHA-256 of the canonical INI without the output directory.
std::string config_hash(const PipelineConfig& config);

std::vector<AnnealSchedule> schedules(const PipelineConfig& config);

}  // namespace hnoise::pipeline
