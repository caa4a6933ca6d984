#include "hnoise/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hnoise/errors.hpp"
#include "hnoise/pipeline/manifest.hpp"
#include "text.hpp"

namespace hnoise::pipeline {

namespace {

using detail::format_double;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what + " (got '" + value + "')");
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    bad_value(key, raw, "expected a finite number");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    bad_value(key, raw, "expected a non-negative integer");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  bad_value(key, raw, "expected true or false");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& item : split_list(raw)) out.push_back(to_double(key, item));
  return out;
}

std::map<Duration, double> to_alpha_table(const std::string& key, const std::string& raw) {
  std::map<Duration, double> out;
  for (const auto& item : split_list(raw)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) bad_value(key, raw, "expected entries of the form t_a_us:alpha");
    const Duration t_a = Duration::from_microseconds(to_double(key, item.substr(0, colon)));
    if (!out.emplace(t_a, to_double(key, item.substr(colon + 1))).second) {
      bad_value(key, raw, "duplicate t_a entry");
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += items[i];
  }
  return out;
}

std::string us(Duration d) { return format_double(d.microseconds()); }

std::string alpha_table_text(const std::map<Duration, double>& table) {
  std::vector<std::string> items;
  for (const auto& [t_a, alpha] : table) items.push_back(us(t_a) + ":" + format_double(alpha));
  return join(items);
}

struct Field {
  const char* key;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class T>
Field size_field(const char* key, T PipelineConfig::*member) {
  return {key,
          [member](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.*member = static_cast<T>(to_u64(k, v));
          },
          [member](const PipelineConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(const char* key, double PipelineConfig::*member) {
  return {key,
          [member](PipelineConfig& c, const std::string& k, const std::string& v) { c.*member = to_double(k, v); },
          [member](const PipelineConfig& c) { return format_double(c.*member); }};
}

Field fit_double(const char* key, double FitOptions::*member) {
  return {key,
          [member](PipelineConfig& c, const std::string& k, const std::string& v) { c.fit.*member = to_double(k, v); },
          [member](const PipelineConfig& c) { return format_double(c.fit.*member); }};
}

Field fit_size(const char* key, std::size_t FitOptions::*member) {
  return {key,
          [member](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.fit.*member = static_cast<std::size_t>(to_u64(k, v));
          },
          [member](const PipelineConfig& c) { return std::to_string(c.fit.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"backend.kind",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const std::string s = trim(v);
         if (s == "simulated") c.backend_kind = BackendKind::simulated;
         else if (s == "replay") c.backend_kind = BackendKind::replay;
         else bad_value(k, v, "expected simulated or replay");
       },
       [](const PipelineConfig& c) {
         return std::string(c.backend_kind == BackendKind::simulated ? "simulated" : "replay");
       }},
      {"backend.name", [](PipelineConfig& c, const std::string&, const std::string& v) { c.backend_name = trim(v); },
       [](const PipelineConfig& c) { return c.backend_name; }},
      size_field("backend.n_qubits", &PipelineConfig::n_qubits),
      {"backend.t_d_us",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.t_d = Duration::from_microseconds(to_double(k, v));
       },
       [](const PipelineConfig& c) { return us(c.t_d); }},
      {"backend.alpha_table",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.alpha_table = to_alpha_table(k, v); },
       [](const PipelineConfig& c) { return alpha_table_text(c.alpha_table); }},
      {"backend.noise_amplitude_hz",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.noise.amplitude_hz = to_double(k, v); },
       [](const PipelineConfig& c) { return format_double(c.noise.amplitude_hz); }},
      {"backend.noise_exponent",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.noise.exponent = to_double(k, v); },
       [](const PipelineConfig& c) { return format_double(c.noise.exponent); }},
      {"backend.common_mode_fraction",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.noise.common_mode_fraction = to_double(k, v);
       },
       [](const PipelineConfig& c) { return format_double(c.noise.common_mode_fraction); }},
      {"backend.infrared",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const std::string s = trim(v);
         if (s == "static_offset") c.infrared = InfraredMode::static_offset;
         else if (s == "truncate") c.infrared = InfraredMode::truncate;
         else bad_value(k, v, "expected static_offset or truncate");
       },
       [](const PipelineConfig& c) {
         return std::string(c.infrared == InfraredMode::static_offset ? "static_offset" : "truncate");
       }},
      double_field("backend.bias_range", &PipelineConfig::bias_range),
      {"backend.replay_files",
       [](PipelineConfig& c, const std::string&, const std::string& v) {
         c.replay_files.clear();
         for (const auto& item : split_list(v)) c.replay_files.emplace_back(item);
       },
       [](const PipelineConfig& c) {
         std::vector<std::string> items;
         for (const auto& p : c.replay_files) items.push_back(p.generic_string());
         return join(items);
       }},
      {"schedules.t_a_us",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.t_a.clear();
         for (double x : to_double_list(k, v)) c.t_a.push_back(Duration::from_microseconds(x));
       },
       [](const PipelineConfig& c) {
         std::vector<std::string> items;
         for (Duration d : c.t_a) items.push_back(us(d));
         return join(items);
       }},
      size_field("schedules.n_runs", &PipelineConfig::n_runs),
      {"calibration.phi_grid",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.phi_grid = to_double_list(k, v); },
       [](const PipelineConfig& c) {
         std::vector<std::string> items;
         for (double x : c.phi_grid) items.push_back(format_double(x));
         return join(items);
       }},
      size_field("calibration.runs_per_point", &PipelineConfig::runs_per_point),
      double_field("calibration.linear_range", &PipelineConfig::linear_range),
      {"calibration.alpha",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.alpha_override = to_alpha_table(k, v); },
       [](const PipelineConfig& c) { return alpha_table_text(c.alpha_override); }},
      size_field("estimator.k_max", &PipelineConfig::k_max),
      {"estimator.window",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         try {
           c.window = parse_window(trim(v));
         } catch (const std::invalid_argument&) {
           bad_value(k, v, "expected hann or rectangular");
         }
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.window)); }},
      {"estimator.detrend",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         try {
           c.detrend = parse_detrend(trim(v));
         } catch (const std::invalid_argument&) {
           bad_value(k, v, "expected constant or none");
         }
       },
       [](const PipelineConfig& c) { return std::string(to_string(c.detrend)); }},
      size_field("estimator.segment_length", &PipelineConfig::segment_length),
      double_field("estimator.overlap", &PipelineConfig::overlap),
      {"estimator.collapse",
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.collapse = to_bool(k, v); },
       [](const PipelineConfig& c) { return std::string(c.collapse ? "true" : "false"); }},
      fit_double("fit.log10_amplitude_min", &FitOptions::log10_amplitude_min),
      fit_double("fit.log10_amplitude_max", &FitOptions::log10_amplitude_max),
      fit_double("fit.exponent_min", &FitOptions::exponent_min),
      fit_double("fit.exponent_max", &FitOptions::exponent_max),
      fit_size("fit.grid_points", &FitOptions::grid_points),
      fit_double("fit.tolerance", &FitOptions::tolerance),
      fit_size("fit.max_evaluations", &FitOptions::max_evaluations),
      fit_double("fit.infeasibility_penalty", &FitOptions::infeasibility_penalty),
      fit_size("fit.skip_low_bins", &FitOptions::skip_low_bins),
      size_field("run.seed", &PipelineConfig::seed),
      {"run.out_dir",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         if (trim(v).empty()) bad_value(k, v, "must not be empty");
         c.out_dir = trim(v);
       },
       [](const PipelineConfig& c) { return c.out_dir.generic_string(); }},
  };
  return table;
}

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

}  // namespace

PipelineConfig default_config() {
  PipelineConfig c;
  c.t_a = {Duration::from_microseconds(1), Duration::from_microseconds(100),
           Duration::from_microseconds(500)};
  c.alpha_table = {{Duration::from_microseconds(1), 10.0},
                   {Duration::from_microseconds(100), 12.0},
                   {Duration::from_microseconds(500), 14.0}};
  return c;
}

void set_field(PipelineConfig& config, const std::string& dotted_key, const std::string& value) {
  const std::string key = trim(dotted_key);
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

PipelineConfig parse_config(const std::string& ini_text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  PipelineConfig config = default_config();
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(source + ": key '" + section + "' must sit inside a [section]");
    }
    for (const auto& [key, value] : body) {
      set_field(config, section + "." + key, value.data());
    }
  }
  validate(config);
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

void validate(const PipelineConfig& c) {
  if (c.backend_name.empty()) invalid("backend.name", "must not be empty");
  if (c.backend_kind == BackendKind::simulated && c.n_qubits == 0) {
    invalid("backend.n_qubits", "must be at least 1");
  }
  if (c.t_d.nanoseconds() < 0) invalid("backend.t_d_us", "must be non-negative");
  if (!(c.noise.amplitude_hz >= 0.0)) invalid("backend.noise_amplitude_hz", "must be non-negative");
  if (!(c.noise.exponent > 0.0 && c.noise.exponent < 1.0)) {
    invalid("backend.noise_exponent", "must lie strictly inside (0, 1)");
  }
  if (!(c.noise.common_mode_fraction >= 0.0 && c.noise.common_mode_fraction <= 1.0)) {
    invalid("backend.common_mode_fraction", "must lie in [0, 1]");
  }
  if (!(c.bias_range > 0.0)) invalid("backend.bias_range", "must be positive");
  for (const auto& [t_a, alpha] : c.alpha_table) {
    if (!(alpha > 0.0)) invalid("backend.alpha_table", "alpha values must be positive");
  }
  if (c.backend_kind == BackendKind::replay && c.replay_files.empty()) {
    invalid("backend.replay_files", "a replay backend needs at least one file");
  }

  if (c.t_a.empty()) invalid("schedules.t_a_us", "needs at least one annealing time");
  std::set<Duration> seen;
  for (Duration t : c.t_a) {
    if (t.nanoseconds() <= 0) invalid("schedules.t_a_us", "annealing times must be positive");
    if (!seen.insert(t).second) invalid("schedules.t_a_us", "annealing times must be distinct");
    if (c.backend_kind == BackendKind::simulated && !c.alpha_table.contains(t)) {
      invalid("backend.alpha_table", "no alpha for t_a = " + us(t) + " us");
    }
  }
  if (c.n_runs < 8) invalid("schedules.n_runs", "must be at least 8");

  if (c.phi_grid.empty()) invalid("calibration.phi_grid", "needs at least one value");
  for (double phi : c.phi_grid) {
    if (!(std::abs(phi) <= c.bias_range)) {
      invalid("calibration.phi_grid", "value " + format_double(phi) + " exceeds backend.bias_range");
    }
  }
  if (c.runs_per_point == 0) invalid("calibration.runs_per_point", "must be at least 1");
  if (c.runs_per_point * c.phi_grid.size() < 8) {
    invalid("calibration.runs_per_point", "sweep needs at least 8 runs in total");
  }
  if (!(c.linear_range > 0.0)) invalid("calibration.linear_range", "must be positive");
  for (const auto& [t_a, alpha] : c.alpha_override) {
    if (!(alpha > 0.0)) invalid("calibration.alpha", "alpha values must be positive");
  }

  if (c.k_max > c.n_runs / 2) invalid("estimator.k_max", "must not exceed schedules.n_runs / 2");
  if (c.segment_length > c.n_runs) invalid("estimator.segment_length", "must not exceed schedules.n_runs");
  if (c.segment_length != 0 && c.segment_length < 4) {
    invalid("estimator.segment_length", "must be 0 (full length) or at least 4");
  }
  if (!(c.overlap >= 0.0 && c.overlap < 1.0)) invalid("estimator.overlap", "must lie in [0, 1)");

  const FitOptions& f = c.fit;
  if (!(f.log10_amplitude_min < f.log10_amplitude_max)) {
    invalid("fit.log10_amplitude_min", "must be below fit.log10_amplitude_max");
  }
  if (!(f.exponent_min > 0.0 && f.exponent_min < f.exponent_max && f.exponent_max < 1.0)) {
    invalid("fit.exponent_min", "need 0 < exponent_min < exponent_max < 1");
  }
  if (f.grid_points == 0) invalid("fit.grid_points", "must be at least 1");
  if (!(f.tolerance > 0.0)) invalid("fit.tolerance", "must be positive");
  if (f.max_evaluations < 10) invalid("fit.max_evaluations", "must be at least 10");
  if (!(f.infeasibility_penalty >= 0.0)) invalid("fit.infeasibility_penalty", "must be non-negative");
  if (f.skip_low_bins >= c.n_runs / 4) invalid("fit.skip_low_bins", "leaves too few bins to fit");
}

std::string to_ini(const PipelineConfig& config, bool include_out_dir) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    const std::string key = f.key;
    if (!include_out_dir && key == "run.out_dir") continue;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + f.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const PipelineConfig& config) { return sha256_hex(to_ini(config, false)); }

std::vector<AnnealSchedule> schedules(const PipelineConfig& config) {
  std::vector<AnnealSchedule> out;
  for (Duration t_a : config.t_a) out.push_back(make_schedule(t_a, config.t_d, config.n_runs));
  return out;
}

}  // namespace hnoise::pipeline
