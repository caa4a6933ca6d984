#include "hnoise/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hnoise/errors.hpp"

namespace hnoise {

void BackendProfile::validate() const {
  if (n_qubits == 0) {
    throw ConfigError("backend profile '" + name + "' has no qubits");
  }
  if (t_d.nanoseconds() < 0) {
    throw ConfigError("backend profile '" + name + "' has negative t_d");
  }
  for (const auto& [t_a, alpha] : alpha_table) {
    if (!(alpha > 0.0)) {
      throw ConfigError("alpha for t_a = " + format_microseconds(t_a) + " us must be positive");
    }
  }
}

double BackendProfile::alpha_for(Duration t_a) const {
  auto it = alpha_table.find(t_a);
  if (it == alpha_table.end()) {
    throw ConfigError("backend '" + name + "' has no alpha entry for t_a = " +
                      format_microseconds(t_a) + " us");
  }
  return it->second;
}

SimulatedBackend::SimulatedBackend(BackendProfile profile) : profile_(std::move(profile)) {
  profile_.validate();
  profile_.noise.validate();
}

SamplingRun SimulatedBackend::sample_sequence(std::span<const BiasProgram> programs,
                                              const AnnealSchedule& schedule,
                                              const SeedSpec& seeds) const {
  const std::size_t n = profile_.n_qubits;
  if (programs.empty()) {
    throw std::invalid_argument("sample_sequence needs at least one program");
  }
  for (const BiasProgram& program : programs) {
    if (program.size() != n) {
      throw std::invalid_argument("program length " + std::to_string(program.size()) +
                                  " does not match backend qubit count " + std::to_string(n));
    }
  }
  const double alpha = profile_.alpha_for(schedule.t_a);
  const std::size_t n_runs = schedule.n_runs;
  const double dt = schedule.delta_t.seconds();

  std::vector<NoiseTrace> phi;
  if (profile_.noise.amplitude_hz > 0.0) {
    phi = synthesize_ensemble(profile_.noise, n, n_runs, dt, seeds, profile_.infrared);
  }

  std::vector<std::int8_t> readouts(n_runs * n);
  std::size_t clamp_events = 0;
  const std::size_t n_programs = programs.size();
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream coin = seeds.stream(i, StreamPurpose::readout);
    for (std::size_t j = 0; j < n_runs; ++j) {
      const double h = programs[j % n_programs].biases()[i];
      const double bias = h + (phi.empty() ? 0.0 : phi[i].values[j]);
      double p_minus = 0.5 + alpha * bias;
      if (p_minus < 0.0 || p_minus > 1.0) {
        ++clamp_events;
        p_minus = std::clamp(p_minus, 0.0, 1.0);
      }
      readouts[j * n + i] = coin.uniform() < p_minus ? std::int8_t{-1} : std::int8_t{1};
    }
  }
  return SamplingRun{SampleMatrix(schedule, n, std::move(readouts), SampleOrigin::simulated),
                     std::move(phi), clamp_events};
}

ReplayBackend::ReplayBackend(std::vector<SampleMatrix> recordings, std::string name)
    : recordings_(std::move(recordings)), name_(std::move(name)) {
  if (recordings_.empty()) {
    throw ConfigError("replay backend needs at least one recording");
  }
  n_qubits_ = recordings_.front().n_qubits();
  for (const auto& r : recordings_) {
    if (r.n_qubits() != n_qubits_) {
      throw FormatError("replay recordings disagree on qubit count");
    }
  }
}

SamplingRun ReplayBackend::sample_sequence(std::span<const BiasProgram> programs,
                                           const AnnealSchedule& schedule,
                                           const SeedSpec& /*seeds*/) const {
  if (programs.size() != 1 || !programs.front().is_degenerate()) {
    throw ConfigError("replay backend only holds degenerate-run recordings");
  }
  if (programs.front().size() != n_qubits_) {
    throw FormatError("replay recording has " + std::to_string(n_qubits_) +
                      " qubits but the program has " + std::to_string(programs.front().size()));
  }
  for (const auto& r : recordings_) {
    if (r.schedule() == schedule) {
      return SamplingRun{r, {}, 0};
    }
  }
  throw FormatError("no replay recording matches t_a = " + format_microseconds(schedule.t_a) +
                    " us, t_d = " + format_microseconds(schedule.t_d) +
                    " us, N = " + std::to_string(schedule.n_runs));
}

SampleMatrix run_degenerate_protocol(const AnnealerBackend& backend, const AnnealSchedule& schedule,
                                     const SeedSpec& seeds) {
  return backend.sample(BiasProgram::degenerate(backend.n_qubits()), schedule, seeds);
}

BiasSweep run_bias_sweep(const AnnealerBackend& backend, const AnnealSchedule& schedule,
                         std::span<const double> phi_grid, std::size_t n_runs_per_point,
                         const SeedSpec& seeds) {
  if (phi_grid.empty()) {
    throw std::invalid_argument("bias sweep grid is empty");
  }
  double bias_range = BiasProgram::kDefaultRange;
  double linear_range = 1e-2;
  if (const auto* sim = dynamic_cast<const SimulatedBackend*>(&backend)) {
    bias_range = sim->profile().bias_range;
    linear_range = sim->profile().linear_range;
  }

  if (n_runs_per_point == 0) {
    throw std::invalid_argument("bias sweep needs at least one run per point");
  }
  BiasSweep sweep;
  const std::size_t n = backend.n_qubits();
  const std::size_t n_points = phi_grid.size();
  std::vector<BiasProgram> programs;
  programs.reserve(n_points);
  for (double phi : phi_grid) {
    if (!(std::abs(phi) <= bias_range)) {
      throw std::invalid_argument("sweep value " + std::to_string(phi) + " outside bias range");
    }
    if (std::abs(phi) > linear_range) {
      std::ostringstream msg;
      msg << "phi = " << phi << " exceeds the linear response range " << linear_range;
      sweep.warnings.push_back(msg.str());
    }
    programs.emplace_back(std::vector<double>(n, phi), bias_range);
  }

  const AnnealSchedule sweep_schedule =
      make_schedule(schedule.t_a, schedule.t_d, n_runs_per_point * n_points);
  const SamplingRun run = backend.sample_sequence(programs, sweep_schedule, seeds);
  for (std::size_t g = 0; g < n_points; ++g) {
    sweep.points.push_back(SweepPoint{phi_grid[g], 0, n_runs_per_point * n});
  }
  for (std::size_t j = 0; j < sweep_schedule.n_runs; ++j) {
    SweepPoint& point = sweep.points[j % n_points];
    for (std::int8_t v : run.samples.row(j)) {
      if (v < 0) ++point.count_minus;
    }
  }
  if (run.clamp_events > 0) {
    std::ostringstream msg;
    msg << run.clamp_events << " of " << run.samples.raw().size()
        << " sweep draws clamped to probability 0 or 1";
    sweep.warnings.push_back(msg.str());
  }
  return sweep;
}

void write_samples_jsonl(std::ostream& out, const SampleMatrix& samples) {
  const std::string t_a = nlohmann::json(samples.schedule().t_a.microseconds()).dump();
  const std::string t_d = nlohmann::json(samples.schedule().t_d.microseconds()).dump();
  std::string line;
  for (std::size_t j = 0; j < samples.n_runs(); ++j) {
    line.clear();
    line += "{\"run\": " + std::to_string(j) + ", \"t_a_us\": " + t_a + ", \"t_d_us\": " + t_d +
            ", \"readout\": [";
    const auto row = samples.row(j);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) line += ", ";
      line += row[i] > 0 ? "1" : "-1";
    }
    line += "]}\n";
    out << line;
  }
}

void write_samples_jsonl(const std::filesystem::path& path, const SampleMatrix& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  write_samples_jsonl(out, samples);
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

SampleMatrix read_samples_jsonl(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t runs = 0;
  double t_a_us = 0.0;
  double t_d_us = 0.0;
  std::size_t width = 0;
  std::vector<std::int8_t> data;

  auto fail = [&](const std::string& what) {
    throw FormatError(source_name + ":" + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) fail("record is not an object");
    for (const char* key : {"run", "t_a_us", "t_d_us", "readout"}) {
      if (!record.contains(key)) fail(std::string("missing field '") + key + "'");
    }
    if (!record["run"].is_number_integer() || record["run"].get<std::int64_t>() != static_cast<std::int64_t>(runs)) {
      fail("expected run index " + std::to_string(runs));
    }
    if (!record["t_a_us"].is_number() || !record["t_d_us"].is_number()) {
      fail("t_a_us and t_d_us must be numbers");
    }
    const auto& readout = record["readout"];
    if (!readout.is_array() || readout.empty()) fail("readout must be a non-empty array");
    const double ta = record["t_a_us"].get<double>();
    const double td = record["t_d_us"].get<double>();
    if (runs == 0) {
      t_a_us = ta;
      t_d_us = td;
      width = readout.size();
    } else {
      if (ta != t_a_us || td != t_d_us) fail("t_a_us/t_d_us differ from the first record");
      if (readout.size() != width) fail("readout length differs from the first record");
    }
    for (const auto& v : readout) {
      if (!v.is_number_integer()) fail("readout entries must be +1 or -1");
      const auto x = v.get<std::int64_t>();
      if (x != 1 && x != -1) fail("readout entries must be +1 or -1");
      data.push_back(static_cast<std::int8_t>(x));
    }
    ++runs;
  }
  if (runs == 0) {
    throw FormatError(source_name + ": no records");
  }
  AnnealSchedule schedule;
  try {
    schedule = make_schedule(Duration::from_microseconds(t_a_us), Duration::from_microseconds(t_d_us),
                             runs);
  } catch (const std::invalid_argument& e) {
    throw FormatError(source_name + ": " + e.what());
  }
  return SampleMatrix(schedule, width, std::move(data), SampleOrigin::replayed);
}

SampleMatrix read_samples_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  return read_samples_jsonl(in, path.string());
}

}  // namespace hnoise
