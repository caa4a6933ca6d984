#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hnoise/core.hpp"
#include "hnoise/noise_synth.hpp"
#include "hnoise/random.hpp"

namespace hnoise {

/// Static description of an annealer. alpha_table and noise are only
/// meaningful for the simulated backend.
struct BackendProfile {
  std::string name = "simulated";
  std::size_t n_qubits = 0;
  Duration t_d;
  /// alpha(t_a), keyed by t_a.
  std::map<Duration, double> alpha_table;
  FluxNoiseSpec noise;
  /// Injected phi carries the model variance integrated from f = 0, which is
  /// what the sum-rule white background assumes.
  InfraredMode infrared = InfraredMode::static_offset;
  /// Largest |h| the device accepts.
  double bias_range = BiasProgram::kDefaultRange;
  /// Largest |phi| for which p_- = 1/2 + alpha phi is trusted.
  double linear_range = 1e-2;

  void validate() const;
  /// Throws ConfigError if t_a has no entry.
  double alpha_for(Duration t_a) const;
};

/// A simulated draw together with the hidden ground truth that produced it.
struct SamplingRun {
  SampleMatrix samples;
  /// phi_i(t_j) injected per qubit; empty for replayed data.
  std::vector<NoiseTrace> injected;
  /// Number of (run, qubit) draws whose probability left [0, 1] and was clamped.
  std::size_t clamp_events = 0;
};

class AnnealerBackend {
 public:
  virtual ~AnnealerBackend() = default;

  virtual const std::string& name() const = 0;
  virtual std::size_t n_qubits() const = 0;
  /// Run j is programmed with programs[j % programs.size()].
  virtual SamplingRun sample_sequence(std::span<const BiasProgram> programs,
                                      const AnnealSchedule& schedule, const SeedSpec& seeds) const = 0;

  SamplingRun sample_detailed(const BiasProgram& program, const AnnealSchedule& schedule,
                              const SeedSpec& seeds) const {
    return sample_sequence(std::span<const BiasProgram>(&program, 1), schedule, seeds);
  }

  SampleMatrix sample(const BiasProgram& program, const AnnealSchedule& schedule,
                      const SeedSpec& seeds) const {
    return sample_detailed(program, schedule, seeds).samples;
  }
};

/// Draws beta_i(j) = -1 with probability clamp(1/2 + alpha (h_i + phi_i(t_j)), 0, 1).
/// phi_i comes from seeds.stream(i, noise), the readout coin from seeds.stream(i, readout).
class SimulatedBackend final : public AnnealerBackend {
 public:
  explicit SimulatedBackend(BackendProfile profile);

  const std::string& name() const override { return profile_.name; }
  std::size_t n_qubits() const override { return profile_.n_qubits; }
  const BackendProfile& profile() const { return profile_; }

  SamplingRun sample_sequence(std::span<const BiasProgram> programs, const AnnealSchedule& schedule,
                              const SeedSpec& seeds) const override;

 private:
  BackendProfile profile_;
};

/// Serves recorded degenerate-run matrices. Seeds are ignored.
class ReplayBackend final : public AnnealerBackend {
 public:
  explicit ReplayBackend(std::vector<SampleMatrix> recordings, std::string name = "replay");

  const std::string& name() const override { return name_; }
  std::size_t n_qubits() const override { return n_qubits_; }
  std::span<const SampleMatrix> recordings() const { return recordings_; }

  /// Returns the recording whose t_a, t_d and run count match the schedule.
  /// Only a single degenerate program is accepted.
  SamplingRun sample_sequence(std::span<const BiasProgram> programs, const AnnealSchedule& schedule,
                              const SeedSpec& seeds) const override;

 private:
  std::vector<SampleMatrix> recordings_;
  std::string name_;
  std::size_t n_qubits_ = 0;
};

/// All-zero program: any readout correlation witnesses bias noise.
SampleMatrix run_degenerate_protocol(const AnnealerBackend& backend, const AnnealSchedule& schedule,
                                     const SeedSpec& seeds);

struct SweepPoint {
  double phi = 0.0;
  std::uint64_t count_minus = 0;
  std::uint64_t count_total = 0;

  double fraction_minus() const {
    return count_total == 0 ? 0.0 : static_cast<double>(count_minus) / static_cast<double>(count_total);
  }
};

struct BiasSweep {
  std::vector<SweepPoint> points;
  /// Linearity warnings (|phi| beyond the backend's linear range, clamping).
  std::vector<std::string> warnings;
};

/// Programs h_i = phi on every qubit and pools the -1 counts over qubits and
/// runs per grid value. Grid values are interleaved run by run within one
/// continuous sequence of n_runs_per_point * grid size anneals, so slow noise
/// is shared by every grid value instead of offsetting each one differently.
BiasSweep run_bias_sweep(const AnnealerBackend& backend, const AnnealSchedule& schedule,
                         std::span<const double> phi_grid, std::size_t n_runs_per_point,
                         const SeedSpec& seeds);

// JSON Lines replay format, one record per run in run order:
//   {"run": j, "t_a_us": x, "t_d_us": y, "readout": [+-1, ...]}

void write_samples_jsonl(std::ostream& out, const SampleMatrix& samples);
void write_samples_jsonl(const std::filesystem::path& path, const SampleMatrix& samples);
/// Throws FormatError naming the first offending line.
SampleMatrix read_samples_jsonl(std::istream& in, const std::string& source_name = "<stream>");
SampleMatrix read_samples_jsonl(const std::filesystem::path& path);

}  // namespace hnoise
