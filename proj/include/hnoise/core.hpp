#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hnoise {

/// Time span held as an integer nanosecond count so that schedule sums are exact.
class Duration {
 public:
  constexpr Duration() = default;

  static constexpr Duration from_nanoseconds(std::int64_t ns) { return Duration(ns); }
  /// Rounds to the nearest nanosecond.
  static Duration from_seconds(double seconds);
  static Duration from_microseconds(double us);

  constexpr std::int64_t nanoseconds() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }
  constexpr double microseconds() const { return static_cast<double>(ns_) * 1e-3; }

  constexpr Duration operator+(Duration other) const { return Duration(ns_ + other.ns_); }
  constexpr Duration operator-(Duration other) const { return Duration(ns_ - other.ns_); }
  constexpr auto operator<=>(const Duration&) const = default;

 private:
  constexpr explicit Duration(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

/// Timing of one benchmark series: N runs spaced delta_t = t_a + t_d apart.
struct AnnealSchedule {
  Duration t_a;
  Duration t_d;
  Duration delta_t;
  std::size_t n_runs = 0;

  bool operator==(const AnnealSchedule&) const = default;
};

/// Validates t_a > 0, t_d >= 0, n_runs >= 4 and derives delta_t.
AnnealSchedule make_schedule(Duration t_a, Duration t_d, std::size_t n_runs);
AnnealSchedule make_schedule(double t_a_seconds, double t_d_seconds, std::size_t n_runs);

/// Programmed per-qubit biases h_i. Couplers are not modelled.
class BiasProgram {
 public:
  static constexpr double kDefaultRange = 1.0;

  explicit BiasProgram(std::vector<double> biases, double range = kDefaultRange);
  static BiasProgram degenerate(std::size_t n_qubits);

  std::span<const double> biases() const { return biases_; }
  std::size_t size() const { return biases_.size(); }
  bool is_degenerate() const;

 private:
  std::vector<double> biases_;
};

enum class SampleOrigin { simulated, replayed };

/// N x n matrix of +-1 readouts; row j is run j (read at t_j = (j+1) delta_t).
class SampleMatrix {
 public:
  SampleMatrix(AnnealSchedule schedule, std::size_t n_qubits, std::vector<std::int8_t> readouts,
               SampleOrigin origin);

  const AnnealSchedule& schedule() const { return schedule_; }
  std::size_t n_runs() const { return schedule_.n_runs; }
  std::size_t n_qubits() const { return n_qubits_; }
  SampleOrigin origin() const { return origin_; }

  std::int8_t at(std::size_t run, std::size_t qubit) const { return data_[run * n_qubits_ + qubit]; }
  std::span<const std::int8_t> row(std::size_t run) const {
    return {data_.data() + run * n_qubits_, n_qubits_};
  }
  /// Time series beta_i(j) of one qubit as doubles.
  std::vector<double> column(std::size_t qubit) const;
  std::span<const std::int8_t> raw() const { return data_; }

  bool operator==(const SampleMatrix& other) const {
    return schedule_ == other.schedule_ && n_qubits_ == other.n_qubits_ && data_ == other.data_;
  }

 private:
  AnnealSchedule schedule_;
  std::size_t n_qubits_;
  std::vector<std::int8_t> data_;
  SampleOrigin origin_;
};

/// Report-unit helpers. Math code stays in seconds and Hz.
inline double to_microseconds(double seconds) { return seconds * 1e6; }
inline double from_microseconds(double us) { return us * 1e-6; }
std::string format_microseconds(Duration d);

}  // namespace hnoise
