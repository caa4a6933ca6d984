#include "hnoise/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hnoise {

Duration Duration::from_seconds(double seconds) {
  if (!std::isfinite(seconds)) {
    throw std::invalid_argument("duration must be finite");
  }
  return Duration(static_cast<std::int64_t>(std::llround(seconds * 1e9)));
}

Duration Duration::from_microseconds(double us) {
  if (!std::isfinite(us)) {
    throw std::invalid_argument("duration must be finite");
  }
  return Duration(static_cast<std::int64_t>(std::llround(us * 1e3)));
}

AnnealSchedule make_schedule(Duration t_a, Duration t_d, std::size_t n_runs) {
  if (t_a.nanoseconds() <= 0) {
    throw std::invalid_argument("annealing time t_a must be positive");
  }
  if (t_d.nanoseconds() < 0) {
    throw std::invalid_argument("dead time t_d must be non-negative");
  }
  if (n_runs < 4) {
    throw std::invalid_argument("a schedule needs at least 4 runs");
  }
  return AnnealSchedule{t_a, t_d, t_a + t_d, n_runs};
}

AnnealSchedule make_schedule(double t_a_seconds, double t_d_seconds, std::size_t n_runs) {
  if (!(t_a_seconds > 0.0)) {
    throw std::invalid_argument("annealing time t_a must be positive");
  }
  return make_schedule(Duration::from_seconds(t_a_seconds), Duration::from_seconds(t_d_seconds),
                       n_runs);
}

BiasProgram::BiasProgram(std::vector<double> biases, double range) : biases_(std::move(biases)) {
  for (std::size_t i = 0; i < biases_.size(); ++i) {
    if (!std::isfinite(biases_[i]) || std::abs(biases_[i]) > range) {
      throw std::invalid_argument("bias h_" + std::to_string(i) + " outside programmable range");
    }
  }
}

BiasProgram BiasProgram::degenerate(std::size_t n_qubits) {
  return BiasProgram(std::vector<double>(n_qubits, 0.0));
}

bool BiasProgram::is_degenerate() const {
  for (double h : biases_) {
    if (h != 0.0) return false;
  }
  return true;
}

SampleMatrix::SampleMatrix(AnnealSchedule schedule, std::size_t n_qubits,
                           std::vector<std::int8_t> readouts, SampleOrigin origin)
    : schedule_(schedule), n_qubits_(n_qubits), data_(std::move(readouts)), origin_(origin) {
  if (n_qubits_ == 0) {
    throw std::invalid_argument("sample matrix needs at least one qubit");
  }
  if (data_.size() != schedule_.n_runs * n_qubits_) {
    throw std::invalid_argument("sample matrix size does not match n_runs x n_qubits");
  }
  for (std::int8_t v : data_) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("readouts must be +1 or -1");
    }
  }
}

std::vector<double> SampleMatrix::column(std::size_t qubit) const {
  if (qubit >= n_qubits_) {
    throw std::out_of_range("qubit index out of range");
  }
  std::vector<double> out(n_runs());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = at(j, qubit);
  }
  return out;
}

std::string format_microseconds(Duration d) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << d.microseconds();
  return os.str();
}

}  // namespace hnoise
