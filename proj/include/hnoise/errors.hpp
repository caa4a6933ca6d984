#pragma once

#include <stdexcept>
#include <string>

namespace hnoise {

// Precondition violations on numeric arguments throw std::invalid_argument.
// The types below cover failures that callers are expected to branch on.

/// Missing or inconsistent configuration (e.g. no alpha for a requested t_a).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (replay files, CSV, calibration JSON).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No calibration point lies inside the linear response range.
class CalibrationRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The white background is negative over the whole fit search region.
class FitInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hnoise
