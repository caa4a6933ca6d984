#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace hnoise::detail {

/// Shortest round-trip decimal representation; "nan"/"inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace hnoise::detail
