#pragma once

#include <cstdint>
#include <optional>

namespace hnoise {

enum class StreamPurpose : std::uint64_t {
  noise = 1,
  readout = 2,
  window_offset = 3,
  common_mode = 4,
  sweep = 5,
  test = 99,
};

/// Counter-based generator: output k is a bijective mix of (key, k).
/// Streams with different keys are statistically independent and never
/// share state, so work can be split per qubit in any order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low();
  /// Standard normal via Box-Muller; pairs are consumed in order.
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

/// Master seed plus derivation rule (seed, qubit, purpose) -> stream.
class SeedSpec {
 public:
  constexpr explicit SeedSpec(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }
  RandomStream stream(std::uint64_t qubit, StreamPurpose purpose) const;
  /// Independent child seed space, e.g. one per schedule or sweep point.
  SeedSpec child(std::uint64_t tag) const;

  bool operator==(const SeedSpec&) const = default;

 private:
  std::uint64_t master_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace hnoise
