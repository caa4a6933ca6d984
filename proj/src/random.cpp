#include "hnoise/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hnoise {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kQubitSalt = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kPurposeSalt = 0x8cb92ba72f3d8dd7ULL;
constexpr std::uint64_t kChildSalt = 0xaef17502108ef2d9ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::uniform_open_low() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (spare_normal_) {
    double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  const double u1 = uniform_open_low();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("bound must be positive");
  }
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

RandomStream SeedSpec::stream(std::uint64_t qubit, StreamPurpose purpose) const {
  std::uint64_t k = mix64(master_ ^ kGolden);
  k = mix64(k ^ mix64(qubit + kQubitSalt));
  k = mix64(k ^ mix64(static_cast<std::uint64_t>(purpose) + kPurposeSalt));
  return RandomStream(k);
}

SeedSpec SeedSpec::child(std::uint64_t tag) const {
  return SeedSpec(mix64(mix64(master_ + kChildSalt) ^ mix64(tag * kGolden + 1)));
}

}  // namespace hnoise
