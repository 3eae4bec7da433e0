#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace relembed {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent sub-seed, e.g. one per restart or retry.
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the i-th draw is a pure function of (seed, i), so
/// streams are reproducible bit-for-bit on any platform and any entry of a
/// random matrix can be computed on demand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  std::uint64_t at(std::uint64_t index) const noexcept { return mix64(key_ + index * kGolden); }

  std::uint64_t next() noexcept { return at(counter_++); }

  /// Uniform in [0, 1).
  double uniform() noexcept { return to_unit(next()); }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform in [0, n); n must be positive.
  std::size_t index(std::size_t n) noexcept {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double normal() noexcept {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return box_muller(u1, u2);
  }

  /// Standard normal indexed by position, independent of the running counter.
  double normal_at(std::uint64_t index) const noexcept {
    return box_muller(1.0 - to_unit(at(2 * index)), to_unit(at(2 * index + 1)));
  }

 private:
  static double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  static double box_muller(double u1, double u2) noexcept {
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace relembed
