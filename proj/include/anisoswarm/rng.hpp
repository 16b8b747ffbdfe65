#pragma once

// Portable random streams. SplitMix64 (Steele, Lea, Flood 2014) produces the
// raw 64-bit words; doubles take the top 53 bits; normals come from the
// Marsaglia polar method, which yields (x, y) pairs in the order drawn.
// Fixing all three makes seeds reproducible across implementations, which
// std::normal_distribution does not guarantee.

#include <cmath>
#include <cstdint>

#include "anisoswarm/types.hpp"

namespace anisoswarm {

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Independent standard normal pair (polar method).
  Vec2 normal_pair() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s >= 1.0 || s == 0.0) continue;
      const double m = std::sqrt(-2.0 * std::log(s) / s);
      return {u * m, v * m};
    }
  }

 private:
  std::uint64_t state_;
};

/// Seed for sweep point `index` derived from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  SplitMix64 h(index);
  return base ^ h.next();
}

}  // namespace anisoswarm
