#pragma once

#include <cstdint>
#include <random>

namespace pollnet {

// All randomness in the library flows through these helpers on top of
// std::mt19937_64, whose output sequence is fixed by the standard. The
// distribution mapping is spelled out here instead of using <random>
// distributions, so seeded results are identical across toolchains.
using Rng = std::mt19937_64;

// Uniform integer in [0, n) by rejection sampling (unbiased).
inline std::uint64_t bounded_uint(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double unit_real(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_real(rng);
}

}  // namespace pollnet
