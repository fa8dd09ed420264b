#pragma once

#include <cstdint>
#include <random>

namespace socmarket {

// The library's random source. std::mt19937_64 output is fully specified by
// the standard; the distribution helpers below are written out so that draws
// are identical across standard library implementations.
using Rng = std::mt19937_64;

// Independent streams derived from one user seed (network, weights, prices).
enum class Stream : std::uint32_t { topology = 1, weights = 2, dynamics = 3 };

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1].
inline double uniform01_open_low(Rng& rng) { return 1.0 - uniform01(rng); }

// Uniform integer on [0, n). Multiply-shift on 53 bits; bias is below 2^-40
// for every n used here.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n));
}

}  // namespace socmarket
