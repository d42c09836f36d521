#pragma once

#include <cstdint>
#include <random>

namespace arb {

/// SplitMix64 finalizer; used only to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed splitting rule for Monte Carlo replicates:
///   seed(master, grid_index, replicate) = splitmix64(master ^ splitmix64(grid_index << 32 | replicate))
/// Each replicate owns one mt19937_64 stream seeded with this value.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t grid_index,
                                    std::uint64_t replicate) {
  return splitmix64(master ^ splitmix64((grid_index << 32) | (replicate & 0xFFFFFFFFULL)));
}

using Engine = std::mt19937_64;

/// Uniform on [0,1) from the top 53 bits; platform independent, unlike
/// std::uniform_real_distribution.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform on [-1,1).
inline double uniform_symmetric(Engine& eng) { return 2.0 * uniform01(eng) - 1.0; }

}  // namespace arb
