#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace expgnn {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for a (domain, a, b) coordinate under a root seed.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t domain, std::uint64_t a = 0,
                                    std::uint64_t b = 0) noexcept {
  return mix64(mix64(mix64(root ^ mix64(domain)) ^ a) ^ mix64(b + 0x632be59bd9b4e019ULL));
}

// Distribution helpers with a fixed algorithm, so generated data does not
// depend on the standard library implementation.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % bound);
}

/// Uniform integer in [lo, hi].
inline std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace expgnn
