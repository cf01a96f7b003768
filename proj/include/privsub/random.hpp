#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace privsub {

// std::mt19937_64 output is fixed by the standard; the distributions in
// <random> are not, so the conversions below are spelled out to keep runs
// bit-identical across standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Uniform integer in [0, bound) by rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

inline std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(p[i], p[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
  }
  return p;
}

}  // namespace privsub
