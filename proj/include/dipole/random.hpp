#pragma once

// Portable random streams: mt19937_64 seeded through splitmix64 from
// (seed, stream), with doubles built from the top 53 bits.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace dipole {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
                    static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state))};
  return std::mt19937_64(seq);
}

// Uniform on [0, 1).
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Standard normal by the polar method.
inline double standard_normal(std::mt19937_64& g) {
  for (;;) {
    const double u = 2.0 * uniform01(g) - 1.0;
    const double v = 2.0 * uniform01(g) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

// Uniform point on the unit sphere in R^n.
inline void random_unit_vector(std::mt19937_64& g, std::span<double> out) {
  for (;;) {
    double n2 = 0.0;
    for (double& v : out) {
      v = standard_normal(g);
      n2 += v * v;
    }
    if (n2 > 1e-20) {
      const double inv = 1.0 / std::sqrt(n2);
      for (double& v : out) v *= inv;
      return;
    }
  }
}

}  // namespace dipole
