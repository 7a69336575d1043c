#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "czgrape/statespace.hpp"

namespace czgrape {

/// Deterministic random stream. mt19937_64's output sequence is pinned by the
/// standard, and the variate transforms below are written out by hand, so the
/// same seed yields the same draws on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    // 53 random bits scaled into the unit interval.
    return (gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one draw per call, no caching, so the
  /// stream position stays easy to reason about).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace czgrape
