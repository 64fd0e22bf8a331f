#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace esqm {

/// Seedable RNG with named substreams.
///
/// Substream `stream` of master seed `seed` drives an mt19937_64 engine whose
/// seed is mix64(seed + 0x9E3779B97F4A7C15 * (stream + 1)). Uniform doubles in
/// [0, 1) come from the top 53 bits of the engine output, standard normals
/// from the Box-Muller transform, and Cauchy(0, 1) variates as
/// tan(pi * (u - 1/2)). Sequences depend only on (seed, stream).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1))) {}

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  double cauchy() { return std::tan(M_PI * (uniform01() - 0.5)); }

  // Uniform integer in [0, n), bias-free.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return r % n;
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace esqm
