#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "cjsr/symlin.hpp"

namespace cjsr {

/// Seeded generator with platform-independent derived draws: the engine is
/// std::mt19937_64 (fully specified by the standard); uniform, index and
/// Gaussian draws are computed here rather than through the
/// implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n - 1}, by rejection (no modulo bias).
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform on the unit sphere of R^n (normalized Gaussian vector).
  Vec unit_sphere(Eigen::Index n) {
    Vec v(n);
    double norm;
    do {
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
      norm = v.norm();
    } while (norm == 0.0);
    return v / norm;
  }

  /// Uniform on the closed ball of radius `radius`.
  Vec ball(Eigen::Index n, double radius) {
    Vec dir = unit_sphere(n);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    return r * dir;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value));
}

}  // namespace cjsr
