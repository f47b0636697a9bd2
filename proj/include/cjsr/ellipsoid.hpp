#pragma once

// Deep-cut ellipsoid localization over a finite-dimensional convex set given
// by a separation oracle. The engine behind every fixed-rate feasibility
// question in the library: the current ellipsoid always contains the
// feasible part of the starting ball, so a cut that misses it entirely is a
// proof of infeasibility.

#include <cmath>
#include <optional>

#include "cjsr/symlin.hpp"

namespace cjsr {

/// Half-space a . p <= b required of every feasible point.
struct Cut {
  Vec a;
  double b = 0.0;
};

struct LocalizationPolicy {
  /// Localization gives up (infeasible) once the ellipsoid volume is below
  /// that of a ball of this radius.
  double floor_radius = 1e-10;
  long max_iterations = 100000;
};

enum class LocalizationStatus {
  Found,             // oracle accepted the center
  EmptyProof,        // a deep cut excluded the whole ellipsoid
  VolumeExhausted,   // ellipsoid smaller than the resolution ball
  IterationCap,
};

struct LocalizationResult {
  LocalizationStatus status = LocalizationStatus::IterationCap;
  Vec point;
  long iterations = 0;

  bool found() const { return status == LocalizationStatus::Found; }
};

/// `oracle(center)` returns nullopt to accept the center, or a cut violated
/// by it. Starts from the ball B(center, radius).
template <class Oracle>
LocalizationResult localize(Oracle&& oracle, Vec center, double radius,
                            const LocalizationPolicy& policy) {
  const Eigen::Index dim = center.size();
  LocalizationResult res;
  const double dimd = static_cast<double>(dim);

  if (dim == 1) {
    double lo = center(0) - radius;
    double hi = center(0) + radius;
    for (res.iterations = 0; res.iterations < policy.max_iterations; ++res.iterations) {
      center(0) = 0.5 * (lo + hi);
      std::optional<Cut> cut = oracle(static_cast<const Vec&>(center));
      if (!cut) {
        res.status = LocalizationStatus::Found;
        res.point = center;
        return res;
      }
      const double a = cut->a(0);
      if (a > 0) hi = std::min(hi, cut->b / a);
      else if (a < 0) lo = std::max(lo, cut->b / a);
      if (lo > hi) {
        res.status = LocalizationStatus::EmptyProof;
        return res;
      }
      if (hi - lo < 2.0 * policy.floor_radius) {
        res.status = LocalizationStatus::VolumeExhausted;
        return res;
      }
    }
    return res;
  }

  Mat shape = Mat::Identity(dim, dim) * (radius * radius);
  double log_volume = dimd * std::log(radius);
  const double log_floor = dimd * std::log(policy.floor_radius);

  for (res.iterations = 0; res.iterations < policy.max_iterations; ++res.iterations) {
    std::optional<Cut> cut = oracle(static_cast<const Vec&>(center));
    if (!cut) {
      res.status = LocalizationStatus::Found;
      res.point = std::move(center);
      return res;
    }
    const Vec ea = shape * cut->a;
    const double width2 = cut->a.dot(ea);
    if (!(width2 > 0.0) || !std::isfinite(width2)) {
      res.status = LocalizationStatus::VolumeExhausted;
      return res;
    }
    const double width = std::sqrt(width2);
    const double alpha = (cut->a.dot(center) - cut->b) / width;
    if (alpha >= 1.0) {
      res.status = LocalizationStatus::EmptyProof;
      return res;
    }
    const double a = std::max(alpha, 0.0);
    const double tau = (1.0 + dimd * a) / (dimd + 1.0);
    const double sigma = 2.0 * (1.0 + dimd * a) / ((dimd + 1.0) * (1.0 + a));
    const double scale = dimd * dimd * (1.0 - a * a) / (dimd * dimd - 1.0);
    center -= (tau / width) * ea;
    shape = scale * (shape - (sigma / width2) * (ea * ea.transpose()));
    shape = 0.5 * (shape + shape.transpose());
    log_volume += 0.5 * (dimd * std::log(scale) + std::log1p(-sigma));
    if (log_volume < log_floor) {
      res.status = LocalizationStatus::VolumeExhausted;
      return res;
    }
  }
  res.status = LocalizationStatus::IterationCap;
  return res;
}

}  // namespace cjsr
