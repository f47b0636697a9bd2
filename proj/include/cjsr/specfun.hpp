#pragma once

// Regularized incomplete beta function and the scalar functions built on it
// for sample-complexity bounds: the violation level epsilon(beta, N, d), the
// spherical-cap shrink factor delta(x) and the eccentricity factors kappa.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cjsr/error.hpp"
#include "cjsr/symlin.hpp"

namespace cjsr {

struct BetaParams {
  double a;
  double b;
};

namespace detail {

inline void check_beta(const BetaParams& p) {
  require(p.a > 0.0 && p.b > 0.0 && std::isfinite(p.a) && std::isfinite(p.b),
          "beta parameters must be positive and finite");
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
inline double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

// log of x^a (1-x)^b / B(a, b)
inline double beta_log_front(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
         b * std::log1p(-x);
}

inline double beta_density(double x, const BetaParams& p) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp(beta_log_front(x, p.a, p.b)) / (x * (1.0 - x));
}

}  // namespace detail

/// I_x(a, b), the CDF of Beta(a, b) at x.
inline double reg_inc_beta(double x, const BetaParams& p) {
  detail::check_beta(p);
  detail::require(x >= 0.0 && x <= 1.0, "reg_inc_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(detail::beta_log_front(x, p.a, p.b));
  double value;
  if (x < (p.a + 1.0) / (p.a + p.b + 2.0)) {
    value = front * detail::beta_continued_fraction(x, p.a, p.b) / p.a;
  } else {
    value = 1.0 - front * detail::beta_continued_fraction(1.0 - x, p.b, p.a) / p.b;
  }
  return std::clamp(value, 0.0, 1.0);
}

/// Quantile of Beta(a, b): bisection to a 1e-6 bracket, then safeguarded
/// Newton polishing until |I_x - q| <= 1e-13 or the bracket collapses.
inline double reg_inc_beta_inv(double q, const BetaParams& p) {
  detail::check_beta(p);
  detail::require(q >= 0.0 && q <= 1.0, "reg_inc_beta_inv: q outside [0, 1]");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  double x = 0.5;
  while (hi - lo > 1e-6) {
    x = 0.5 * (lo + hi);
    if (reg_inc_beta(x, p) < q) lo = x; else hi = x;
  }
  x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = reg_inc_beta(x, p) - q;
    if (std::abs(f) <= 1e-13) return x;
    if (f < 0.0) lo = x; else hi = x;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1e-300)) break;
    const double dens = detail::beta_density(x, p);
    double next = (dens > 0.0 && std::isfinite(dens)) ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

/// Violation level Phi^{-1}(1 - beta; d - 1, N) of a quasi-linear sampled
/// program with d decision variables and N samples. For d = 1 the beta law is
/// a point mass at 0 and the level is 0.
inline double epsilon(double beta, long long n_samples, long long d) {
  detail::require(beta > 0.0 && beta < 1.0, "epsilon: beta must lie in (0, 1)");
  detail::require(d >= 1, "epsilon: d must be >= 1");
  if (n_samples < d) {
    throw InsufficientSamples("insufficient samples: N = " + std::to_string(n_samples) +
                              " < d = " + std::to_string(d));
  }
  if (d == 1) return 0.0;
  return reg_inc_beta_inv(1.0 - beta, {static_cast<double>(d - 1),
                                       static_cast<double>(n_samples)});
}

/// sqrt(1 - Phi^{-1}(2x; (n-1)/2, 1/2)); nullopt when 2x >= 1 (vacuous bound).
inline std::optional<double> delta(double x, int n) {
  detail::require(n >= 2, "delta: dimension must be >= 2");
  detail::require(x >= 0.0 && !std::isnan(x), "delta: argument must be >= 0");
  if (x >= 0.5) return std::nullopt;
  if (x == 0.0) return 1.0;
  const double t = reg_inc_beta_inv(2.0 * x, {0.5 * (n - 1), 0.5});
  return std::sqrt(std::max(0.0, 1.0 - t));
}

/// sqrt(det P / lambda_min(P)^n) >= 1.
inline double kappa(const SymMatrix& p) {
  const SymEigen e = sym_eigen(p);
  if (e.min() <= default_policy().pd_floor) {
    throw InvalidArgument("kappa: matrix is not positive definite");
  }
  double log_ratio = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) log_ratio += std::log(e.values(i) / e.min());
  return std::exp(0.5 * log_ratio);
}

/// sqrt(det P / lambda_max(P)^n) <= 1.
inline double kappa_alt(const SymMatrix& p) {
  const SymEigen e = sym_eigen(p);
  if (e.min() <= default_policy().pd_floor) {
    throw InvalidArgument("kappa_alt: matrix is not positive definite");
  }
  double log_ratio = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) log_ratio += std::log(e.values(i) / e.max());
  return std::exp(0.5 * log_ratio);
}

}  // namespace cjsr
