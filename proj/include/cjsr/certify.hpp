#pragma once

// Probabilistic upper bounds on the constrained joint spectral radius from a
// solved sampled program. The sampled contraction rate is inflated by the
// noise radius and then divided by a spherical-cap factor that accounts for
// the directions the samples may have missed, given the violation level
// epsilon(beta, N) of the program.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cjsr/error.hpp"
#include "cjsr/scenario.hpp"
#include "cjsr/specfun.hpp"
#include "cjsr/symlin.hpp"
#include "cjsr/system.hpp"

namespace cjsr {

inline constexpr double kVacuous = std::numeric_limits<double>::infinity();

/// lambda*^l + sqrt(lambda_max(P_target) / lambda_min(P_source)) * W
inline double lambda_bar(const ScenarioSolution& sol, std::size_t source, std::size_t target,
                         double noise_radius, int horizon) {
  detail::require(noise_radius >= 0.0, "lambda_bar: noise radius must be >= 0");
  detail::require(source < sol.p_star.size() && target < sol.p_star.size(),
                  "lambda_bar: node out of range");
  const double base = std::pow(sol.lambda_star, horizon);
  if (noise_radius == 0.0) return base;
  const double ratio = sym_eigen(sol.p_star[target]).max() / sym_eigen(sol.p_star[source]).min();
  return base + std::sqrt(ratio) * noise_radius;
}

/// Contribution of one observed (source, target) pair, or of the single
/// common matrix in continuous mode.
struct BoundTerm {
  std::size_t source = 0;
  std::size_t target = 0;
  double lambda_bar = 0.0;
  double kappa = 1.0;           // kappa(P_source)
  double kappa_alt = 1.0;       // kappa_alt(P_source)
  double delta_arg = 0.0;       // eps * count * kappa / 2
  double delta_value = 0.0;     // 0 when vacuous
  double bound = kVacuous;      // (lambda_bar / delta)^(1/l)
  double alt_delta_arg = 0.0;   // (1 - (1 - eps * count) * kappa_alt) / 2
  double alt_delta_value = 0.0;
  double alt_bound = kVacuous;
};

struct BoundReport {
  double lambda_star = 0.0;
  int horizon = 1;
  double epsilon = 0.0;
  std::size_t count = 0;  // |E(G^(l))| (hybrid) or |L_{G,l}| (continuous)
  long long d = 0;
  std::vector<BoundTerm> terms;
  double rho_primary = kVacuous;
  double rho_alternative = kVacuous;
  double rho_final = kVacuous;
  bool vacuous = true;
  bool certifies_stability = false;
};

namespace detail {

inline BoundTerm bound_term(const ScenarioSolution& sol, std::size_t s, std::size_t t,
                            double eps, std::size_t count, double noise_radius, int horizon,
                            int n) {
  BoundTerm term;
  term.source = s;
  term.target = t;
  term.lambda_bar = lambda_bar(sol, s, t, noise_radius, horizon);
  term.kappa = kappa(sol.p_star[s]);
  term.kappa_alt = kappa_alt(sol.p_star[s]);
  const double mass = eps * static_cast<double>(count);
  const double inv_l = 1.0 / horizon;

  term.delta_arg = mass * term.kappa / 2.0;
  if (auto dv = delta(term.delta_arg, n); dv && *dv > 0.0) {
    term.delta_value = *dv;
    term.bound = std::pow(term.lambda_bar / *dv, inv_l);
  }
  if (mass < 1.0) {
    term.alt_delta_arg = (1.0 - (1.0 - mass) * term.kappa_alt) / 2.0;
    if (auto dv = delta(term.alt_delta_arg, n); dv && *dv > 0.0) {
      term.alt_delta_value = *dv;
      term.alt_bound = std::pow(term.lambda_bar / *dv, inv_l);
    }
  } else {
    term.alt_delta_arg = kVacuous;
  }
  return term;
}

inline void finalize(BoundReport& rep) {
  rep.rho_primary = 0.0;
  rep.rho_alternative = 0.0;
  for (const auto& t : rep.terms) {
    rep.rho_primary = std::max(rep.rho_primary, t.bound);
    rep.rho_alternative = std::max(rep.rho_alternative, t.alt_bound);
  }
  rep.rho_final = std::min(rep.rho_primary, rep.rho_alternative);
  rep.vacuous = !std::isfinite(rep.rho_final);
  rep.certifies_stability = !rep.vacuous && rep.rho_final < 1.0;
}

}  // namespace detail

/// Bound from hybrid observations. The maximum runs over the node pairs of
/// the observed edges; `lifted_edge_count` is |E(G^(l))|.
inline BoundReport hybrid_bound(const ScenarioSolution& sol, std::size_t lifted_edge_count,
                                const std::vector<std::pair<std::size_t, std::size_t>>& observed,
                                double beta, long long n_samples, int horizon, int n,
                                double noise_radius) {
  detail::require(!observed.empty(), "hybrid_bound: no observed edges");
  detail::require(lifted_edge_count >= 1, "hybrid_bound: lifted edge count must be >= 1");
  const long long nodes = static_cast<long long>(sol.p_star.size());
  BoundReport rep;
  rep.lambda_star = sol.lambda_star;
  rep.horizon = horizon;
  rep.count = lifted_edge_count;
  rep.d = nodes * n * (n + 1) / 2;
  rep.epsilon = epsilon(beta, n_samples, rep.d);

  std::vector<std::pair<std::size_t, std::size_t>> pairs(observed);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& [s, t] : pairs) {
    rep.terms.push_back(
        detail::bound_term(sol, s, t, rep.epsilon, lifted_edge_count, noise_radius, horizon, n));
  }
  detail::finalize(rep);
  return rep;
}

inline BoundReport hybrid_bound(const ScenarioSolution& sol, const HybridSampleSet& samples,
                                double beta) {
  std::vector<std::pair<std::size_t, std::size_t>> observed;
  for (const auto& o : samples.observations()) observed.emplace_back(o.source, o.target);
  const int n = static_cast<int>(samples.samples.front().x.size());
  return hybrid_bound(sol, samples.lifted_edge_count, observed, beta,
                      static_cast<long long>(samples.samples.size()), samples.horizon, n,
                      samples.noise_radius);
}

/// Bound from continuous observations; `word_count` is |L_{G,l}|.
inline BoundReport continuous_bound(const ScenarioSolution& sol, std::size_t word_count,
                                    double beta, long long n_samples, int horizon, int n,
                                    double noise_radius) {
  detail::require(sol.p_star.size() == 1, "continuous_bound: expected a single matrix");
  detail::require(word_count >= 1, "continuous_bound: word count must be >= 1");
  BoundReport rep;
  rep.lambda_star = sol.lambda_star;
  rep.horizon = horizon;
  rep.count = word_count;
  rep.d = static_cast<long long>(n) * (n + 1) / 2;
  rep.epsilon = epsilon(beta, n_samples, rep.d);
  rep.terms.push_back(
      detail::bound_term(sol, 0, 0, rep.epsilon, word_count, noise_radius, horizon, n));
  detail::finalize(rep);
  return rep;
}

inline BoundReport continuous_bound(const ScenarioSolution& sol,
                                    const ContinuousSampleSet& samples, double beta) {
  const int n = static_cast<int>(samples.samples.front().x.size());
  return continuous_bound(sol, samples.word_count, beta,
                          static_cast<long long>(samples.samples.size()), samples.horizon, n,
                          samples.noise_radius);
}

}  // namespace cjsr
