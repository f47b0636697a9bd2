#pragma once

// Model-based reference values for the CJSR: quadratic multinorm upper bounds
// on product lifts, spectral-radius lower bounds from closed paths, and the
// upper bound obtained by forgetting the graph after lifting.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cjsr/ellipsoid.hpp"
#include "cjsr/error.hpp"
#include "cjsr/graph.hpp"
#include "cjsr/scenario.hpp"
#include "cjsr/symlin.hpp"
#include "cjsr/system.hpp"

namespace cjsr {

struct WhiteboxTolerances {
  double gamma_tol = 1e-4;
  double cut_tol = 1e-7;
  long cuts_per_edge = 500;
  double frobenius_cap = 1e6;
};

namespace detail {

struct RateEdge {
  std::size_t source;
  std::size_t target;
  Mat a;
};

// Is there {P_u >= I, ||P_u||_F <= C} with A^T P_t A <= rate P_s on every edge?
inline bool quadratic_feasible(const std::vector<RateEdge>& edges, std::size_t nodes,
                               Eigen::Index n, double rate, const WhiteboxTolerances& tol) {
  const StackedLayout layout(nodes, n);
  auto oracle = [&](const Vec& p) -> std::optional<Cut> {
    if (auto cut = node_set_cut(layout, p, tol.frobenius_cap, 1e-9)) return cut;
    const std::vector<SymMatrix> ps = layout.unpack_all(p);
    double worst = 0.0;
    std::optional<Cut> best;
    for (const auto& e : edges) {
      // Largest ratio (Av)^T P_t (Av) / v^T P_s v, via P_s = U^T U.
      const Mat u = cholesky(ps[e.source]);
      const Mat u_inv = u.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
      const Mat g = u_inv.transpose() * e.a.transpose() * ps[e.target].mat() * e.a * u_inv;
      const SymEigen eig = sym_eigen(SymMatrix(0.5 * (g + g.transpose())));
      const double depth = eig.max() / rate - 1.0;
      if (depth <= tol.cut_tol || depth <= worst) continue;
      worst = depth;
      const Vec v = u_inv * eig.vectors.col(n - 1);
      Cut cut{Vec::Zero(layout.dim()), 0.0};
      layout.add_outer(cut.a, e.target, e.a * v, 1.0);
      layout.add_outer(cut.a, e.source, v, -rate);
      best = std::move(cut);
    }
    return best;
  };
  const double radius = tol.frobenius_cap;
  const double start_radius = 1.5 * radius * std::sqrt(static_cast<double>(nodes));
  LocalizationPolicy policy;
  policy.floor_radius = 1e-10 * start_radius;
  policy.max_iterations = tol.cuts_per_edge * static_cast<long>(edges.size());
  Vec center = Vec::Zero(layout.dim());
  for (std::size_t u = 0; u < nodes; ++u) {
    layout.add_sym(center, u, Mat::Identity(n, n), 0.5 * radius / std::sqrt(static_cast<double>(n)));
  }
  return localize(oracle, center, start_radius, policy).found();
}

// Smallest gamma (to within gamma_tol, from above) with a feasible quadratic
// multinorm at rate gamma^(2 * exponent).
inline double quadratic_rate(const std::vector<RateEdge>& edges, std::size_t nodes,
                             Eigen::Index n, int exponent, const WhiteboxTolerances& tol) {
  double hi = 0.0;
  for (const auto& e : edges) {
    hi = std::max(hi, Eigen::JacobiSVD<Mat>(e.a).singularValues()(0));
  }
  hi = std::pow(hi, 1.0 / exponent);
  if (hi == 0.0) return 0.0;
  // P = I certifies hi; nudge so that the acceptance test does not sit on the boundary.
  hi *= 1.0 + 1e-9;
  double lo = 0.0;
  while (hi - lo > tol.gamma_tol) {
    const double mid = 0.5 * (lo + hi);
    if (quadratic_feasible(edges, nodes, n, std::pow(mid, 2.0 * exponent), tol)) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace detail

/// gamma*(G^(l), A^(l))^(1/l), returned as an upper value within gamma_tol.
inline double whitebox_upper(const SwitchedSystem& sys, int horizon,
                             const WhiteboxTolerances& tol = {}) {
  detail::require(horizon >= 1, "whitebox_upper: horizon must be >= 1");
  const LiftedSystem lifted = build_lift(sys, horizon);
  std::vector<detail::RateEdge> edges;
  for (const Edge& e : lifted.graph().edges()) {
    edges.push_back({e.source, e.target, lifted.matrix_of_edge(e.id)});
  }
  return detail::quadratic_rate(edges, lifted.graph().node_count(), sys.dimension(), horizon,
                                tol);
}

inline double spectral_radius(const Mat& a) {
  return Eigen::EigenSolver<Mat>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// max over closed-path words of length k <= L of rho(A_word)^(1/k).
inline double cycle_lower(const SwitchedSystem& sys, int max_length) {
  detail::require(max_length >= 1, "cycle_lower: max length must be >= 1");
  std::map<Word, double> seen;
  double best = 0.0;
  for (const Cycle& c : cycles_up_to(sys.graph(), max_length)) {
    if (seen.count(c.word)) continue;
    const double r = std::pow(spectral_radius(sys.word_matrix(c.word)),
                              1.0 / static_cast<double>(c.word.size()));
    seen.emplace(c.word, r);
    best = std::max(best, r);
  }
  return best;
}

/// Upper bound from the arbitrary-switching system on the distinct word
/// matrices of the l-lift, rescaled to a per-step rate.
inline double arbitrary_reduction_upper(const SwitchedSystem& sys, int horizon,
                                        const WhiteboxTolerances& tol = {}) {
  detail::require(horizon >= 1, "arbitrary_reduction_upper: horizon must be >= 1");
  if (sys.graph().node_count() == 1) return whitebox_upper(sys, horizon, tol);
  std::vector<detail::RateEdge> edges;
  for (const Word& w : language(sys.graph(), horizon)) {
    Mat a = sys.word_matrix(w);
    const bool dup = std::any_of(edges.begin(), edges.end(),
                                 [&](const detail::RateEdge& e) { return e.a == a; });
    if (!dup) edges.push_back({0, 0, std::move(a)});
  }
  return detail::quadratic_rate(edges, 1, sys.dimension(), horizon, tol);
}

struct BaselineRow {
  int horizon = 1;
  double upper = 0.0;
  double lower = 0.0;
  double width = 0.0;
};

struct BaselineReport {
  int cycle_max = 0;
  double lower = 0.0;
  std::vector<BaselineRow> rows;
};

inline BaselineReport baseline_report(const SwitchedSystem& sys, int max_horizon, int cycle_max,
                                      const WhiteboxTolerances& tol = {}) {
  detail::require(max_horizon >= 1, "baseline: max horizon must be >= 1");
  BaselineReport rep;
  rep.cycle_max = cycle_max;
  rep.lower = cycle_lower(sys, cycle_max);
  for (int l = 1; l <= max_horizon; ++l) {
    const double up = whitebox_upper(sys, l, tol);
    rep.rows.push_back({l, up, rep.lower, up - rep.lower});
  }
  return rep;
}

}  // namespace cjsr
