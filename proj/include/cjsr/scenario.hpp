#pragma once

// Sampled quasi-linear Lyapunov programs. Each observed pair (x, y) between
// nodes s and t yields the squared constraint
//     y^T P_t y <= lambda^(2l) x^T P_s x,
// linear in the stacked node matrices for fixed lambda. The optimal rate is
// found by bisection on lambda over a fixed-rate feasibility engine, then the
// largest Frobenius norm is reduced by a second bisection at that rate.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cjsr/csv.hpp"
#include "cjsr/ellipsoid.hpp"
#include "cjsr/error.hpp"
#include "cjsr/symlin.hpp"
#include "cjsr/system.hpp"

namespace cjsr {

struct SolverTolerances {
  double lambda_tol = 1e-3;
  double c_tol_factor = 1e-2;  // c_tol = c_tol_factor * sqrt(n)
  double feas_tol = 1e-9;
  double psd_slack = 1e-9;
  double frobenius_cap = 1e6;  // C
  double lambda_cap = 1e6;
  double floor_radius_rel = 1e-10;  // localization resolution, relative to the ball radius
  long iteration_factor = 60;       // iteration cap = factor * D^2 + 2000
};

/// Rank-one data of one squared Lyapunov inequality
/// <y y^T, P_target> <= rate * <x x^T, P_source>.
struct ConstraintRow {
  Vec x;
  Vec y;
  std::size_t source = 0;
  std::size_t target = 0;

  SymMatrix gram_source() const { return SymMatrix::outer(x); }
  SymMatrix gram_target() const { return SymMatrix::outer(y); }

  /// Left minus right side at `rate` = lambda^(2l).
  double residual(const std::vector<SymMatrix>& p, double rate) const {
    return y.dot(p[target].mat() * y) - rate * x.dot(p[source].mat() * x);
  }
  /// Magnitude used to scale the feasibility tolerance.
  double scale(const std::vector<SymMatrix>& p, double rate) const {
    return std::abs(y.dot(p[target].mat() * y)) + std::abs(rate * x.dot(p[source].mat() * x));
  }
};

inline std::vector<ConstraintRow> rows_from(const std::vector<HybridObservation>& obs) {
  std::vector<ConstraintRow> rows;
  rows.reserve(obs.size());
  for (const auto& o : obs) rows.push_back({o.x, o.y, o.source, o.target});
  return rows;
}

inline std::vector<ConstraintRow> rows_from(const std::vector<ContinuousObservation>& obs) {
  std::vector<ConstraintRow> rows;
  rows.reserve(obs.size());
  for (const auto& o : obs) rows.push_back({o.x, o.y, 0, 0});
  return rows;
}

/// Stacked coordinates of |U| symmetric n x n matrices: per node the upper
/// triangle with off-diagonals weighted by sqrt(2), so that the Euclidean
/// inner product equals the Frobenius one.
class StackedLayout {
 public:
  StackedLayout(std::size_t nodes, Eigen::Index n)
      : nodes_(nodes), n_(n), block_(n * (n + 1) / 2) {}

  std::size_t nodes() const { return nodes_; }
  Eigen::Index order() const { return n_; }
  Eigen::Index block() const { return block_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(nodes_) * block_; }
  Eigen::Index offset(std::size_t node) const { return static_cast<Eigen::Index>(node) * block_; }

  /// svec of v v^T scaled by `s`, accumulated into `out` at `node`'s block.
  void add_outer(Vec& out, std::size_t node, const Vec& v, double s) const {
    Eigen::Index k = offset(node);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = i; j < n_; ++j, ++k) {
        out(k) += s * v(i) * v(j) * (i == j ? 1.0 : kSqrt2);
      }
    }
  }

  void add_sym(Vec& out, std::size_t node, const Mat& m, double s) const {
    Eigen::Index k = offset(node);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = i; j < n_; ++j, ++k) {
        out(k) += s * m(i, j) * (i == j ? 1.0 : kSqrt2);
      }
    }
  }

  Mat unpack(const Vec& p, std::size_t node) const {
    Mat m(n_, n_);
    Eigen::Index k = offset(node);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = i; j < n_; ++j, ++k) {
        const double v = i == j ? p(k) : p(k) / kSqrt2;
        m(i, j) = v;
        m(j, i) = v;
      }
    }
    return m;
  }

  Vec pack(const std::vector<SymMatrix>& ps) const {
    Vec out = Vec::Zero(dim());
    for (std::size_t u = 0; u < nodes_; ++u) add_sym(out, u, ps[u].mat(), 1.0);
    return out;
  }

  std::vector<SymMatrix> unpack_all(const Vec& p) const {
    std::vector<SymMatrix> out;
    out.reserve(nodes_);
    for (std::size_t u = 0; u < nodes_; ++u) out.emplace_back(unpack(p, u));
    return out;
  }

 private:
  static constexpr double kSqrt2 = 1.4142135623730950488;
  std::size_t nodes_;
  Eigen::Index n_;
  Eigen::Index block_;
};

struct FeasibilityResult {
  bool feasible = false;
  std::vector<SymMatrix> p;   // one per node; empty when infeasible
  long iterations = 0;
  double max_residual = 0.0;  // max relative row residual at the returned point
  LocalizationStatus status = LocalizationStatus::IterationCap;
};

namespace detail {

// Separation over {P_u >= I} and {||P_u||_F <= radius}; nullopt if both hold.
inline std::optional<Cut> node_set_cut(const StackedLayout& layout, const Vec& p, double radius,
                                       double psd_slack) {
  for (std::size_t u = 0; u < layout.nodes(); ++u) {
    const SymEigen e = sym_eigen(SymMatrix(layout.unpack(p, u)));
    if (e.min() < 1.0 - psd_slack) {
      Cut cut{Vec::Zero(layout.dim()), -1.0};
      layout.add_outer(cut.a, u, e.vectors.col(0), -1.0);
      return cut;
    }
  }
  for (std::size_t u = 0; u < layout.nodes(); ++u) {
    const auto blk = p.segment(layout.offset(u), layout.block());
    const double f = blk.norm();
    if (f > radius * (1.0 + 1e-12)) {
      Cut cut{Vec::Zero(layout.dim()), radius};
      cut.a.segment(layout.offset(u), layout.block()) = blk / f;
      return cut;
    }
  }
  return std::nullopt;
}

// Rescales a feasible point so that min_u lambda_min(P_u) = 1 (homogeneous
// rows are unaffected; the Frobenius norms can only shrink).
inline void normalize_floor(std::vector<SymMatrix>& ps) {
  double lo = INFINITY;
  for (const auto& p : ps) lo = std::min(lo, sym_eigen(p).min());
  if (lo > 1.0 && std::isfinite(lo)) {
    for (auto& p : ps) p = (1.0 / lo) * p;
  }
}

}  // namespace detail

/// Fixed-rate feasibility of {P_u >= I, ||P_u||_F <= radius, every row at
/// lambda}. `rate` below is lambda^(2 * horizon).
inline FeasibilityResult feasibility(const std::vector<ConstraintRow>& rows, double lambda,
                                     int horizon, std::size_t node_count, Eigen::Index n,
                                     double radius, const SolverTolerances& tol = {}) {
  detail::require(lambda >= 0.0, "feasibility: lambda must be >= 0");
  detail::require(horizon >= 1, "feasibility: horizon must be >= 1");
  detail::require(node_count >= 1, "feasibility: need at least one node");
  detail::require(radius > 0.0, "feasibility: Frobenius radius must be positive");
  const double rate = std::pow(lambda, 2.0 * horizon);
  const StackedLayout layout(node_count, n);
  const Eigen::Index dim = layout.dim();

  Mat coeff(static_cast<Eigen::Index>(rows.size()), dim);
  coeff.setZero();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    detail::require(r.source < node_count && r.target < node_count,
                    "feasibility: row node out of range");
    detail::require(r.x.size() == n && r.y.size() == n, "feasibility: row dimension mismatch");
    Vec a = Vec::Zero(dim);
    layout.add_outer(a, r.target, r.y, 1.0);
    layout.add_outer(a, r.source, r.x, -rate);
    coeff.row(static_cast<Eigen::Index>(i)) = a.transpose();
  }
  const Vec row_norm = coeff.rowwise().norm();

  auto row_values = [&](const Vec& p) -> Vec { return coeff * p; };
  auto row_scale = [&](const std::vector<SymMatrix>& ps, std::size_t i) {
    return rows[i].scale(ps, rate);
  };

  auto oracle = [&](const Vec& p) -> std::optional<Cut> {
    if (auto cut = detail::node_set_cut(layout, p, radius, tol.psd_slack)) return cut;
    if (rows.empty()) return std::nullopt;
    const Vec values = row_values(p);
    Eigen::Index worst = -1;
    double worst_depth = 0.0;
    const std::vector<SymMatrix> ps = layout.unpack_all(p);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (values(i) <= 0.0) continue;
      if (values(i) <= tol.feas_tol * (1.0 + row_scale(ps, static_cast<std::size_t>(i)))) continue;
      const double depth = values(i) / row_norm(i);
      if (depth > worst_depth) {
        worst_depth = depth;
        worst = i;
      }
    }
    if (worst < 0) return std::nullopt;
    return Cut{coeff.row(worst).transpose(), 0.0};
  };

  // Centered at the scaled identity; 1.5 radius per block covers every ball.
  const double start_radius = 1.5 * radius * std::sqrt(static_cast<double>(node_count));
  LocalizationPolicy policy;
  policy.floor_radius = tol.floor_radius_rel * start_radius;
  policy.max_iterations = tol.iteration_factor * dim * dim + 2000;
  Vec center = Vec::Zero(dim);
  for (std::size_t u = 0; u < node_count; ++u) {
    layout.add_sym(center, u, Mat::Identity(n, n), 0.5 * radius / std::sqrt(static_cast<double>(n)));
  }
  const LocalizationResult loc = localize(oracle, center, start_radius, policy);

  FeasibilityResult out;
  out.iterations = loc.iterations;
  out.status = loc.status;
  if (!loc.found()) return out;
  out.feasible = true;
  out.p = layout.unpack_all(loc.point);
  detail::normalize_floor(out.p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double res = rows[i].residual(out.p, rate);
    out.max_residual = std::max(out.max_residual, res / (1.0 + rows[i].scale(out.p, rate)));
  }
  return out;
}

struct TraceEntry {
  std::string stage;  // "lambda" or "c"
  double value = 0.0;
  bool feasible = false;
  long iterations = 0;
};

struct SolverDiagnostics {
  long feasibility_iterations = 0;
  double max_residual = 0.0;
  std::vector<TraceEntry> trace;
};

struct ScenarioSolution {
  double lambda_star = 0.0;
  std::vector<SymMatrix> p_star;  // per node; a single entry in continuous mode
  double c_star = 0.0;            // max_u ||P_u||_F
  int horizon = 1;
  double lambda_lower = 0.0;      // largest rate verified infeasible (0 if none)
  SolverDiagnostics diagnostics;
};

namespace detail {

inline double max_frobenius(const std::vector<SymMatrix>& ps) {
  double c = 0.0;
  for (const auto& p : ps) c = std::max(c, p.frobenius());
  return c;
}

}  // namespace detail

/// Lexicographic minimization of (lambda, max_u ||P_u||_F) over the rows.
inline ScenarioSolution solve_rows(const std::vector<ConstraintRow>& rows, std::size_t node_count,
                                   Eigen::Index n, int horizon, const SolverTolerances& tol = {}) {
  detail::require(!rows.empty(), "solver: need at least one observation");
  detail::require(horizon >= 1, "solver: horizon must be >= 1");
  ScenarioSolution sol;
  sol.horizon = horizon;
  auto& diag = sol.diagnostics;

  auto check = [&](double lambda, double radius, const char* stage) {
    FeasibilityResult r = feasibility(rows, lambda, horizon, node_count, n, radius, tol);
    diag.feasibility_iterations += r.iterations;
    diag.trace.push_back({stage, stage[0] == 'c' ? radius : lambda, r.feasible, r.iterations});
    return r;
  };

  // With P = I every row holds once lambda^l >= ||y|| / ||x||.
  double ratio = 0.0;
  for (const auto& r : rows) {
    const double nx = r.x.norm();
    detail::require(nx > 0.0, "solver: observation with x = 0");
    ratio = std::max(ratio, r.y.norm() / nx);
  }
  double hi = 2.0 * std::pow(ratio, 1.0 / horizon);
  double lo = 0.0;
  std::optional<FeasibilityResult> best;
  if (hi == 0.0) {
    best = check(0.0, tol.frobenius_cap, "lambda");
  } else {
    for (;;) {
      FeasibilityResult r = check(hi, tol.frobenius_cap, "lambda");
      if (r.feasible) {
        best = std::move(r);
        break;
      }
      lo = hi;
      hi *= 2.0;
      if (hi > tol.lambda_cap) {
        throw UnboundedGrowth("sampled program infeasible for every rate up to " +
                              std::to_string(tol.lambda_cap));
      }
    }
    while (hi - lo > tol.lambda_tol) {
      const double mid = 0.5 * (lo + hi);
      FeasibilityResult r = check(mid, tol.frobenius_cap, "lambda");
      if (r.feasible) {
        hi = mid;
        best = std::move(r);
      } else {
        lo = mid;
      }
    }
  }
  if (!best || !best->feasible) throw NumericalError("solver: no feasible point found");
  sol.lambda_star = hi;
  sol.lambda_lower = lo;

  // Tie-break: smallest max Frobenius norm at lambda_star.
  const double c_tol = tol.c_tol_factor * std::sqrt(static_cast<double>(n));
  double c_hi = detail::max_frobenius(best->p);
  double c_lo = std::sqrt(static_cast<double>(n));
  while (c_hi - c_lo > c_tol) {
    const double mid = 0.5 * (c_lo + c_hi);
    FeasibilityResult r = check(sol.lambda_star, mid, "c");
    if (r.feasible) {
      c_hi = std::min(mid, detail::max_frobenius(r.p));
      best = std::move(r);
    } else {
      c_lo = mid;
    }
  }
  sol.p_star = best->p;
  sol.c_star = detail::max_frobenius(sol.p_star);
  diag.max_residual = best->max_residual;
  return sol;
}

/// Program over hybrid observations: one matrix per node of the graph.
inline ScenarioSolution solve_hybrid(const std::vector<HybridObservation>& obs,
                                     std::size_t node_count, int horizon,
                                     const SolverTolerances& tol = {}) {
  detail::require(!obs.empty(), "solve_hybrid: need at least one observation");
  return solve_rows(rows_from(obs), node_count, obs.front().x.size(), horizon, tol);
}

inline ScenarioSolution solve_hybrid(const HybridSampleSet& samples,
                                     const SolverTolerances& tol = {}) {
  return solve_hybrid(samples.observations(), samples.node_count, samples.horizon, tol);
}

/// Program over continuous observations: a single common matrix.
inline ScenarioSolution solve_continuous(const std::vector<ContinuousObservation>& obs,
                                         int horizon, const SolverTolerances& tol = {}) {
  detail::require(!obs.empty(), "solve_continuous: need at least one observation");
  return solve_rows(rows_from(obs), 1, obs.front().x.size(), horizon, tol);
}

inline ScenarioSolution solve_continuous(const ContinuousSampleSet& samples,
                                         const SolverTolerances& tol = {}) {
  return solve_continuous(samples.observations(), samples.horizon, tol);
}

/// stage, value, feasible, iterations
inline void write_trace_csv(std::ostream& os, const SolverDiagnostics& diag) {
  csv::write_row(os, {"step", "stage", "value", "feasible", "iterations"});
  for (std::size_t i = 0; i < diag.trace.size(); ++i) {
    const auto& t = diag.trace[i];
    csv::write_row(os, {std::to_string(i), t.stage, csv::num(t.value), t.feasible ? "1" : "0",
                        std::to_string(t.iterations)});
  }
}

}  // namespace cjsr
