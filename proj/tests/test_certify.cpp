#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace cjsr;
using testing_support::mat2;

namespace {

ScenarioSolution fixed_solution(double lambda, std::vector<SymMatrix> ps, int l = 1) {
  ScenarioSolution sol;
  sol.lambda_star = lambda;
  sol.p_star = std::move(ps);
  sol.horizon = l;
  return sol;
}

const std::vector<std::pair<std::size_t, std::size_t>> kSelf{{0, 0}};

}  // namespace

TEST(LambdaBar, Examples) {
  const auto id = fixed_solution(0.8, {SymMatrix::identity(2), SymMatrix::identity(2)});
  EXPECT_DOUBLE_EQ(lambda_bar(id, 0, 1, 0.0, 3), std::pow(0.8, 3));
  EXPECT_NEAR(lambda_bar(id, 0, 1, 0.1, 1), 0.9, 1e-15);
  const auto aniso = fixed_solution(0.8, {SymMatrix::identity(2), SymMatrix(mat2(1, 0, 0, 4))});
  EXPECT_NEAR(lambda_bar(aniso, 0, 1, 0.1, 1), 1.0, 1e-14);
  EXPECT_THROW(lambda_bar(aniso, 0, 1, -0.1, 1), InvalidArgument);
}

TEST(HybridBound, IsotropicCollapse) {
  const auto sol = fixed_solution(0.7, {SymMatrix::identity(2)});
  const BoundReport rep = hybrid_bound(sol, 1, kSelf, 0.05, 500, 1, 2, 0.0);
  const double eps = epsilon(0.05, 500, 3);
  EXPECT_EQ(rep.d, 3);
  EXPECT_DOUBLE_EQ(rep.epsilon, eps);
  const double expect = 0.7 / std::cos(std::numbers::pi * eps / 2);
  EXPECT_NEAR(rep.rho_primary, expect, 1e-10);
  EXPECT_NEAR(rep.rho_alternative, rep.rho_primary, 1e-10);
  EXPECT_NEAR(rep.rho_final, expect, 1e-10);
  EXPECT_TRUE(rep.certifies_stability);
}

TEST(HybridBound, AsymptoticCollapse) {
  const auto sol = fixed_solution(0.9, {SymMatrix::identity(2), SymMatrix(mat2(2, 0, 0, 3))}, 2);
  const std::vector<std::pair<std::size_t, std::size_t>> obs{{0, 1}, {1, 0}};
  double prev = INFINITY;
  for (long long n : {1000LL, 100000LL, 10000000LL}) {
    const BoundReport rep = hybrid_bound(sol, 9, obs, 0.05, n, 2, 2, 0.0);
    EXPECT_LT(rep.rho_final, prev);
    prev = rep.rho_final;
  }
  EXPECT_NEAR(prev, 0.9, 1e-3);
}

TEST(HybridBound, InsufficientSamples) {
  const auto sol = fixed_solution(0.7, {SymMatrix::identity(2), SymMatrix::identity(2),
                                        SymMatrix::identity(2)});
  EXPECT_THROW(hybrid_bound(sol, 5, kSelf, 0.05, 8, 1, 2, 0.0), InsufficientSamples);
  EXPECT_NO_THROW(hybrid_bound(sol, 5, kSelf, 0.05, 9, 1, 2, 0.0));
}

TEST(HybridBound, VacuousAtSmallSamples) {
  const auto sol = fixed_solution(0.7, {SymMatrix::identity(2)});
  const BoundReport rep = hybrid_bound(sol, 20, kSelf, 0.05, 3, 1, 2, 0.0);
  EXPECT_TRUE(rep.vacuous);
  EXPECT_TRUE(std::isinf(rep.rho_final));
  EXPECT_FALSE(rep.certifies_stability);
}

TEST(HybridBound, VacuityClearsWithSamples) {
  const auto sol = fixed_solution(0.7, {SymMatrix(mat2(1, 0, 0, 5))});
  bool cleared = false;
  for (long long n = 3; n < 10000000 && !cleared; n *= 4) {
    cleared = !hybrid_bound(sol, 20, kSelf, 0.05, n, 1, 2, 0.0).vacuous;
  }
  EXPECT_TRUE(cleared);
}

TEST(HybridBound, AlternativeCanWin) {
  // kappa = 1.8 with eps * |E| near 0.47: the primary argument is 0.421, the alternative 0.352.
  const auto sol = fixed_solution(0.7, {SymMatrix(mat2(1, 0, 0, 1.8 * 1.8))});
  const BoundReport rep = hybrid_bound(sol, 20, kSelf, 0.05, 200, 1, 2, 0.0);
  const double m = 20 * rep.epsilon;
  EXPECT_NEAR(rep.terms[0].delta_arg, m * 1.8 / 2, 1e-12);
  EXPECT_NEAR(rep.terms[0].alt_delta_arg, (1 - (1 - m) / 1.8) / 2, 1e-12);
  EXPECT_NEAR(rep.rho_primary, 0.7 / std::cos(std::numbers::pi * m * 0.9), 1e-10);
  EXPECT_LT(rep.rho_alternative, rep.rho_primary);
  EXPECT_EQ(rep.rho_final, rep.rho_alternative);
  // With few words the primary bound is the tighter one.
  const BoundReport few = hybrid_bound(sol, 2, kSelf, 0.05, 200, 1, 2, 0.0);
  EXPECT_EQ(few.rho_final, few.rho_primary);
}

TEST(HybridBound, TermsGroupedByNodePairAndDominateRate) {
  const auto set = [] {
    SamplingConfig cfg;
    cfg.samples = 1500;
    cfg.seed = 3;
    cfg.noise_radius = 0.01;
    return sample_hybrid(ncs_example(), cfg);
  }();
  const auto sol = solve_hybrid(set);
  const BoundReport rep = hybrid_bound(sol, set, 0.05);
  EXPECT_EQ(rep.count, 5u);
  EXPECT_EQ(rep.terms.size(), 5u);  // NCS edges have distinct node pairs
  for (const auto& t : rep.terms) {
    EXPECT_GE(t.bound, t.lambda_bar - 1e-15);
    EXPECT_GE(rep.rho_final, t.lambda_bar - 1e-15);
    EXPECT_GE(t.kappa, 1.0 - 1e-12);
    EXPECT_LE(t.kappa_alt, 1.0 + 1e-12);
  }
  EXPECT_EQ(rep.rho_final, std::min(rep.rho_primary, rep.rho_alternative));
}

TEST(HybridBound, NoiseFreeBoundDominatesRate) {
  for (std::uint64_t seed : {1u, 2u}) {
    SamplingConfig cfg;
    cfg.samples = 4000;
    cfg.seed = seed;
    const auto set = sample_hybrid(ncs_example(), cfg);
    const auto sol = solve_hybrid(set);
    const BoundReport rep = hybrid_bound(sol, set, 0.05);
    EXPECT_GE(rep.rho_final, sol.lambda_star);
    EXPECT_LT(rep.rho_final, 1.0);
    EXPECT_TRUE(rep.certifies_stability);
  }
}

TEST(ContinuousBound, IsotropicCollapseAndSingleWordLimit) {
  const auto sol = fixed_solution(0.6, {SymMatrix::identity(3)});
  const BoundReport rep = continuous_bound(sol, 4, 0.05, 1000, 1, 3, 0.0);
  EXPECT_EQ(rep.d, 6);
  EXPECT_NEAR(rep.rho_primary, rep.rho_alternative, 1e-10);
  EXPECT_NEAR(rep.rho_primary, 0.6 / (1.0 - 4 * rep.epsilon), 1e-10);
  const BoundReport lim = continuous_bound(sol, 1, 0.05, 100000000, 1, 3, 0.0);
  EXPECT_NEAR(lim.rho_final, 0.6, 1e-5);
}

TEST(ContinuousBound, Preconditions) {
  const auto sol = fixed_solution(0.6, {SymMatrix::identity(2)});
  EXPECT_THROW(continuous_bound(sol, 2, 0.05, 2, 1, 2, 0.0), InsufficientSamples);
  const auto two = fixed_solution(0.6, {SymMatrix::identity(2), SymMatrix::identity(2)});
  EXPECT_THROW(continuous_bound(two, 2, 0.05, 100, 1, 2, 0.0), InvalidArgument);
}
