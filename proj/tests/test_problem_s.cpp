#include <gtest/gtest.h>

#include <cmath>

#include "censornet/problem_s.hpp"
#include "censornet/rng.hpp"

using namespace censornet;

namespace {

SolverOptions quick() {
  SolverOptions o;
  o.eval.n_mc_pu = 3000;
  o.n_mc_coarse = 500;
  o.tau_grid = 41;
  o.f_grid = 11;
  o.golden_iters = 12;
  return o;
}

struct Fixture {
  NetworkConfig cfg = NetworkConfig::standard(5, 10, 0.5);
  double tau1 = 0.45, tau2 = -0.05;
  SemiAnalyticModel model;
  Fixture(PuRoute route)
      : model(cfg, tau1, tau2, route, AssumedModel::pure(0.5, tau1, tau2), quick().eval) {}
};

}  // namespace

TEST(SIni, DominatingPosynomialBoundsThePolynomial) {
  for (PuRoute route : {PuRoute::Realizations, PuRoute::Symbols}) {
    Fixture fx(route);
    const double t = fx.model.t_for_pf(0.3, 0.7, 0.01);
    RandomStream rng(5, hash_label("dominance"), 0);
    for (bool miss : {true, false}) {
      const BasisPolynomial p = fx.model.basis(miss, t);
      const Posynomial d = dominating_posynomial(p);
      for (int i = 0; i < 1000; ++i) {
        const double g = 1e-3 + (1.0 - 1e-3) * rng.uniform(), f = 1e-3 + (1.0 - 1e-3) * rng.uniform();
        EXPECT_GE(eval(d, g, f), p.eval(g, f) * (1.0 - 1e-12)) << "g=" << g << " f=" << f;
      }
    }
  }
}

TEST(SIni, StartingPointIsTrulyFeasible) {
  Fixture fx(PuRoute::Realizations);
  const IntervalProbs h0 = interval_probs(fx.cfg, fx.tau1, fx.tau2, Hypothesis::H0);
  for (double alpha : {0.2, 0.4}) {
    const double t = fx.model.t_for_pf(1.0, 1.0, 0.01);
    const auto pm = fx.model.basis(true, t), pf = fx.model.basis(false, t);
    const SIniResult r = solve_s_ini(pm, pf, alpha, 0.05, detail::rate_objective(h0), 1e-3);
    if (r.fallback) {
      EXPECT_FALSE(r.gp.feasible);
      continue;
    }
    EXPECT_LE(pm.eval(r.g, r.f), alpha * (1 + 1e-9));
    EXPECT_LE(pf.eval(r.g, r.f), 0.05 * (1 + 1e-9));
  }
  // an impossible miss cap falls back to the near-pure corner
  const auto pm = fx.model.basis(true, 1.0), pf = fx.model.basis(false, 1.0);
  const SIniResult r = solve_s_ini(pm, pf, 1e-9, 1e-9, detail::rate_objective(h0), 1e-3);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.g, 1e-3);
  EXPECT_EQ(r.f, 1.0 - 1e-3);
}

TEST(Chain, CondensedFeasibleImpliesPolynomialFeasible) {
  Fixture fx(PuRoute::Realizations);
  const double t = fx.model.t_for_pf(0.4, 0.6, 0.01);
  const auto co = extract_signed_coeffs(fx.model, t);
  const Posynomial pm1 = to_posynomial(co.pm, false), pm2 = to_posynomial(co.pm, true);
  const Posynomial pf1 = to_posynomial(co.pf, false), pf2 = to_posynomial(co.pf, true);
  const double alpha = 0.25, beta = 0.02;
  RandomStream rng(8, hash_label("chain"), 0);
  int inside = 0;
  for (int i = 0; i < 1000; ++i) {
    const double g0 = 0.05 + 0.9 * rng.uniform(), f0 = 0.05 + 0.9 * rng.uniform();
    CondensedConstraint cm = condense_agm(detail::with_constant(pm2, alpha), g0, f0);
    cm.numerator = pm1;
    CondensedConstraint cf = condense_agm(detail::with_constant(pf2, beta), g0, f0);
    cf.numerator = pf1;
    const double g = std::clamp(g0 + 0.2 * (rng.uniform() - 0.5), 1e-3, 1.0);
    const double f = std::clamp(f0 + 0.2 * (rng.uniform() - 0.5), 1e-3, 1.0);
    const ChainReport r = verify_feasibility_chain(cm, pm2, cf, pf2, g, f, alpha, beta);
    if (r.condensed_m >= 0 && r.condensed_f >= 0) {
      ++inside;
      EXPECT_TRUE(r.ok);
      EXPECT_GE(r.ratio_m, -1e-12);
      EXPECT_GE(r.direct_m, -1e-12);
      EXPECT_GE(r.direct_f, -1e-12);
      EXPECT_LE(co.pm.eval(g, f), alpha + 1e-9);
    } else {
      EXPECT_FALSE(r.ok);  // negative control: a violated GP constraint is flagged
    }
  }
  EXPECT_GT(inside, 0);
}

TEST(Chain, NegativeControlFlagsABrokenLink) {
  Fixture fx(PuRoute::Realizations);
  const double t = fx.model.t_for_pf(0.4, 0.6, 0.01);
  const auto co = extract_signed_coeffs(fx.model, t);
  const Posynomial pm1 = to_posynomial(co.pm, false), pm2 = to_posynomial(co.pm, true);
  const Posynomial pf1 = to_posynomial(co.pf, false), pf2 = to_posynomial(co.pf, true);
  // a miss cap below the actual P_M at the point, so the direct link must fail
  const double alpha = 0.8 * fx.model.evaluate(0.4, 0.6, t).pm;
  CondensedConstraint cm = condense_agm(detail::with_constant(pm2, alpha), 0.4, 0.6);
  cm.numerator = pm1;
  CondensedConstraint cf = condense_agm(detail::with_constant(pf2, 0.02), 0.4, 0.6);
  cf.numerator = pf1;
  // inflating the condensed denominator breaks the AGM bound
  cm.denominator.c *= 100.0;
  const ChainReport r = verify_feasibility_chain(cm, pm2, cf, pf2, 0.4, 0.6, alpha, 0.02);
  EXPECT_GE(r.condensed_m, 0.0);
  EXPECT_LT(r.direct_m, 0.0);
  EXPECT_FALSE(r.ok);
}

TEST(PureS, MeetsCapsAtSmallestRate) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const PureSSolution s = solve_pure_censoring_S(cfg, 0.1, 0.01, quick());
  ASSERT_EQ(s.status, SolveStatus::Ok);
  EXPECT_LE(s.perf.pm, 0.1);
  EXPECT_LT(std::abs(s.perf.pf - 0.01), std::max(1e-4, 2.0 * s.perf.pf_se));
  EXPECT_GT(s.perf.pt, 0.0);
  EXPECT_LE(s.perf.pt, 1.0);
  // looser caps cannot need more transmissions
  const PureSSolution loose = solve_pure_censoring_S(cfg, 0.3, 0.01, quick());
  EXPECT_LE(loose.perf.pt, s.perf.pt + 1e-9);
}

TEST(PureS, UnreachableCapIsInfeasible) {
  const auto cfg = NetworkConfig::standard(0, 0, 0.5);
  const PureSSolution s = solve_pure_censoring_S(cfg, 1e-4, 1e-4, quick());
  EXPECT_EQ(s.status, SolveStatus::Infeasible);
}

class CrtS : public ::testing::TestWithParam<std::pair<Scheme, CrtVariant>> {};

TEST_P(CrtS, FeasibleIteratesAndNoWorseThanPure) {
  const auto [scheme, variant] = GetParam();
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const auto opts = quick();
  const PureSSolution pure = solve_pure_censoring_S(cfg, 0.1, 0.01, opts);
  ASSERT_EQ(pure.status, SolveStatus::Ok);
  ProblemSSpec spec;
  spec.scheme = scheme;
  spec.variant = variant;
  const SSolution s = solve_crt_S(cfg, spec, pure.tau1, pure.tau2, pure.t, opts);
  ASSERT_NE(s.status, SolveStatus::Infeasible);
  for (const auto& it : s.trace) EXPECT_TRUE(it.chain_ok) << "outer " << it.outer << " inner " << it.inner;
  EXPECT_GE(s.g, 0.0);
  EXPECT_LE(s.f, 1.0);
  const double tol = 3.0 * s.perf.pm_se + 1e-9;
  EXPECT_LE(s.perf.pm, 0.1 + tol);
  EXPECT_LE(s.perf.pf, 0.01 + std::max(1e-4, 2.0 * s.perf.pf_se));
  EXPECT_LE(s.perf.pt, pure.perf.pt + 0.02);
}

INSTANTIATE_TEST_SUITE_P(
    Variants, CrtS,
    ::testing::Values(std::make_pair(Scheme::CRT2, CrtVariant::MismatchedFC),
                      std::make_pair(Scheme::CRT1, CrtVariant::MismatchedFC)));

TEST(SpecS, Validation) {
  ProblemSSpec s;
  s.alpha = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.alpha = 0.1;
  s.epsilon_box = 0.5;
  EXPECT_THROW(s.validate(), ConfigError);
}
