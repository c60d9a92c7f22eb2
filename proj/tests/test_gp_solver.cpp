#include <gtest/gtest.h>

#include <cmath>

#include "censornet/gp_solver.hpp"
#include "censornet/rng.hpp"

using namespace censornet;

namespace {

Posynomial random_posynomial(RandomStream& rng, int terms, bool integer_exps) {
  Posynomial p;
  for (int i = 0; i < terms; ++i) {
    double ag = 6.0 * rng.uniform() - 3.0, af = 6.0 * rng.uniform() - 3.0;
    if (integer_exps) {
      ag = std::round(ag);
      af = std::round(af);
    }
    p.push_back({0.05 + 2.0 * rng.uniform(), ag, af});
  }
  return p;
}

double max_violation(const std::vector<Posynomial>& cons, double g, double f) {
  double v = 0.0;
  for (const auto& c : cons) v = std::max(v, eval(c, g, f) - 1.0);
  return v;
}

}  // namespace

TEST(Condensation, MonomialBoundsPosynomial) {
  RandomStream rng(1, hash_label("agm"), 0);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Posynomial den = random_posynomial(rng, 2 + trial % 5, trial % 2 == 0);
    const double g0 = 0.01 + 0.99 * rng.uniform(), f0 = 0.01 + 0.99 * rng.uniform();
    const auto cc = condense_agm(den, g0, f0);
    EXPECT_NEAR(cc.denominator.eval(g0, f0) / eval(den, g0, f0), 1.0, 1e-10);
    double wsum = 0.0;
    for (double w : cc.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    for (int i = 0; i < 100; ++i, ++checked) {
      const double g = 1e-3 + rng.uniform(), f = 1e-3 + rng.uniform();
      EXPECT_LE(cc.denominator.eval(g, f), eval(den, g, f) * (1.0 + 1e-12));
    }
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Condensation, SingleTermIsExact) {
  const Posynomial one{{0.7, 2.0, -1.0}};
  const auto cc = condense_agm(one, 0.3, 0.6);
  for (double g : {0.1, 0.5, 0.9})
    for (double f : {0.2, 0.8}) EXPECT_NEAR(cc.denominator.eval(g, f), eval(one, g, f), 1e-12);
  EXPECT_THROW(condense_agm(one, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(condense_agm({}, 0.5, 0.5), std::invalid_argument);
}

TEST(Posynomials, SignedSplitRoundTrip) {
  SignedBivariatePolynomial p(2);
  p.pos[0 * 3 + 1] = 0.5;  // g
  p.neg[1 * 3 + 0] = 0.2;  // f
  p.pos[2 * 3 + 2] = 1.5;  // f^2 g^2
  const auto pp = to_posynomial(p, false), pn = to_posynomial(p, true);
  EXPECT_EQ(pp.size(), 2u);
  EXPECT_EQ(pn.size(), 1u);
  for (double g : {0.1, 0.7})
    for (double f : {0.3, 1.0}) EXPECT_NEAR(eval(pp, g, f) - eval(pn, g, f), p.eval(g, f), 1e-14);
  const auto d = divide(pp, {2.0, 1.0, 0.0});
  EXPECT_NEAR(eval(d, 0.4, 0.5), eval(pp, 0.4, 0.5) / (2.0 * 0.4), 1e-14);
}

TEST(GP, SingleActiveMonomial) {
  // min f  s.t.  0.25 / f <= 1
  const auto r = solve_gp_2var({{1.0, 0.0, 1.0}}, {{{0.25, 0.0, -1.0}}}, 1e-4);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.f, 0.25, 1e-6);
}

TEST(GP, SlackConstraintsGoToTheBox) {
  const auto r = solve_gp_2var({{1.0, 1.0, 0.0}, {2.0, 0.0, 1.0}}, {{{0.1, 0.0, 0.0}}}, 1e-3);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.g, 1e-3, 1e-6);
  EXPECT_NEAR(r.f, 1e-3, 1e-6);
}

TEST(GP, DetectsInfeasibility) {
  EXPECT_FALSE(solve_gp_2var({{1.0, 1.0, 0.0}}, {{{2.0, 0.0, 0.0}}}, 1e-3).feasible);
  EXPECT_FALSE(solve_gp_2var({{1.0, 1.0, 0.0}}, {{{2.0, -1.0, 0.0}}}, 1e-3).feasible);
  EXPECT_THROW(solve_gp_2var({}, {}, 1e-3), std::invalid_argument);
}

// Random two-constraint GPs against exhaustive search on a 400 x 400 log grid.
TEST(GP, MatchesGridSearch) {
  RandomStream rng(9, hash_label("gp-grid"), 0);
  const double eps = 1e-3;
  const int n = 400;
  for (int trial = 0; trial < 12; ++trial) {
    const Posynomial obj{{0.1 + rng.uniform(), 1.0, 0.0}, {0.1 + rng.uniform(), 0.0, 1.0}};
    Posynomial c1{{0.05 * rng.uniform(), -1.0, 0.0}, {0.05 * rng.uniform(), -0.5, -1.0}};
    Posynomial c2{{0.1 * rng.uniform(), 0.0, -2.0}, {0.3 * rng.uniform(), 1.0, -1.0}};
    const std::vector<Posynomial> cons{c1, c2};
    const auto r = solve_gp_2var(obj, cons, eps);
    ASSERT_TRUE(r.feasible) << "trial " << trial;
    EXPECT_LE(max_violation(cons, r.g, r.f), 1e-7);
    EXPECT_GE(r.g, eps * (1 - 1e-9));
    EXPECT_LE(r.f, 1.0 + 1e-12);

    double best = kInf;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double g = std::exp(std::log(eps) * (1.0 - i / (n - 1.0)));
        const double f = std::exp(std::log(eps) * (1.0 - j / (n - 1.0)));
        if (max_violation(cons, g, f) <= 0.0) best = std::min(best, eval(obj, g, f));
      }
    ASSERT_LT(best, kInf);
    // The grid can only be worse; one log-grid step bounds how much.
    EXPECT_LE(eval(obj, r.g, r.f), best * (1.0 + 1e-7)) << "trial " << trial;
    EXPECT_GE(eval(obj, r.g, r.f), best * std::exp(std::log(eps) / (n - 1.0)) * 0.999)
        << "trial " << trial;
    EXPECT_NEAR(r.objective, eval(obj, r.g, r.f), 1e-9 * std::max(1.0, r.objective));
  }
}

TEST(GP, StartPointDoesNotChangeTheOptimum) {
  const Posynomial obj{{1.0, 1.0, 0.0}, {0.5, 0.0, 1.0}};
  const std::vector<Posynomial> cons{{{0.02, -1.0, 0.0}, {0.03, 0.0, -1.0}}};
  const auto a = solve_gp_2var(obj, cons, 1e-3);
  const auto b = solve_gp_2var(obj, cons, 1e-3, std::make_pair(0.9, 0.9));
  ASSERT_TRUE(a.feasible && b.feasible);
  EXPECT_NEAR(a.objective, b.objective, 1e-7);
}
