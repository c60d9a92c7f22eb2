#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "censornet/performance_eval.hpp"
#include "censornet/rng.hpp"

using namespace censornet;

namespace {

// Probability of each category under (g, f), straight from the mapping rules.
double crt2_category_prob(const SensorCategory& c, double g, double f) {
  return (c.r_f ? f : 1.0 - f) * (c.r_g ? g : 1.0 - g);
}

EvalOptions eval_opts(std::size_t n, std::uint64_t seed = 1) {
  EvalOptions e;
  e.n_mc_pu = n;
  e.seed = seed;
  return e;
}

}  // namespace

TEST(Combinatorics, Basics) {
  EXPECT_DOUBLE_EQ(factorial(5), 120.0);
  const int c[3] = {2, 1, 2};
  EXPECT_DOUBLE_EQ(multinomial(c), 30.0);
  EXPECT_DOUBLE_EQ(binomial(5, 2), 10.0);
  EXPECT_EQ(compositions(5, 5).size(), 126u);   // C(9, 4)
  EXPECT_EQ(compositions(5, 12).size(), 4368u);  // C(16, 11)
  for (const auto& a : compositions(4, 3)) EXPECT_EQ(a[0] + a[1] + a[2], 4);
}

TEST(Categories, Crt2CoversEveryOutcomeOnce) {
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& c : kCrt2Categories) {
    seen.insert({value(c.interval), c.r_f, c.r_g});
    EXPECT_EQ(c.symbol, map_symbol(c.interval, c.r_g != 0, c.r_f != 0));
  }
  EXPECT_EQ(seen.size(), 12u);
}

TEST(Categories, WeightsSumToOne) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.6);
  const double tau1 = 0.3, tau2 = -0.2, g = 0.35, f = 0.8;
  for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
    const auto tab = rectangle_table(cfg, cfg.rho, tau1, tau2, h);
    double s1 = 0.0;
    for (const auto& a : compositions(5, 5)) {
      const auto cv = CategoryVector::crt1(a);
      s1 += multinomial(a) * tab->at(cv.intervals()) * std::pow(1 - g, a[1]) * std::pow(g, a[2]) *
            std::pow(1 - f, a[3]) * std::pow(f, a[4]);
    }
    EXPECT_NEAR(s1, 1.0, 1e-12);
    double s2 = 0.0;
    for (const auto& a : compositions(5, 12)) {
      const auto cv = CategoryVector::crt2(a);
      double w = multinomial(a) * tab->at(cv.intervals());
      for (std::size_t i = 0; i < a.size(); ++i)
        w *= std::pow(crt2_category_prob(kCrt2Categories[i], g, f), a[i]);
      s2 += w;
    }
    EXPECT_NEAR(s2, 1.0, 1e-12);
  }
}

TEST(Categories, Validation) {
  EXPECT_THROW(CategoryVector::crt1({1, 1, 1}).validate(5), std::invalid_argument);
  EXPECT_THROW(CategoryVector::crt1({1, 1, 1, 1, 0}).validate(5), std::invalid_argument);
  EXPECT_NO_THROW(CategoryVector::crt1({1, 1, 1, 1, 1}).validate(5));
  const auto cv = CategoryVector::crt2({1, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1});
  EXPECT_EQ(cv.intervals(), (IntervalCounts{2, 1, 2}));
  EXPECT_EQ(cv.expand().size(), 5u);
}

TEST(Pu, ExtremeThresholds) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  DesignPoint d{0.3, -0.2, 0.0, 1.0, 1e-300, Scheme::CRT1};
  const auto cat = CategoryVector::crt1({5, 0, 0, 0, 0});
  const auto am = AssumedModel::pure(0.5, 0.3, -0.2);
  EXPECT_EQ(estimate_pu(cfg, d, cat, am, 500, 1).p, 1.0);
  d.t = 1e300;
  EXPECT_EQ(estimate_pu(cfg, d, cat, am, 500, 1).p, 0.0);
  d.t = 1.0;
  const auto a = estimate_pu(cfg, d, cat, am, 4000, 1);
  const auto b = estimate_pu(cfg, d, cat, am, 4000, 2);
  EXPECT_NEAR(a.p, b.p, 3.0 * std::hypot(a.se, b.se));
  EXPECT_GT(a.p, 0.5);  // all sensors report +1
}

TEST(SemiAnalytic, BasisPolynomialReproducesEvaluate) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  for (PuRoute route : {PuRoute::Symbols, PuRoute::Realizations}) {
    const SemiAnalyticModel m(cfg, 0.35, -0.1, route, AssumedModel::pure(0.5, 0.35, -0.1),
                              eval_opts(1500));
    const double t = 3.0;
    const auto pm = m.basis(true, t), pf = m.basis(false, t);
    const auto spm = expand_signed(pm), spf = expand_signed(pf);
    RandomStream rng(7, 1, 0);
    for (int i = 0; i < 50; ++i) {
      const double g = rng.uniform(), f = rng.uniform();
      const auto e = m.evaluate(g, f, t);
      EXPECT_NEAR(pm.eval(g, f), e.pm, 1e-10);
      EXPECT_NEAR(pf.eval(g, f), e.pf, 1e-10);
      EXPECT_NEAR(spm.eval(g, f), e.pm, 1e-9);
      EXPECT_NEAR(spf.eval(g, f), e.pf, 1e-9);
    }
  }
}

TEST(SemiAnalytic, Crt2AtPureCornerEqualsPureCensoring) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const auto am = AssumedModel::pure(0.5, 0.35, -0.1);
  const SemiAnalyticModel sym(cfg, 0.35, -0.1, PuRoute::Symbols, am, eval_opts(3000));
  const SemiAnalyticModel real(cfg, 0.35, -0.1, PuRoute::Realizations, am, eval_opts(3000));
  for (double t : {0.5, 2.0, 10.0}) {
    const auto a = sym.evaluate(0.0, 1.0, t), b = real.evaluate(0.0, 1.0, t);
    EXPECT_NEAR(a.pm, b.pm, 1e-12);
    EXPECT_NEAR(a.pf, b.pf, 1e-12);
  }
}

TEST(SemiAnalytic, ThresholdBisectionContract) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  RandomStream rng(3, 2, 0);
  for (PuRoute route : {PuRoute::Symbols, PuRoute::Realizations}) {
    const SemiAnalyticModel m(cfg, 0.3, -0.15, route, AssumedModel::pure(0.5, 0.3, -0.15),
                              eval_opts(5000));
    for (int i = 0; i < 10; ++i) {
      const double g = rng.uniform(), f = rng.uniform();
      for (double beta : {0.005, 0.01, 0.05}) {
        const double t = m.t_for_pf(g, f, beta);
        const auto e = m.evaluate(g, f, t);
        EXPECT_LE(e.pf, beta + 1e-12);
        EXPECT_LT(std::abs(e.pf - beta), std::max(1e-4, 2.0 * e.pf_se))
            << "g=" << g << " f=" << f << " beta=" << beta;
      }
      const double alpha = 0.2;
      const double tm = m.t_for_pm(g, f, alpha);
      EXPECT_LE(m.evaluate(g, f, tm).pm, alpha + 1e-12);
    }
  }
}

// Semi-analytic and end-to-end simulation share nothing but the fusion rule.
class VersusOracle : public ::testing::TestWithParam<Scheme> {};

TEST_P(VersusOracle, TwentyRandomDesigns) {
  const Scheme scheme = GetParam();
  RandomStream rng(2024, hash_label("designs"), static_cast<std::uint32_t>(scheme));
  for (int i = 0; i < 20; ++i) {
    const double rho = 0.9 * rng.uniform();
    const auto cfg = NetworkConfig::standard(2.0 + 10.0 * rng.uniform(), 10, rho);
    const double tau2 = -0.5 + 0.7 * rng.uniform();
    const double tau1 = tau2 + 0.1 + 0.5 * rng.uniform();
    const double g = scheme == Scheme::PureCensoring ? 0.0 : rng.uniform();
    const double f = scheme == Scheme::PureCensoring ? 1.0 : rng.uniform();
    const double beta = 0.005 + 0.1 * rng.uniform();
    const bool matched = scheme == Scheme::CRT1 && i % 2 == 0;
    const AssumedModel am = matched ? AssumedModel{rho, g, f, tau1, tau2}
                                    : AssumedModel::pure(rho, tau1, tau2);
    const PuRoute route = scheme == Scheme::CRT2 ? PuRoute::Realizations : PuRoute::Symbols;
    const SemiAnalyticModel m(cfg, tau1, tau2, route, am, eval_opts(6000, 100 + i));
    const double t = m.t_for_pf(g, f, beta);
    const auto sa = m.evaluate(g, f, t);

    OracleOptions o;
    o.n_trials = 60000;
    o.seed = 500 + i;
    const auto orc = perf_oracle(cfg, DesignPoint{tau1, tau2, g, f, t, scheme}, am, o);
    const std::string where = "design " + std::to_string(i) + (matched ? " (matched fc)" : "");
    EXPECT_NEAR(sa.pm, orc.pm, 3.0 * std::hypot(sa.pm_se, orc.pm_se)) << where;
    EXPECT_NEAR(sa.pf, orc.pf, 3.0 * std::hypot(sa.pf_se, orc.pf_se)) << where;
    EXPECT_NEAR(sa.pt, orc.pt, 3.0 * orc.pt_se + 1e-12) << where;
  }
}

INSTANTIATE_TEST_SUITE_P(Schemes, VersusOracle,
                         ::testing::Values(Scheme::PureCensoring, Scheme::CRT1, Scheme::CRT2),
                         [](const auto& info) {
                           switch (info.param) {
                             case Scheme::PureCensoring: return std::string("pure");
                             case Scheme::CRT1: return std::string("crt1");
                             default: return std::string("crt2");
                           }
                         });

TEST(Oracle, ReproducibleAcrossWorkerCounts) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const DesignPoint d{0.3, -0.2, 0.4, 0.6, 2.0, Scheme::CRT2};
  OracleOptions o;
  o.n_trials = 20000;
  o.chunk = 1000;
  const int before = workers();
  set_workers(1);
  const auto a = perf_oracle(cfg, d, AssumedModel::pure(0.5, 0.3, -0.2), o);
  set_workers(4);
  const auto b = perf_oracle(cfg, d, AssumedModel::pure(0.5, 0.3, -0.2), o);
  set_workers(before);
  EXPECT_EQ(a.pm, b.pm);
  EXPECT_EQ(a.pf, b.pf);
  EXPECT_EQ(a.pt, b.pt);
}
