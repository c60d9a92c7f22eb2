#include <gtest/gtest.h>

#include <cmath>

#include "censornet/network_model.hpp"
#include "censornet/normal.hpp"

using namespace censornet;

TEST(Normal, KnownValues) {
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-12);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_sf(3.0), 1.3498980316300946e-3, 1e-15);
  for (double p : {1e-10, 0.01, 0.3, 0.5, 0.77, 0.999})
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 * std::max(1.0, p / 1e-3));
}

TEST(NetworkConfig, StandardSetting) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  EXPECT_EQ(cfg.K, 5);
  EXPECT_DOUBLE_EQ(cfg.A, 1.0);
  EXPECT_NEAR(cfg.sigma_v2, 1e-8, 1e-20);  // -50 dBm
  EXPECT_NEAR(cfg.sigma_w2, 0.1, 1e-15);
  EXPECT_NEAR(cfg.snr_h_db(), 5.0, 1e-12);
  EXPECT_NEAR(cfg.snr_c_db(), 10.0, 1e-12);
}

TEST(NetworkConfig, RejectsBadCorrelation) {
  NetworkConfig cfg;
  cfg.rho = 1.0;
  try {
    cfg.validate();
    FAIL() << "rho = 1 accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "rho");
  }
  cfg.rho = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Design, PureNormalizes) {
  DesignPoint d{0.5, -0.1, 0.3, 0.2, 2.0, Scheme::PureCensoring};
  const auto n = d.normalized();
  EXPECT_EQ(n.g, 0.0);
  EXPECT_EQ(n.f, 1.0);
  d.scheme = Scheme::CRT1;
  EXPECT_EQ(d.normalized().g, 0.3);
  d.tau2 = 1.0;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Intervals, ClassifyAndMap) {
  EXPECT_EQ(classify_observation(-1.0, 0.5, -0.5), Interval::Minus);
  EXPECT_EQ(classify_observation(0.0, 0.5, -0.5), Interval::Zero);
  EXPECT_EQ(classify_observation(0.5, 0.5, -0.5), Interval::Zero);
  EXPECT_EQ(classify_observation(0.51, 0.5, -0.5), Interval::Plus);
  for (bool rg : {false, true})
    for (bool rf : {false, true}) {
      EXPECT_EQ(map_symbol(Interval::Plus, rg, rf), 1);
      EXPECT_EQ(map_symbol(Interval::Zero, rg, rf), rg ? -1 : 0);
      EXPECT_EQ(map_symbol(Interval::Minus, rg, rf), rf ? -1 : 0);
    }
}

TEST(Intervals, ProbabilitiesSumToOne) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.3);
  for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
    const auto p = interval_probs(cfg, 0.4, -0.2, h);
    EXPECT_NEAR(p.minus + p.zero + p.plus, 1.0, 1e-14);
    EXPECT_GT(p.zero, 0.0);
  }
  const auto p0 = interval_probs(cfg, 0.4, -0.2, Hypothesis::H0);
  EXPECT_NEAR(p0.plus, normal_sf(0.4 / cfg.sigma_w()), 1e-15);
}

TEST(Rate, PureCensoringRate) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.0);
  const auto p = interval_probs(cfg, 0.3, -0.3, Hypothesis::H0);
  const auto r = rate_probs(cfg, 0.3, -0.3, 0.0, 1.0);
  EXPECT_NEAR(r.pt, p.plus + p.minus, 1e-15);
  EXPECT_NEAR(r.pt + r.pc, 1.0, 1e-15);
  EXPECT_NEAR(rate_probs(cfg, 0.3, -0.3, 1.0, 1.0).pt, 1.0, 1e-15);
  EXPECT_NEAR(rate_probs(cfg, 0.3, -0.3, 0.0, 0.0).pt, p.plus, 1e-15);
  EXPECT_THROW(rate_probs(cfg, 0.3, -0.3, 1.2, 1.0), ConfigError);
}

TEST(Rate, ConstantRateLine) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const double tau1 = 0.35, tau2 = -0.1, p0 = 0.55;
  const auto h0 = interval_probs(cfg, tau1, tau2, Hypothesis::H0);
  const auto range = feasible_f_range(h0, p0);
  ASSERT_TRUE(range.feasible);
  for (int i = 0; i <= 20; ++i) {
    const double f = range.l0p + (range.l1p - range.l0p) * i / 20.0;
    const auto gf = g_of_f(h0, p0, f);
    ASSERT_GE(gf.g, -1e-12);
    ASSERT_LE(gf.g, 1.0 + 1e-12);
    EXPECT_NEAR(rate_probs(cfg, tau1, tau2, std::clamp(gf.g, 0.0, 1.0), f).pt, p0, 1e-12);
    EXPECT_NEAR(gf.dg_df, -h0.minus / h0.zero, 1e-15);
  }
  // the ends of the range put g on a box face
  const double g_lo = g_of_f(h0, p0, range.l0p).g, g_hi = g_of_f(h0, p0, range.l1p).g;
  EXPECT_TRUE(std::abs(g_lo - 1.0) < 1e-12 || std::abs(range.l0p) < 1e-15);
  EXPECT_TRUE(std::abs(g_hi) < 1e-12 || std::abs(range.l1p - 1.0) < 1e-15);
}

TEST(Rate, InfeasibleBudget) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  // rate below P(R1|H0) cannot be reached
  const auto h0 = interval_probs(cfg, 0.1, -0.1, Hypothesis::H0);
  EXPECT_FALSE(feasible_f_range(h0, 0.5 * h0.plus).feasible);
}
