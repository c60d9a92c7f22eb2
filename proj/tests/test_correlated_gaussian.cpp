#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "censornet/correlated_gaussian.hpp"
#include "censornet/performance_eval.hpp"

using namespace censornet;

namespace {

// Trapezoid over the common factor on a wide, fine grid. Slow but independent
// of the quadrature rule under test.
double rectangle_by_trapezoid(const NetworkConfig& cfg, double tau1, double tau2, int nm, int nz,
                              Hypothesis h) {
  const double mean = h == Hypothesis::H1 ? cfg.A : 0.0;
  const double s = cfg.sigma_w(), r = cfg.rho;
  const int np = cfg.K - nm - nz;
  const int n = 8000;
  const double lo = -12.0, hi = 12.0, dz = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = lo + dz * i;
    const double c = mean + s * std::sqrt(r) * z, sd = s * std::sqrt(1.0 - r);
    const double qm = normal_cdf((tau2 - c) / sd);
    const double qp = normal_sf((tau1 - c) / sd);
    const double q0 = std::max(0.0, 1.0 - qm - qp);
    const double w = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    acc += (i == 0 || i == n ? 0.5 : 1.0) * w * std::pow(qm, nm) * std::pow(q0, nz) *
           std::pow(qp, np);
  }
  return acc * dz;
}

double completeness(const NetworkConfig& cfg, double tau1, double tau2, Hypothesis h) {
  // every one of the 3^K ordered assignments, not the compressed sum
  const int K = cfg.K;
  int total = 1;
  for (int k = 0; k < K; ++k) total *= 3;
  std::vector<Interval> a(K);
  double s = 0.0;
  for (int code = 0; code < total; ++code) {
    int c = code;
    for (int k = 0; k < K; ++k, c /= 3) a[k] = static_cast<Interval>(c % 3 - 1);
    s += rectangle_prob(cfg, tau1, tau2, std::span<const Interval>(a), h);
  }
  return s;
}

}  // namespace

class Completeness : public ::testing::TestWithParam<double> {};

TEST_P(Completeness, SumsToOneOverAllAssignments) {
  for (int K : {1, 2, 3, 5}) {
    auto cfg = NetworkConfig::standard(5, 10, GetParam());
    cfg.K = K;
    for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
      EXPECT_NEAR(completeness(cfg, 0.4, -0.25, h), 1.0, 1e-9) << "K=" << K;
      EXPECT_NEAR(completeness(cfg, 0.1, -0.6, h), 1.0, 1e-9) << "K=" << K;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Rho, Completeness, ::testing::Values(0.0, 0.1, 0.5, 0.9, 0.99));

TEST(Rectangle, MatchesIndependentIntegration) {
  for (double rho : {0.0, 0.3, 0.7, 0.95}) {
    const auto cfg = NetworkConfig::standard(5, 10, rho);
    for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
      const auto tab = rectangle_table(cfg, rho, 0.45, -0.2, h);
      for (int nm = 0; nm <= 5; ++nm)
        for (int nz = 0; nm + nz <= 5; ++nz)
          EXPECT_NEAR(tab->at(nm, nz), rectangle_by_trapezoid(cfg, 0.45, -0.2, nm, nz, h), 1e-11)
              << "rho=" << rho << " nm=" << nm << " nz=" << nz;
    }
  }
}

TEST(Rectangle, BivariateOrthant) {
  // P(X < 0, Y < 0) = 1/4 + asin(rho) / (2 pi) = 1/3 at rho = 1/2
  auto cfg = NetworkConfig::standard(5, 10, 0.5);
  cfg.K = 2;
  const auto tab = rectangle_table(cfg, 0.5, 0.0, 0.0, Hypothesis::H0);
  EXPECT_NEAR(tab->at(2, 0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(tab->at(0, 0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(tab->at(1, 0), 1.0 / 6.0, 1e-12);
}

TEST(Rectangle, TrivariateOrthant) {
  for (double rho : {0.2, 0.6}) {
    auto cfg = NetworkConfig::standard(5, 10, rho);
    cfg.K = 3;
    const auto tab = rectangle_table(cfg, rho, 0.0, 0.0, Hypothesis::H0);
    EXPECT_NEAR(tab->at(3, 0), 0.125 + 3.0 * std::asin(rho) / (4.0 * std::numbers::pi), 1e-12);
  }
}

TEST(Rectangle, IndependentCaseIsProduct) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.0);
  const auto p = interval_probs(cfg, 0.3, -0.4, Hypothesis::H1);
  const auto tab = rectangle_table(cfg, 0.0, 0.3, -0.4, Hypothesis::H1);
  for (int nm = 0; nm <= 5; ++nm)
    for (int nz = 0; nm + nz <= 5; ++nz)
      EXPECT_NEAR(tab->at(nm, nz),
                  std::pow(p.minus, nm) * std::pow(p.zero, nz) * std::pow(p.plus, 5 - nm - nz),
                  1e-15);
}

TEST(Rectangle, SingleSensorMarginal) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.8);
  const auto tab = rectangle_table(cfg, 0.8, 0.3, -0.4, Hypothesis::H0);
  const auto p = interval_probs(cfg, 0.3, -0.4, Hypothesis::H0);
  // marginalise four sensors out of the compressed table
  double minus = 0.0;
  for (int nm = 1; nm <= 5; ++nm)
    for (int nz = 0; nm + nz <= 5; ++nz) {
      const int c[3] = {nm - 1, nz, 5 - nm - nz};
      minus += multinomial(c) * tab->at(nm, nz);
    }
  EXPECT_NEAR(minus, p.minus, 1e-12);
}

TEST(Rectangle, MonteCarloAgreement) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.6);
  const double tau1 = 0.35, tau2 = -0.15;
  const std::size_t n = 200000;
  for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
    const auto xs = sample_observations(cfg, h, n, 11);
    std::vector<double> hits(36, 0.0);
    for (const auto& x : xs) {
      int nm = 0, nz = 0;
      for (double v : x) {
        const auto d = classify_observation(v, tau1, tau2);
        nm += d == Interval::Minus;
        nz += d == Interval::Zero;
      }
      hits[nm * 6 + nz] += 1.0;
    }
    const auto tab = rectangle_table(cfg, cfg.rho, tau1, tau2, h);
    for (int nm = 0; nm <= 5; ++nm)
      for (int nz = 0; nm + nz <= 5; ++nz) {
        const int c[3] = {nm, nz, 5 - nm - nz};
        const double p = multinomial(c) * tab->at(nm, nz);
        const double se = std::sqrt(p * (1.0 - p) / n);
        EXPECT_NEAR(hits[nm * 6 + nz] / n, p, 3.0 * se + 1e-12) << "nm=" << nm << " nz=" << nz;
      }
  }
}

TEST(Rectangle, SamplesAreReproducible) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.4);
  const auto a = sample_observations(cfg, Hypothesis::H1, 50, 3);
  const auto b = sample_observations(cfg, Hypothesis::H1, 50, 3);
  const auto c = sample_observations(cfg, Hypothesis::H1, 50, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Rectangle, RejectsBadInput) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.4);
  EXPECT_THROW(rectangle_table(cfg, 0.4, -0.1, 0.1, Hypothesis::H0), ConfigError);
  EXPECT_THROW(rectangle_table(cfg, 1.0, 0.1, -0.1, Hypothesis::H0), ConfigError);
  EXPECT_THROW(rectangle_prob(cfg, 0.1, -0.1, IntervalCounts{1, 1, 1}, Hypothesis::H0),
               std::invalid_argument);
}
