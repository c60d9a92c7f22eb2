#include <gtest/gtest.h>

#include <cmath>

#include "censornet/fusion_rules.hpp"
#include "censornet/rng.hpp"

using namespace censornet;

namespace {

struct Draw {
  std::vector<cplx> h, y;
  std::vector<std::uint8_t> rf, rg;
};

// Received signals for a random interval assignment, so that all symbol
// hypotheses get exercised.
Draw random_draw(const NetworkConfig& cfg, std::uint64_t seed, std::uint32_t i) {
  RandomStream rng(seed, hash_label("fusion-test"), i);
  Draw d;
  const double sh = std::sqrt(cfg.sigma_h2 / 2), sv = std::sqrt(cfg.sigma_v2 / 2);
  for (int k = 0; k < cfg.K; ++k) {
    const cplx h(sh * rng.normal(), sh * rng.normal());
    const int u = static_cast<int>(rng.uniform() * 3.0) - 1;
    d.h.push_back(h);
    d.y.push_back(static_cast<double>(u) * h + cplx(sv * rng.normal(), sv * rng.normal()));
    d.rf.push_back(rng.bernoulli(0.5));
    d.rg.push_back(rng.bernoulli(0.5));
  }
  return d;
}

// Sum over every ordered interval assignment with per-sensor densities phi.
template <class Phi>
double literal_lr(const NetworkConfig& cfg, double rho_fc, double tau1, double tau2, Phi phi) {
  NetworkConfig c = cfg;
  c.rho = rho_fc;
  int total = 1;
  for (int k = 0; k < cfg.K; ++k) total *= 3;
  std::vector<Interval> a(cfg.K);
  double num = 0.0, den = 0.0;
  for (int code = 0; code < total; ++code) {
    int x = code;
    for (int k = 0; k < cfg.K; ++k, x /= 3) a[k] = static_cast<Interval>(x % 3 - 1);
    double prod = 1.0;
    for (int k = 0; k < cfg.K; ++k) prod *= phi(k, a[k]);
    num += rectangle_prob(c, tau1, tau2, std::span<const Interval>(a), Hypothesis::H1) * prod;
    den += rectangle_prob(c, tau1, tau2, std::span<const Interval>(a), Hypothesis::H0) * prod;
  }
  return num / den;
}

}  // namespace

TEST(SymbolLikelihood, RatiosMatchDensities) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.0);
  const cplx h(1.3e-4, -0.7e-4), y(0.9e-4, 0.2e-4);
  const auto l = symbol_log_ratios(y, h, cfg.sigma_v2);
  const double f0 = symbol_likelihood(y, 0, h, cfg.sigma_v2);
  EXPECT_NEAR(l[0], std::log(symbol_likelihood(y, -1, h, cfg.sigma_v2) / f0), 1e-10);
  EXPECT_NEAR(l[2], std::log(symbol_likelihood(y, 1, h, cfg.sigma_v2) / f0), 1e-10);
  EXPECT_EQ(l[1], 0.0);
}

class LiteralCrt1 : public ::testing::TestWithParam<int> {};

TEST_P(LiteralCrt1, CollapsedEqualsLiteralSum) {
  const int K = GetParam();
  for (double rho : {0.0, 0.5, 0.9}) {
    auto cfg = NetworkConfig::standard(5, 10, rho);
    cfg.K = K;
    const double tau1 = 0.4, tau2 = -0.15, g = 0.3, f = 0.65;
    const AssumedModel am{rho, g, f, tau1, tau2};
    const FusionModel fc(cfg, am);
    for (std::uint32_t i = 0; i < 25; ++i) {
      const Draw d = random_draw(cfg, 5, i);
      auto dens = [&](int k, int u) { return symbol_likelihood(d.y[k], u, d.h[k], cfg.sigma_v2); };
      const double lit = literal_lr(cfg, rho, tau1, tau2, [&](int k, Interval a) {
        switch (a) {
          case Interval::Plus: return dens(k, 1);
          case Interval::Zero: return (1 - g) * dens(k, 0) + g * dens(k, -1);
          case Interval::Minus: return (1 - f) * dens(k, 0) + f * dens(k, -1);
        }
        return 0.0;
      });
      const double lr = std::exp(fc.log_lr_crt1(d.y, d.h));
      EXPECT_NEAR(lr / lit, 1.0, 1e-10) << "K=" << K << " rho=" << rho << " draw " << i;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(K, LiteralCrt1, ::testing::Values(1, 2, 3));

class LiteralCrt2 : public ::testing::TestWithParam<int> {};

TEST_P(LiteralCrt2, KnownRealizationsEqualLiteralSum) {
  const int K = GetParam();
  for (double rho : {0.0, 0.3, 0.8}) {
    auto cfg = NetworkConfig::standard(10, 10, rho);
    cfg.K = K;
    const double tau1 = 0.2, tau2 = -0.3;
    const FusionModel fc(cfg, AssumedModel::pure(rho, tau1, tau2));
    for (std::uint32_t i = 0; i < 40; ++i) {
      const Draw d = random_draw(cfg, 9, i);
      const double lit = literal_lr(cfg, rho, tau1, tau2, [&](int k, Interval a) {
        const int u = map_symbol(a, d.rg[k] != 0, d.rf[k] != 0);
        return symbol_likelihood(d.y[k], u, d.h[k], cfg.sigma_v2);
      });
      const double lr = std::exp(fc.log_lr_crt2(d.y, d.h, d.rf, d.rg));
      EXPECT_NEAR(lr / lit, 1.0, 1e-10) << "K=" << K << " rho=" << rho << " draw " << i;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(K, LiteralCrt2, ::testing::Values(1, 2));

TEST(Fusion, PureCensoringIsASpecialCase) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const double tau1 = 0.4, tau2 = -0.2;
  const AssumedModel pure = AssumedModel::pure(0.5, tau1, tau2);
  const FusionModel fc(cfg, pure);
  const std::vector<std::uint8_t> ones(5, 1), zeros(5, 0);
  for (std::uint32_t i = 0; i < 20; ++i) {
    const Draw d = random_draw(cfg, 2, i);
    const ChannelRealization real{d.h, d.y};
    const double a = std::log(lr_pure_censoring(real, cfg, AssumedModel{0.5, 0.7, 0.2, tau1, tau2}));
    EXPECT_NEAR(a, fc.log_lr_crt1(d.y, d.h), 1e-12);
    EXPECT_NEAR(a, fc.log_lr_crt2(d.y, d.h, ones, zeros), 1e-12);
    EXPECT_NEAR(a, std::log(lr_crt1(real, cfg, pure)), 1e-12);
  }
}

TEST(Fusion, NoSignalMeansUnitRatio) {
  auto cfg = NetworkConfig::standard(5, 10, 0.5);
  cfg.A = 0.0;
  const FusionModel fc(cfg, AssumedModel{0.5, 0.2, 0.6, 0.3, -0.3});
  for (std::uint32_t i = 0; i < 10; ++i) {
    const Draw d = random_draw(cfg, 4, i);
    EXPECT_NEAR(fc.log_lr_crt1(d.y, d.h), 0.0, 1e-12);
    EXPECT_NEAR(fc.log_lr_crt2(d.y, d.h, d.rf, d.rg), 0.0, 1e-12);
  }
}

TEST(Fusion, ExtremeSignalsStayFinite) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const FusionModel fc(cfg, AssumedModel::pure(0.5, 0.4, -0.2));
  const Draw d = random_draw(cfg, 1, 0);
  std::vector<cplx> y = d.y;
  for (auto& v : y) v *= 1e3;  // drives every linear-domain term to under/overflow
  const double l = fc.log_lr_crt1(y, d.h);
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_GT(lr_from_log(1e6), 0.0);
  EXPECT_EQ(fuse(lr_from_log(1e6), 1e10), 1);
  EXPECT_EQ(fuse(lr_from_log(-1e6), 1e-10), 0);
}

TEST(Fusion, RejectsWrongSizes) {
  const auto cfg = NetworkConfig::standard(5, 10, 0.5);
  const FusionModel fc(cfg, AssumedModel::pure(0.5, 0.4, -0.2));
  const std::vector<cplx> short_y(3);
  EXPECT_THROW(fc.log_lr_crt1(short_y, short_y), std::invalid_argument);
  EXPECT_THROW((AssumedModel{0.5, 1.5, 1.0, 0.4, -0.2}.validate()), ConfigError);
}
