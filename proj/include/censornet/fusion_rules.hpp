#pragma once

// Likelihood-ratio fusion at the FC.
//
// Every scheme's LR has the form
//   sum_i P_x1(counts(i)) prod_k phi_k(i_k)  /  sum_i P_x0(counts(i)) prod_k phi_k(i_k)
// where i runs over the 3^K interval assignments and phi_k(i) is the density
// of y_k given that sensor k's observation fell in interval i. Because P_x only
// depends on the interval counts, the inner sum collapses to a dynamic program
// over (n_minus, n_zero) states, O(K^3) per evaluation.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "censornet/correlated_gaussian.hpp"
#include "censornet/network_model.hpp"

namespace censornet {

using cplx = std::complex<double>;

/// What the FC believes when it builds its test.
struct AssumedModel {
  double rho_fc = 0.0;
  double g_fc = 0.0;
  double f_fc = 1.0;
  double tau1 = 0.0;
  double tau2 = 0.0;

  /// The FC knows the true model.
  static AssumedModel matched(const NetworkConfig& cfg, const DesignPoint& d) {
    const DesignPoint n = d.normalized();
    return {cfg.rho, n.g, n.f, n.tau1, n.tau2};
  }
  /// The FC fuses as if the sensors used pure censoring.
  static AssumedModel pure(double rho_fc, double tau1, double tau2) {
    return {rho_fc, 0.0, 1.0, tau1, tau2};
  }

  void validate() const {
    if (!(rho_fc >= 0.0 && rho_fc < 1.0)) throw ConfigError("rho_fc", "must lie in [0, 1)");
    if (!(g_fc >= 0.0 && g_fc <= 1.0)) throw ConfigError("g_fc", "must lie in [0, 1]");
    if (!(f_fc >= 0.0 && f_fc <= 1.0)) throw ConfigError("f_fc", "must lie in [0, 1]");
    if (!(tau2 <= tau1)) throw ConfigError("tau2", "lower threshold must not exceed tau1");
  }
};

struct ChannelRealization {
  std::vector<cplx> h;
  std::vector<cplx> y;
};

/// Circular complex Gaussian density of y with mean u*h and variance sigma_v2.
inline double symbol_likelihood(cplx y, int u, cplx h, double sigma_v2) {
  const double d2 = std::norm(y - static_cast<double>(u) * h);
  return std::exp(-d2 / sigma_v2) / (std::numbers::pi * sigma_v2);
}

/// Log of f(y|u,h) / f(y|u=0,h) for u = -1, 0, +1 (indexed u + 1).
inline std::array<double, 3> symbol_log_ratios(cplx y, cplx h, double sigma_v2) noexcept {
  const double s = 2.0 * (y.real() * h.real() + y.imag() * h.imag()) / sigma_v2;
  const double e = std::norm(h) / sigma_v2;
  return {-s - e, 0.0, s - e};
}

inline constexpr double kLrSentinel = 1e300;

inline double lr_from_log(double log_lr) noexcept {
  if (log_lr >= std::log(kLrSentinel)) return kLrSentinel;
  if (log_lr <= -std::log(kLrSentinel)) return 1.0 / kLrSentinel;
  return std::exp(log_lr);
}

/// u0 = 1 iff lr > t.
inline int fuse(double lr, double t) noexcept { return lr > t ? 1 : 0; }

namespace detail {

// log((1-p) + p*exp(l)) without cancelling or taking log(0).
inline double log_mix(double p, double l) noexcept {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return l;
  const double a = std::log1p(-p);
  const double b = std::log(p) + l;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace detail

/// FC-side model: the rectangle tables the FC uses (at its assumed rho) plus
/// its beliefs about g and f.
class FusionModel {
 public:
  FusionModel(const NetworkConfig& cfg, const AssumedModel& assumed,
              const QuadratureOptions& quad = {})
      : K_(cfg.K), sigma_v2_(cfg.sigma_v2), assumed_(assumed) {
    cfg.validate();
    assumed.validate();
    p1_ = rectangle_table(cfg, assumed.rho_fc, assumed.tau1, assumed.tau2, Hypothesis::H1, quad);
    p0_ = rectangle_table(cfg, assumed.rho_fc, assumed.tau1, assumed.tau2, Hypothesis::H0, quad);
  }

  int K() const noexcept { return K_; }
  double sigma_v2() const noexcept { return sigma_v2_; }
  const AssumedModel& assumed() const noexcept { return assumed_; }
  const RectangleTable& table(Hypothesis h) const noexcept {
    return h == Hypothesis::H1 ? *p1_ : *p0_;
  }

  /// Log-LR given per-sensor log phi_k(i), i = -1, 0, +1 (indexed i + 1).
  double log_lr_from_phi(std::span<const std::array<double, 3>> log_phi) const {
    if (static_cast<int>(log_phi.size()) != K_)
      throw std::invalid_argument("log_lr_from_phi: need one entry per sensor");
    const int stride = K_ + 1;
    thread_local std::vector<double> E;
    E.assign(static_cast<std::size_t>(stride * stride), 0.0);
    E[0] = 1.0;
    for (const auto& lp : log_phi) {
      const double top = std::max({lp[0], lp[1], lp[2]});
      const double fm = std::exp(lp[0] - top), f0 = std::exp(lp[1] - top),
                   fp = std::exp(lp[2] - top);
      for (int m = K_; m >= 0; --m)
        for (int z = K_ - m; z >= 0; --z) {
          double v = E[m * stride + z] * fp;
          if (m > 0) v += E[(m - 1) * stride + z] * fm;
          if (z > 0) v += E[m * stride + z - 1] * f0;
          E[m * stride + z] = v;
        }
    }
    double num = 0.0, den = 0.0;
    for (int m = 0; m <= K_; ++m)
      for (int z = 0; m + z <= K_; ++z) {
        num += E[m * stride + z] * p1_->at(m, z);
        den += E[m * stride + z] * p0_->at(m, z);
      }
    if (num > 1e-280 && den > 1e-280) return std::log(num) - std::log(den);
    return log_lr_log_domain(log_phi);
  }

  /// Pure censoring / CRT-I: the FC mixes over the unknown Bernoulli draws
  /// using its assumed g_fc and f_fc.
  double log_lr_crt1(std::span<const cplx> y, std::span<const cplx> h) const {
    check_sizes(y, h);
    thread_local std::vector<std::array<double, 3>> phi;
    phi.resize(static_cast<std::size_t>(K_));
    for (int k = 0; k < K_; ++k) {
      const auto l = symbol_log_ratios(y[k], h[k], sigma_v2_);
      phi[k] = {detail::log_mix(assumed_.f_fc, l[0]), detail::log_mix(assumed_.g_fc, l[0]), l[2]};
    }
    return log_lr_from_phi(phi);
  }

  /// CRT-II: the FC knows every sensor's realizations, so each interval maps
  /// to one known symbol.
  double log_lr_crt2(std::span<const cplx> y, std::span<const cplx> h,
                     std::span<const std::uint8_t> r_f, std::span<const std::uint8_t> r_g) const {
    check_sizes(y, h);
    if (static_cast<int>(r_f.size()) != K_ || static_cast<int>(r_g.size()) != K_)
      throw std::invalid_argument("log_lr_crt2: realization vectors must have length K");
    thread_local std::vector<std::array<double, 3>> phi;
    phi.resize(static_cast<std::size_t>(K_));
    for (int k = 0; k < K_; ++k) {
      const auto l = symbol_log_ratios(y[k], h[k], sigma_v2_);
      phi[k] = {l[map_symbol(Interval::Minus, r_g[k] != 0, r_f[k] != 0) + 1],
                l[map_symbol(Interval::Zero, r_g[k] != 0, r_f[k] != 0) + 1], l[2]};
    }
    return log_lr_from_phi(phi);
  }

 private:
  void check_sizes(std::span<const cplx> y, std::span<const cplx> h) const {
    if (static_cast<int>(y.size()) != K_ || static_cast<int>(h.size()) != K_)
      throw std::invalid_argument("fusion: y and h must have length K");
  }

  double log_lr_log_domain(std::span<const std::array<double, 3>> log_phi) const {
    const int stride = K_ + 1;
    std::vector<double> L(static_cast<std::size_t>(stride * stride), -kInf);
    L[0] = 0.0;
    auto lse2 = [](double a, double b) {
      if (a == -kInf) return b;
      if (b == -kInf) return a;
      const double m = std::max(a, b);
      return m + std::log(std::exp(a - m) + std::exp(b - m));
    };
    for (const auto& lp : log_phi)
      for (int m = K_; m >= 0; --m)
        for (int z = K_ - m; z >= 0; --z) {
          double v = L[m * stride + z] + lp[2];
          if (m > 0) v = lse2(v, L[(m - 1) * stride + z] + lp[0]);
          if (z > 0) v = lse2(v, L[m * stride + z - 1] + lp[1]);
          L[m * stride + z] = v;
        }
    double num = -kInf, den = -kInf;
    for (int m = 0; m <= K_; ++m)
      for (int z = 0; m + z <= K_; ++z) {
        const double p1 = p1_->at(m, z), p0 = p0_->at(m, z);
        if (p1 > 0.0) num = lse2(num, L[m * stride + z] + std::log(p1));
        if (p0 > 0.0) den = lse2(den, L[m * stride + z] + std::log(p0));
      }
    if (den == -kInf) return num == -kInf ? 0.0 : std::log(kLrSentinel);
    if (num == -kInf) return -std::log(kLrSentinel);
    return num - den;
  }

  int K_;
  double sigma_v2_;
  AssumedModel assumed_;
  std::shared_ptr<const RectangleTable> p1_, p0_;
};

inline double lr_pure_censoring(const ChannelRealization& real, const NetworkConfig& cfg,
                                const AssumedModel& assumed) {
  AssumedModel a = assumed;
  a.g_fc = 0.0;
  a.f_fc = 1.0;
  return lr_from_log(FusionModel(cfg, a).log_lr_crt1(real.y, real.h));
}

inline double lr_crt1(const ChannelRealization& real, const NetworkConfig& cfg,
                      const AssumedModel& assumed) {
  return lr_from_log(FusionModel(cfg, assumed).log_lr_crt1(real.y, real.h));
}

inline double lr_crt2(const ChannelRealization& real, const NetworkConfig& cfg,
                      const AssumedModel& assumed, std::span<const std::uint8_t> r_f,
                      std::span<const std::uint8_t> r_g) {
  return lr_from_log(FusionModel(cfg, assumed).log_lr_crt2(real.y, real.h, r_f, r_g));
}

}  // namespace censornet
