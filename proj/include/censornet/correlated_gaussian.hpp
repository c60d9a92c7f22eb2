#pragma once

// Joint interval probabilities for the equicorrelated Gaussian observation
// vector, and a sampler for the same vector.
//
// With w_k = sqrt(rho) z0 + sqrt(1 - rho) e_k the K-dimensional rectangle
// probability becomes a 1-D integral over z0 of a product of univariate
// interval probabilities. Gauss-Hermite handles it well unless rho is close to
// one, where the integrand develops steps of width sqrt((1 - rho) / rho) and
// an equal-spaced rule takes over.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "censornet/gauss_hermite.hpp"
#include "censornet/network_model.hpp"
#include "censornet/normal.hpp"
#include "censornet/rng.hpp"

namespace censornet {

inline double univariate_cdf(double z) noexcept { return normal_cdf(z); }

/// Compressed interval assignment: sensors are exchangeable, so only the
/// occupancy of each interval matters.
struct IntervalCounts {
  int minus = 0;
  int zero = 0;
  int plus = 0;

  int total() const noexcept { return minus + zero + plus; }
  friend bool operator==(const IntervalCounts&, const IntervalCounts&) = default;
};

inline IntervalCounts count_intervals(std::span<const Interval> assignment) noexcept {
  IntervalCounts c;
  for (Interval d : assignment) {
    if (d == Interval::Minus) ++c.minus;
    else if (d == Interval::Zero) ++c.zero;
    else ++c.plus;
  }
  return c;
}

struct QuadratureOptions {
  int nodes = 64;
  // Double the node count until the table moves by less than tol (or 512 nodes).
  bool refine = true;
  double tol = 1e-12;
  bool cache = true;
};

/// P(exactly the given interval counts, in a fixed sensor order) for every
/// count triple with n_minus + n_zero + n_plus = K.
class RectangleTable {
 public:
  RectangleTable(int K, std::vector<double> probs, int nodes_used)
      : K_(K), probs_(std::move(probs)), nodes_used_(nodes_used) {}

  int K() const noexcept { return K_; }
  int nodes_used() const noexcept { return nodes_used_; }

  double at(int n_minus, int n_zero) const noexcept {
    return probs_[static_cast<std::size_t>(n_minus * (K_ + 1) + n_zero)];
  }
  double at(const IntervalCounts& c) const noexcept { return at(c.minus, c.zero); }

  const std::vector<double>& raw() const noexcept { return probs_; }

 private:
  int K_;
  std::vector<double> probs_;  // (K+1) x (K+1), entries with n_minus + n_zero > K unused
  int nodes_used_;
};

inline constexpr int kMaxTrapezoidIntervals = 1 << 18;

namespace detail {

inline std::vector<double> rectangle_probs_quadrature(int K, double mean, double sigma, double rho,
                                                      double tau1, double tau2,
                                                      const NormalQuadrature* rule) {
  const int stride = K + 1;
  std::vector<double> out(static_cast<std::size_t>(stride * stride), 0.0);
  std::vector<double> pm(K + 1), p0(K + 1), pp(K + 1);

  auto accumulate = [&](double w, double qm, double q0, double qp) {
    pm[0] = p0[0] = pp[0] = 1.0;
    for (int n = 1; n <= K; ++n) {
      pm[n] = pm[n - 1] * qm;
      p0[n] = p0[n - 1] * q0;
      pp[n] = pp[n - 1] * qp;
    }
    for (int m = 0; m <= K; ++m)
      for (int z = 0; m + z <= K; ++z) out[m * stride + z] += w * pm[m] * p0[z] * pp[K - m - z];
  };

  if (rho == 0.0 || rule == nullptr) {
    const double lo = (tau2 - mean) / sigma;
    const double hi = (tau1 - mean) / sigma;
    accumulate(1.0, normal_cdf(lo), normal_interval(lo, hi), normal_sf(hi));
    return out;
  }

  const double common = sigma * std::sqrt(rho);
  const double idio = sigma * std::sqrt(1.0 - rho);
  for (std::size_t i = 0; i < rule->size(); ++i) {
    const double shift = mean + common * rule->nodes[i];
    const double lo = (tau2 - shift) / idio;
    const double hi = (tau1 - shift) / idio;
    accumulate(rule->weights[i], normal_cdf(lo), normal_interval(lo, hi), normal_sf(hi));
  }
  return out;
}

struct RectangleKey {
  int K;
  std::int64_t mean, sigma, rho, tau1, tau2;
  int nodes;
  bool refine;
  auto tie() const { return std::tie(K, mean, sigma, rho, tau1, tau2, nodes, refine); }
  bool operator<(const RectangleKey& o) const { return tie() < o.tie(); }
};

inline std::int64_t quantize(double x) noexcept {
  constexpr double kScale = 1e12;
  constexpr double kLimit = 9.0e6;  // keeps x * kScale inside int64
  if (std::isnan(x)) return INT64_MIN;
  if (x >= kLimit) return INT64_MAX;
  if (x <= -kLimit) return INT64_MIN + 1;
  return std::llround(x * kScale);
}

class RectangleCache {
 public:
  static RectangleCache& instance() {
    static RectangleCache cache;
    return cache;
  }

  std::shared_ptr<const RectangleTable> find(const RectangleKey& key) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : it->second;
  }

  void insert(const RectangleKey& key, std::shared_ptr<const RectangleTable> table) {
    std::unique_lock lock(mutex_);
    if (map_.size() >= kCapacity) map_.clear();
    map_.emplace(key, std::move(table));
  }

  void clear() {
    std::unique_lock lock(mutex_);
    map_.clear();
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
  }

 private:
  static constexpr std::size_t kCapacity = 1 << 14;
  mutable std::shared_mutex mutex_;
  std::map<RectangleKey, std::shared_ptr<const RectangleTable>> map_;
};

}  // namespace detail

/// Builds (or fetches) the full count table for one hypothesis mean.
inline std::shared_ptr<const RectangleTable> rectangle_table(int K, double mean, double sigma_w,
                                                             double rho, double tau1, double tau2,
                                                             const QuadratureOptions& opts = {}) {
  if (K < 1) throw ConfigError("K", "sensor count must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho", "correlation must lie in [0, 1)");
  if (!(tau2 <= tau1)) throw ConfigError("tau2", "lower threshold must not exceed tau1");
  if (opts.nodes < 1 || opts.nodes > kMaxQuadratureNodes)
    throw ConfigError("quadrature_nodes", "must lie in [1, 512]");

  const detail::RectangleKey key{K,
                                 detail::quantize(mean),
                                 detail::quantize(sigma_w),
                                 detail::quantize(rho),
                                 detail::quantize(tau1),
                                 detail::quantize(tau2),
                                 opts.nodes,
                                 opts.refine};
  auto& cache = detail::RectangleCache::instance();
  if (opts.cache)
    if (auto hit = cache.find(key)) return hit;

  std::vector<double> probs;
  int used = 1;
  if (rho == 0.0) {
    probs = detail::rectangle_probs_quadrature(K, mean, sigma_w, 0.0, tau1, tau2, nullptr);
  } else {
    int n = opts.nodes;
    bool converged = true;
    probs = detail::rectangle_probs_quadrature(K, mean, sigma_w, rho, tau1, tau2,
                                               gauss_hermite_rule(n).get());
    used = n;
    while (opts.refine && n * 2 <= kMaxQuadratureNodes) {
      n *= 2;
      auto finer = detail::rectangle_probs_quadrature(K, mean, sigma_w, rho, tau1, tau2,
                                                      gauss_hermite_rule(n).get());
      double diff = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i)
        diff = std::max(diff, std::abs(finer[i] - probs[i]));
      probs = std::move(finer);
      used = n;
      if (diff < opts.tol) break;
      if (n * 2 > kMaxQuadratureNodes) converged = false;
    }
    if (!converged) {
      for (int m = 1024; m <= kMaxTrapezoidIntervals; m *= 2) {
        const NormalQuadrature rule = trapezoid_normal_rule(m);
        auto finer = detail::rectangle_probs_quadrature(K, mean, sigma_w, rho, tau1, tau2, &rule);
        double diff = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i)
          diff = std::max(diff, std::abs(finer[i] - probs[i]));
        probs = std::move(finer);
        used = m + 1;
        if (diff < opts.tol) break;
      }
    }
  }
  for (double& p : probs) p = std::max(0.0, p);

  auto table = std::make_shared<const RectangleTable>(K, std::move(probs), used);
  if (opts.cache) cache.insert(key, table);
  return table;
}

inline std::shared_ptr<const RectangleTable> rectangle_table(const NetworkConfig& cfg, double rho,
                                                             double tau1, double tau2,
                                                             Hypothesis h,
                                                             const QuadratureOptions& opts = {}) {
  return rectangle_table(cfg.K, h == Hypothesis::H1 ? cfg.A : 0.0, cfg.sigma_w(), rho, tau1, tau2,
                         opts);
}

/// P(x_k in R^{i_k} for all k | hypothesis) for a count-compressed assignment.
inline double rectangle_prob(const NetworkConfig& cfg, double tau1, double tau2,
                             const IntervalCounts& counts, Hypothesis h,
                             const QuadratureOptions& opts = {}) {
  if (counts.minus < 0 || counts.zero < 0 || counts.plus < 0 || counts.total() != cfg.K)
    throw std::invalid_argument("rectangle_prob: counts must be non-negative and sum to K");
  return rectangle_table(cfg, cfg.rho, tau1, tau2, h, opts)->at(counts);
}

inline double rectangle_prob(const NetworkConfig& cfg, double tau1, double tau2,
                             std::span<const Interval> assignment, Hypothesis h,
                             const QuadratureOptions& opts = {}) {
  if (static_cast<int>(assignment.size()) != cfg.K)
    throw std::invalid_argument("rectangle_prob: assignment length must equal K");
  return rectangle_prob(cfg, tau1, tau2, count_intervals(assignment), h, opts);
}

/// One correlated observation vector drawn from the given stream.
inline void draw_observation(const NetworkConfig& cfg, Hypothesis h, RandomStream& rng,
                             std::span<double> out) {
  const double mean = h == Hypothesis::H1 ? cfg.A : 0.0;
  const double s = cfg.sigma_w();
  const double common = s * std::sqrt(cfg.rho) * rng.normal();
  const double idio = s * std::sqrt(1.0 - cfg.rho);
  for (double& x : out) x = mean + common + idio * rng.normal();
}

inline std::vector<std::vector<double>> sample_observations(const NetworkConfig& cfg, Hypothesis h,
                                                            std::size_t n, std::uint64_t seed) {
  cfg.validate();
  const std::uint64_t stream =
      hash_combine(hash_label("observations"), h == Hypothesis::H1 ? 1u : 0u);
  std::vector<std::vector<double>> out(n, std::vector<double>(cfg.K));
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(seed, stream, static_cast<std::uint32_t>(i));
    draw_observation(cfg, h, rng, out[i]);
  }
  return out;
}

}  // namespace censornet
