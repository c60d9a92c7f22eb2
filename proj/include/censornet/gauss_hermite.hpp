#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace censornet {

/// Gauss-Hermite rule for integrals against the standard normal density:
///   E[h(Z)] ~= sum_i weights[i] * h(nodes[i]),  Z ~ N(0,1).
/// Nodes are already scaled by sqrt(2) and weights by 1/sqrt(pi), so the
/// weights sum to one.
struct NormalQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

inline constexpr int kMaxQuadratureNodes = 512;

namespace detail {

// Roots of the physicists' Hermite polynomial H_n by Newton iteration on the
// normalized Hermite functions psi_j(z) = c_j H_j(z) exp(-z^2/2), which stay
// bounded for every n up to kMaxQuadratureNodes (the polynomial form overflows).
inline NormalQuadrature build_gauss_hermite(int n) {
  if (n < 1 || n > kMaxQuadratureNodes)
    throw std::invalid_argument("Gauss-Hermite node count must be in [1, 512]");

  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0.0;

  for (int i = 0; i < half; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];

    double psi_prev = 0.0;  // psi_{n-1}(z)
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4 * std::exp(-0.5 * z * z);
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
      }
      psi_prev = p2;
      const double dpsi = std::sqrt(2.0 * n) * p2 - z * p1;
      const double step = p1 / dpsi;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    // w_i = 2 / (2n * H~_{n-1}(x_i)^2) in polynomial terms; with Hermite
    // functions the exp(-x^2) factor is already inside psi^2.
    const double denom = 2.0 * n * psi_prev * psi_prev;
    const double wi = denom > 0.0 ? 2.0 / denom * std::exp(-z * z) : 0.0;
    w[i] = wi;
    w[n - 1 - i] = wi;
  }

  NormalQuadrature rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];  // ascending
    rule.weights[i] = inv_sqrt_pi * w[n - 1 - i];
  }
  return rule;
}

}  // namespace detail

/// Equal-spaced rule on [-half_width, half_width] against the normal density.
/// Converges geometrically for smooth integrands, and unlike Gauss-Hermite it
/// keeps resolving features much narrower than the density itself.
inline NormalQuadrature trapezoid_normal_rule(int n, double half_width = 9.5) {
  if (n < 2) throw std::invalid_argument("trapezoid rule needs at least 2 intervals");
  NormalQuadrature rule;
  rule.nodes.resize(n + 1);
  rule.weights.resize(n + 1);
  const double h = 2.0 * half_width / n;
  for (int i = 0; i <= n; ++i) {
    const double z = -half_width + h * i;
    rule.nodes[i] = z;
    rule.weights[i] = (i == 0 || i == n ? 0.5 : 1.0) * h * std::exp(-0.5 * z * z) /
                      std::sqrt(2.0 * std::numbers::pi);
  }
  return rule;
}

/// Shared, lazily built rules keyed by node count.
inline std::shared_ptr<const NormalQuadrature> gauss_hermite_rule(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const NormalQuadrature>> rules;
  std::lock_guard lock(mutex);
  auto& slot = rules[n];
  if (!slot) slot = std::make_shared<const NormalQuadrature>(detail::build_gauss_hermite(n));
  return slot;
}

}  // namespace censornet
