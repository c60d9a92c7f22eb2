#pragma once

// Small geometric programs in two variables (g, f).
//
// With g = e^p, f = e^q every posynomial becomes exp of a log-sum-exp of
// affine functions, so "posynomial <= 1" is a convex constraint. The solver is
// a plain log-barrier method with damped Newton steps; a phase-I problem finds
// a strictly feasible start when the caller does not supply one.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "censornet/normal.hpp"
#include "censornet/performance_eval.hpp"

namespace censornet {

/// c * g^ag * f^af with c > 0.
struct Monomial {
  double c = 1.0;
  double ag = 0.0;
  double af = 0.0;

  double eval(double g, double f) const { return c * std::pow(g, ag) * std::pow(f, af); }
};

using Posynomial = std::vector<Monomial>;

inline double eval(const Posynomial& p, double g, double f) {
  double s = 0.0;
  for (const auto& m : p) s += m.eval(g, f);
  return s;
}

/// Posynomial divided by a monomial.
inline Posynomial divide(const Posynomial& p, const Monomial& m) {
  if (!(m.c > 0.0)) throw std::invalid_argument("divide: monomial coefficient must be > 0");
  Posynomial out;
  out.reserve(p.size());
  for (const auto& t : p) out.push_back({t.c / m.c, t.ag - m.ag, t.af - m.af});
  return out;
}

inline Posynomial scale(Posynomial p, double s) {
  for (auto& t : p) t.c *= s;
  return p;
}

/// Positive or negative part of a signed polynomial as a posynomial in (g, f).
inline Posynomial to_posynomial(const SignedBivariatePolynomial& p, bool negative_part,
                                double drop_below = 0.0) {
  const auto& part = negative_part ? p.neg : p.pos;
  Posynomial out;
  const int K = p.K;
  for (int n = 0; n <= K; ++n)
    for (int m = 0; m <= K; ++m) {
      const double c = part[static_cast<std::size_t>(n * (K + 1) + m)];
      if (c > drop_below) out.push_back({c, static_cast<double>(m), static_cast<double>(n)});
    }
  return out;
}

/// A ratio constraint numerator / denominator <= 1 whose posynomial
/// denominator has been replaced by its AGM lower bound at (g0, f0).
struct CondensedConstraint {
  Posynomial numerator;
  Monomial denominator;
  double g0 = 1.0;
  double f0 = 1.0;
  std::vector<double> weights;  // one per denominator term

  Posynomial as_posynomial() const { return divide(numerator, denominator); }
};

/// AGM condensation: sum_i u_i >= prod_i (u_i / w_i)^{w_i} with
/// w_i = u_i(x0) / sum_j u_j(x0); equality at x0.
inline CondensedConstraint condense_agm(const Posynomial& denominator, double g0, double f0) {
  if (!(g0 > 0.0 && f0 > 0.0)) throw std::invalid_argument("condense_agm: point must be positive");
  if (denominator.empty()) throw std::invalid_argument("condense_agm: empty denominator");
  const double total = eval(denominator, g0, f0);
  if (!(total > 0.0)) throw std::domain_error("condense_agm: denominator vanishes at the point");

  CondensedConstraint out;
  out.g0 = g0;
  out.f0 = f0;
  out.weights.resize(denominator.size());
  double log_c = 0.0, ag = 0.0, af = 0.0;
  for (std::size_t i = 0; i < denominator.size(); ++i) {
    const auto& t = denominator[i];
    const double w = t.eval(g0, f0) / total;
    out.weights[i] = w;
    if (w <= 0.0) continue;
    log_c += w * (std::log(t.c) - std::log(w));
    ag += w * t.ag;
    af += w * t.af;
  }
  out.denominator = {std::exp(log_c), ag, af};
  return out;
}

struct GPResult {
  bool feasible = false;
  double g = 0.0;
  double f = 0.0;
  double objective = 0.0;
  std::vector<double> slacks;  // 1 - constraint value, one per constraint
  double kkt_residual = 0.0;   // stationarity in log coordinates
  int newton_steps = 0;
  std::string message;
};

namespace detail {

// log sum_k exp(a_k . y + b_k) with gradient and Hessian.
struct LseAffine {
  std::vector<Eigen::VectorXd> a;
  std::vector<double> b;

  double value(const Eigen::VectorXd& y) const {
    double m = -kInf;
    std::vector<double> z(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      z[k] = a[k].dot(y) + b[k];
      m = std::max(m, z[k]);
    }
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
  }

  double derivs(const Eigen::VectorXd& y, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const auto n = y.size();
    std::vector<double> z(a.size());
    double m = -kInf;
    for (std::size_t k = 0; k < a.size(); ++k) {
      z[k] = a[k].dot(y) + b[k];
      m = std::max(m, z[k]);
    }
    double s = 0.0;
    for (double& v : z) {
      v = std::exp(v - m);
      s += v;
    }
    grad = Eigen::VectorXd::Zero(n);
    hess = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double w = z[k] / s;
      grad += w * a[k];
      hess += w * a[k] * a[k].transpose();
    }
    hess -= grad * grad.transpose();
    return m + std::log(s);
  }
};

struct BarrierProblem {
  LseAffine objective;
  std::vector<LseAffine> constraints;  // each <= 0
  Eigen::VectorXd lo, hi;              // box; +-inf means free
};

struct BarrierOutcome {
  Eigen::VectorXd y;
  int steps = 0;
  double stationarity = 0.0;
};

inline bool strictly_inside(const BarrierProblem& bp, const Eigen::VectorXd& y) {
  for (Eigen::Index j = 0; j < y.size(); ++j)
    if (!(y[j] > bp.lo[j] && y[j] < bp.hi[j])) return false;
  for (const auto& c : bp.constraints)
    if (!(c.value(y) < 0.0)) return false;
  return true;
}

// Barrier value s*phi0 - sum log(-phi_i) - sum log(box gaps).
inline double barrier_value(const BarrierProblem& bp, const Eigen::VectorXd& y, double s) {
  if (!strictly_inside(bp, y)) return kInf;
  double v = s * bp.objective.value(y);
  for (const auto& c : bp.constraints) v -= std::log(-c.value(y));
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (std::isfinite(bp.lo[j])) v -= std::log(y[j] - bp.lo[j]);
    if (std::isfinite(bp.hi[j])) v -= std::log(bp.hi[j] - y[j]);
  }
  return v;
}

// Central-path following from a strictly feasible y. stop(y) may end early.
template <class Stop>
BarrierOutcome run_barrier(const BarrierProblem& bp, Eigen::VectorXd y, Stop&& stop,
                           double gap_tol = 1e-10) {
  const auto n = y.size();
  double m_total = static_cast<double>(bp.constraints.size());
  for (Eigen::Index j = 0; j < n; ++j)
    m_total += (std::isfinite(bp.lo[j]) ? 1.0 : 0.0) + (std::isfinite(bp.hi[j]) ? 1.0 : 0.0);
  BarrierOutcome out;
  double s = 1.0;
  Eigen::VectorXd g0, gi;
  Eigen::MatrixXd h0, hi;
  for (int outer = 0; outer < 60; ++outer) {
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
      bp.objective.derivs(y, g0, h0);
      grad += s * g0;
      hess += s * h0;
      for (const auto& c : bp.constraints) {
        const double phi = c.derivs(y, gi, hi);
        grad += gi / (-phi);
        hess += hi / (-phi) + gi * gi.transpose() / (phi * phi);
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isfinite(bp.lo[j])) {
          const double d = y[j] - bp.lo[j];
          grad[j] -= 1.0 / d;
          hess(j, j) += 1.0 / (d * d);
        }
        if (std::isfinite(bp.hi[j])) {
          const double d = bp.hi[j] - y[j];
          grad[j] += 1.0 / d;
          hess(j, j) += 1.0 / (d * d);
        }
      }
      hess += 1e-12 * Eigen::MatrixXd::Identity(n, n);
      const Eigen::VectorXd step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      ++out.steps;
      if (!(decrement > 1e-14) || !step.allFinite()) break;
      const double v0 = barrier_value(bp, y, s);
      double a = 1.0;
      while (a > 1e-16) {
        const Eigen::VectorXd cand = y + a * step;
        if (barrier_value(bp, cand, s) <= v0 - 0.25 * a * decrement) break;
        a *= 0.5;
      }
      if (a <= 1e-16) break;
      y += a * step;
      if (stop(y)) {
        out.y = y;
        return out;
      }
    }
    if (m_total / s < gap_tol) break;
    s *= 10.0;
  }
  out.y = y;
  return out;
}

inline LseAffine lse_of(const Posynomial& p, int n_vars, double extra_last = 0.0) {
  LseAffine l;
  for (const auto& t : p) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n_vars);
    a[0] = t.ag;
    a[1] = t.af;
    if (n_vars > 2) a[2] = extra_last;
    l.a.push_back(a);
    l.b.push_back(std::log(t.c));
  }
  return l;
}

}  // namespace detail

/// minimize objective(g, f) subject to constraints[i](g, f) <= 1 and
/// eps <= g, f <= 1. All inputs are posynomials.
inline GPResult solve_gp_2var(const Posynomial& objective, const std::vector<Posynomial>& constraints,
                              double eps, std::optional<std::pair<double, double>> start = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("solve_gp_2var: eps must lie in (0, 1)");
  if (objective.empty()) throw std::invalid_argument("solve_gp_2var: empty objective");
  for (const auto& t : objective)
    if (!(t.c > 0.0)) throw std::invalid_argument("solve_gp_2var: objective coefficients must be > 0");

  const double le = std::log(eps);
  detail::BarrierProblem bp;
  bp.objective = detail::lse_of(objective, 2);
  for (const auto& c : constraints) {
    if (c.empty()) continue;  // 0 <= 1 always holds
    bp.constraints.push_back(detail::lse_of(c, 2));
  }
  bp.lo = Eigen::Vector2d(le, le);
  bp.hi = Eigen::Vector2d(0.0, 0.0);

  GPResult res;
  Eigen::VectorXd y(2);
  const double mid = 0.5 * le;
  y << mid, mid;
  if (start) {
    const double gs = std::clamp(start->first, eps, 1.0), fs = std::clamp(start->second, eps, 1.0);
    y << std::clamp(std::log(gs), le + 1e-9, -1e-9), std::clamp(std::log(fs), le + 1e-9, -1e-9);
  }

  if (!detail::strictly_inside(bp, y)) {
    // Phase I over (p, q, sigma): minimize sigma s.t. phi_i(p, q) <= sigma.
    detail::BarrierProblem p1;
    Eigen::VectorXd a_sigma = Eigen::VectorXd::Zero(3);
    a_sigma[2] = 1.0;
    p1.objective.a = {a_sigma};
    p1.objective.b = {0.0};
    for (const auto& c : constraints)
      if (!c.empty()) p1.constraints.push_back(detail::lse_of(c, 3, -1.0));
    p1.lo = Eigen::Vector3d(le, le, -kInf);
    p1.hi = Eigen::Vector3d(0.0, 0.0, kInf);
    Eigen::VectorXd z(3);
    z << std::clamp(y[0], le + 1e-6, -1e-6), std::clamp(y[1], le + 1e-6, -1e-6), 0.0;
    double worst = -kInf;
    for (const auto& c : bp.constraints) worst = std::max(worst, c.value(z.head(2)));
    z[2] = worst + 1.0;
    // The objective here is log(exp(sigma)), which is fine for sigma of any sign.
    auto done = [&](const Eigen::VectorXd& v) { return v[2] < -1e-7; };
    const auto r1 = detail::run_barrier(p1, z, done, 1e-9);
    res.newton_steps += r1.steps;
    if (!(r1.y[2] < 0.0) || !detail::strictly_inside(bp, r1.y.head(2))) {
      res.feasible = false;
      res.g = std::exp(r1.y[0]);
      res.f = std::exp(r1.y[1]);
      res.message = "infeasible";
      res.objective = eval(objective, res.g, res.f);
      for (const auto& c : constraints) res.slacks.push_back(1.0 - eval(c, res.g, res.f));
      return res;
    }
    y = r1.y.head(2);
  }

  const auto r = detail::run_barrier(bp, y, [](const Eigen::VectorXd&) { return false; });
  res.newton_steps += r.steps;
  y = r.y;
  res.feasible = true;
  res.g = std::exp(y[0]);
  res.f = std::exp(y[1]);
  res.objective = eval(objective, res.g, res.f);
  for (const auto& c : constraints) res.slacks.push_back(1.0 - eval(c, res.g, res.f));

  // Stationarity with multipliers fitted by non-negative least squares on the
  // nearly active constraints (box included), in log coordinates.
  Eigen::VectorXd g0;
  Eigen::MatrixXd h0;
  bp.objective.derivs(y, g0, h0);
  std::vector<Eigen::VectorXd> cols;
  for (const auto& c : bp.constraints) {
    Eigen::VectorXd gi;
    Eigen::MatrixXd hi;
    const double phi = c.derivs(y, gi, hi);
    if (phi > -1e-5) cols.push_back(gi);
  }
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    if (y[j] - le < 1e-5) {
      e[j] = -1.0;
      cols.push_back(e);
    }
    if (-y[j] < 1e-5) {
      e[j] = 1.0;
      cols.push_back(e);
    }
  }
  double best = g0.norm();
  const std::size_t nc = cols.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << nc); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < nc; ++i)
      if (mask & (std::size_t{1} << i)) idx.push_back(i);
    Eigen::MatrixXd A(2, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) A.col(static_cast<Eigen::Index>(i)) = cols[idx[i]];
    const Eigen::VectorXd lam = A.colPivHouseholderQr().solve(-g0);
    if ((lam.array() < 0.0).any()) continue;
    best = std::min(best, (g0 + A * lam).norm());
  }
  res.kkt_residual = best;
  res.message = "ok";
  return res;
}

}  // namespace censornet
