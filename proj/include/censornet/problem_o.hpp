#pragma once

// Problem (O): minimize P_M subject to P_t = p0 and P_F <= beta.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "censornet/network_model.hpp"
#include "censornet/performance_eval.hpp"

namespace censornet {

enum class CrtVariant { MismatchedFC, FullSearch };

inline std::string_view to_string(CrtVariant v) noexcept {
  return v == CrtVariant::MismatchedFC ? "mismatched" : "full";
}

inline CrtVariant parse_variant(std::string_view s) {
  if (s == "mismatched" || s == "f1fc" || s == "MismatchedFC") return CrtVariant::MismatchedFC;
  if (s == "full" || s == "FullSearch") return CrtVariant::FullSearch;
  throw ConfigError("variant", "unknown CRT-I variant '" + std::string(s) + "'");
}

struct ProblemOSpec {
  double p0 = 0.4;
  double beta = 0.01;
  Scheme scheme = Scheme::CRT2;
  CrtVariant variant = CrtVariant::MismatchedFC;

  void validate() const {
    if (!(p0 > 0.0 && p0 <= 1.0)) throw ConfigError("p0", "must lie in (0, 1]");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta", "must lie in (0, 1)");
  }
};

struct SolverOptions {
  EvalOptions eval{};
  int tau_grid = 201;
  int refine_points = 21;
  std::size_t n_mc_coarse = 2000;
  int f_grid = 41;
  int golden_iters = 30;
  bool joint = true;
  double fd_step = 1e-4;
};

enum class SolveStatus { Ok, Infeasible, NonConverged };

inline std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Ok: return "ok";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NonConverged: return "nonconverged";
  }
  return "?";
}

struct PureSolution {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double t = 1.0;
  PerfEstimate perf;
  SolveStatus status = SolveStatus::Ok;
};

/// Stage-1 certificate of the sequential procedure.
struct KKTSolution {
  double f_star = 1.0;
  double g_star = 0.0;
  double t_star = 1.0;
  double lambda = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  std::vector<double> residuals;  // |dL/df|, |lambda (P_F - beta)|, max(0, P_F - beta), |mu1 (f - l1')|, |mu2 (l0' - f)|
};

struct OSolution {
  double f = 1.0;
  double g = 0.0;
  double t = 1.0;
  PerfEstimate perf;
  KKTSolution stage1;
  double f_sequential = 1.0;  // f after stages 1-2, before the joint search
  double pm_sequential = 0.0;
  FeasibleRange range;
  SolveStatus status = SolveStatus::Ok;
};

namespace detail {

inline EvalOptions with_n(EvalOptions e, std::size_t n) {
  e.n_mc_pu = n;
  return e;
}

// The pair (tau1, tau2) with P_t = p0 whose lower threshold has H0 mass q.
inline std::pair<double, double> thresholds_from_q(double sigma, double p0, double q) {
  const double tau2 = sigma * normal_quantile(q);
  if (p0 >= 1.0) return {tau2, tau2};
  const double c = std::min(q + 1.0 - p0, 1.0);
  const double tau1 = sigma * normal_quantile(c);
  return {std::max(tau1, tau2), tau2};
}

}  // namespace detail

/// Pure censoring: tau2 grid, tau1 from the rate constraint, t from P_F = beta.
/// A coarse pass with few Monte-Carlo samples locates the basin; the best cell
/// is then refined with the full sample budget.
inline PureSolution solve_pure_censoring_O(const NetworkConfig& cfg, double p0, double beta,
                                           const SolverOptions& opts = {}) {
  cfg.validate();
  if (!(p0 > 0.0 && p0 <= 1.0)) throw ConfigError("p0", "must lie in (0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta", "must lie in (0, 1)");
  const double s = cfg.sigma_w();
  const double q_max = p0 >= 1.0 ? 1.0 - 1e-12 : p0 * (1.0 - 1e-9);
  const double lo = -4.0 * s + cfg.A / 2.0, hi = cfg.A / 2.0;

  std::vector<double> qs;
  for (int i = 0; i < opts.tau_grid; ++i) {
    const double tau2 = lo + (hi - lo) * i / std::max(1, opts.tau_grid - 1);
    const double q = normal_cdf(tau2 / s);
    if (q > 0.0 && q <= q_max) qs.push_back(q);
  }
  if (qs.empty() || qs.back() < q_max) qs.push_back(q_max);

  struct Eval {
    double q, tau1, tau2, t, pm;
    PerfEstimate perf;
  };
  auto evaluate_q = [&](double q, std::size_t n) {
    const auto [tau1, tau2] = detail::thresholds_from_q(s, p0, q);
    SemiAnalyticModel m(cfg, tau1, tau2, PuRoute::Symbols, AssumedModel::pure(cfg.rho, tau1, tau2),
                        detail::with_n(opts.eval, n));
    const double t = m.t_for_pf(0.0, 1.0, beta);
    const PerfEstimate e = m.evaluate(0.0, 1.0, t);
    return Eval{q, tau1, tau2, t, e.pm, e};
  };

  std::vector<Eval> coarse(qs.size());
  parallel_for(qs.size(), [&](std::size_t i) { coarse[i] = evaluate_q(qs[i], opts.n_mc_coarse); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < coarse.size(); ++i)
    if (coarse[i].pm < coarse[best].pm) best = i;

  const double qa = qs[best >= 2 ? best - 2 : 0];
  const double qb = qs[std::min(qs.size() - 1, best + 2)];
  std::vector<double> fine_q;
  for (int i = 0; i < opts.refine_points; ++i)
    fine_q.push_back(qa + (qb - qa) * i / std::max(1, opts.refine_points - 1));
  std::vector<Eval> fine(fine_q.size());
  parallel_for(fine_q.size(),
               [&](std::size_t i) { fine[i] = evaluate_q(fine_q[i], opts.eval.n_mc_pu); });
  std::size_t bf = 0;
  for (std::size_t i = 1; i < fine.size(); ++i)
    if (fine[i].pm < fine[bf].pm) bf = i;

  PureSolution sol;
  sol.tau1 = fine[bf].tau1;
  sol.tau2 = fine[bf].tau2;
  sol.t = fine[bf].t;
  sol.perf = fine[bf].perf;
  sol.status = SolveStatus::Ok;
  return sol;
}

/// Evaluator over f on the constant-rate line g = g(f), thresholds fixed.
class ConstantRateProblem {
 public:
  ConstantRateProblem(const NetworkConfig& cfg, double tau1, double tau2, double p0, Scheme scheme,
                      CrtVariant variant, const SolverOptions& opts)
      : cfg_(cfg), tau1_(tau1), tau2_(tau2), p0_(p0), scheme_(scheme), variant_(variant),
        opts_(opts) {
    h0_ = interval_probs(cfg, tau1, tau2, Hypothesis::H0);
    range_ = feasible_f_range(h0_, p0);
    if (scheme == Scheme::CRT2) {
      fixed_ = std::make_shared<SemiAnalyticModel>(
          cfg, tau1, tau2, PuRoute::Realizations, AssumedModel::pure(cfg.rho, tau1, tau2),
          opts.eval);
    } else if (scheme == Scheme::PureCensoring || variant == CrtVariant::MismatchedFC) {
      fixed_ = std::make_shared<SemiAnalyticModel>(cfg, tau1, tau2, PuRoute::Symbols,
                                                   AssumedModel::pure(cfg.rho, tau1, tau2),
                                                   opts.eval);
    }
  }

  const FeasibleRange& range() const noexcept { return range_; }
  const IntervalProbs& h0() const noexcept { return h0_; }
  bool fixed_pu() const noexcept { return fixed_ != nullptr; }
  std::shared_ptr<const SemiAnalyticModel> fixed_model() const { return fixed_; }

  double g_of(double f) const {
    if (!(h0_.zero > 0.0)) return 0.0;
    return std::clamp(g_of_f(h0_, p0_, f).g, 0.0, 1.0);
  }

  /// The model whose P_u matches an FC that uses (g, f).
  std::shared_ptr<const SemiAnalyticModel> model_for(double f) const {
    if (fixed_) return fixed_;
    const double g = g_of(f);
    return std::make_shared<SemiAnalyticModel>(cfg_, tau1_, tau2_, PuRoute::Symbols,
                                               AssumedModel{cfg_.rho, g, f, tau1_, tau2_},
                                               opts_.eval);
  }

  PerfEstimate at(double f, double t) const { return model_for(f)->evaluate(g_of(f), f, t); }

  /// Best t for this f: the smallest t meeting P_F <= beta.
  std::pair<double, PerfEstimate> at_beta(double f, double beta) const {
    const auto m = model_for(f);
    const double g = g_of(f);
    const double t = m->t_for_pf(g, f, beta);
    return {t, m->evaluate(g, f, t)};
  }

 private:
  NetworkConfig cfg_;
  double tau1_, tau2_, p0_;
  Scheme scheme_;
  CrtVariant variant_;
  SolverOptions opts_;
  IntervalProbs h0_;
  FeasibleRange range_;
  std::shared_ptr<SemiAnalyticModel> fixed_;
};

namespace detail {

struct ScanPoint {
  double f;
  double pm;
  double pm_se;
  bool feasible;
};

// Grid scan plus golden-section refinement of a 1-D objective on [a, b].
// Returns the unconstrained-best point and the full list of evaluated points.
inline std::vector<ScanPoint> scan_and_refine(double a, double b, int grid, int golden_iters,
                                              const std::function<ScanPoint(double)>& eval) {
  std::vector<ScanPoint> pts;
  if (!(b > a)) {
    pts.push_back(eval(a));
    return pts;
  }
  const int n = std::max(2, grid);
  std::vector<ScanPoint> g(n);
  for (int i = 0; i < n; ++i) g[i] = eval(a + (b - a) * i / (n - 1));
  pts = g;
  int best = -1;
  for (int i = 0; i < n; ++i)
    if (g[i].feasible && (best < 0 || g[i].pm < g[best].pm)) best = i;
  if (best < 0) return pts;

  double lo = g[std::max(0, best - 1)].f, hi = g[std::min(n - 1, best + 1)].f;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  ScanPoint p1 = eval(x1), p2 = eval(x2);
  pts.push_back(p1);
  pts.push_back(p2);
  auto score = [](const ScanPoint& p) { return p.feasible ? p.pm : kInf; };
  for (int it = 0; it < golden_iters && hi - lo > 1e-6; ++it) {
    if (score(p1) <= score(p2)) {
      hi = x2;
      x2 = x1;
      p2 = p1;
      x1 = hi - phi * (hi - lo);
      p1 = eval(x1);
      pts.push_back(p1);
    } else {
      lo = x1;
      x1 = x2;
      p1 = p2;
      x2 = lo + phi * (hi - lo);
      p2 = eval(x2);
      pts.push_back(p2);
    }
  }
  return pts;
}

inline const ScanPoint* best_of(const std::vector<ScanPoint>& pts) {
  const ScanPoint* best = nullptr;
  for (const auto& p : pts)
    if (p.feasible && (!best || p.pm < best->pm)) best = &p;
  return best;
}

// Largest f whose P_M is within one standard error of the minimum.
inline const ScanPoint* tie_break(const std::vector<ScanPoint>& pts) {
  const ScanPoint* best = best_of(pts);
  if (!best) return nullptr;
  const ScanPoint* pick = best;
  for (const auto& p : pts)
    if (p.feasible && p.pm <= best->pm + best->pm_se && p.f > pick->f) pick = &p;
  return pick;
}

}  // namespace detail

/// Residuals of the stage-1 KKT system at f for fixed t.
inline std::vector<double> kkt_residuals_O(const ConstantRateProblem& prob, double t, double beta,
                                           double f, double lambda, double mu1, double mu2,
                                           double step = 1e-4) {
  const auto& r = prob.range();
  const double fa = std::max(r.l0p, f - step), fb = std::min(r.l1p, f + step);
  const PerfEstimate ea = prob.at(fa, t), eb = prob.at(fb, t), e = prob.at(f, t);
  const double h = fb - fa;
  const double dpm = h > 0 ? (eb.pm - ea.pm) / h : 0.0;
  const double dpf = h > 0 ? (eb.pf - ea.pf) / h : 0.0;
  return {std::abs(dpm + lambda * dpf + mu1 - mu2), std::abs(lambda * (e.pf - beta)),
          std::max(0.0, e.pf - beta), std::abs(mu1 * (f - r.l1p)), std::abs(mu2 * (r.l0p - f))};
}

/// Multipliers consistent with the stage-1 point, then its residuals.
inline KKTSolution certify_stage1(const ConstantRateProblem& prob, double f, double t, double beta,
                                  double step) {
  KKTSolution k;
  const auto& r = prob.range();
  k.f_star = f;
  k.g_star = prob.g_of(f);
  k.t_star = t;
  const double fa = std::max(r.l0p, f - step), fb = std::min(r.l1p, f + step);
  const PerfEstimate ea = prob.at(fa, t), eb = prob.at(fb, t), e = prob.at(f, t);
  const double h = fb - fa;
  const double dpm = h > 0 ? (eb.pm - ea.pm) / h : 0.0;
  const double dpf = h > 0 ? (eb.pf - ea.pf) / h : 0.0;
  const bool active = e.pf >= beta - std::max(1e-4, 2.0 * e.pf_se);
  const bool at_upper = f >= r.l1p - 1e-9, at_lower = f <= r.l0p + 1e-9;
  double grad = dpm;
  if (active && dpf != 0.0 && !at_upper && !at_lower) k.lambda = std::max(0.0, -dpm / dpf);
  grad += k.lambda * dpf;
  if (at_upper) k.mu1 = std::max(0.0, -grad);
  if (at_lower) k.mu2 = std::max(0.0, grad);
  k.residuals = kkt_residuals_O(prob, t, beta, f, k.lambda, k.mu1, k.mu2, step);
  return k;
}

/// CRT schemes at fixed thresholds. Stage 1 minimizes P_M over f at t = t_d,
/// stage 2 moves t until P_F = beta. With opts.joint the pair (f, t(f)) is
/// then searched directly, which is the problem the two stages approximate.
/// The full-search CRT-I variant always searches jointly since its P_u
/// changes with (g, f).
inline OSolution solve_crt_O(const NetworkConfig& cfg, const ProblemOSpec& spec, double tau1_d,
                             double tau2_d, double t_d, const SolverOptions& opts = {}) {
  spec.validate();
  OSolution sol;
  const ConstantRateProblem prob(cfg, tau1_d, tau2_d, spec.p0, spec.scheme, spec.variant, opts);
  sol.range = prob.range();
  if (!sol.range.feasible) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }
  const double a = sol.range.l0p, b = sol.range.l1p;
  const bool full = spec.scheme == Scheme::CRT1 && spec.variant == CrtVariant::FullSearch;
  const int grid = full ? std::max(5, opts.f_grid / 4) : opts.f_grid;
  const int golden = full ? std::min(opts.golden_iters, 10) : opts.golden_iters;

  // Stage 1. P_F at t_d carries the same noise the stage-2 contract allows.
  auto pf_slack = [](const PerfEstimate& e) { return std::max(1e-4, 2.0 * e.pf_se); };
  auto stage1_eval = [&](double f) {
    const PerfEstimate e = prob.at(f, t_d);
    return detail::ScanPoint{f, e.pm, e.pm_se, e.pf <= spec.beta + pf_slack(e)};
  };
  const auto pts1 = full ? std::vector<detail::ScanPoint>{}
                         : detail::scan_and_refine(a, b, grid, golden, stage1_eval);
  double f1 = b;
  if (!full) {
    const auto* best = detail::best_of(pts1);
    const auto* pick = detail::tie_break(pts1);
    if (best) {
      sol.stage1 = certify_stage1(prob, best->f, t_d, spec.beta, opts.fd_step);
      f1 = pick->f;
    }
  }

  // Stage 2.
  auto [t2, e2] = prob.at_beta(f1, spec.beta);
  sol.f = f1;
  sol.f_sequential = f1;
  sol.pm_sequential = e2.pm;
  sol.t = t2;
  sol.perf = e2;

  if (opts.joint || full) {
    auto joint_eval = [&](double f) {
      const auto r = prob.at_beta(f, spec.beta);
      return detail::ScanPoint{f, r.second.pm, r.second.pm_se, true};
    };
    auto pts = detail::scan_and_refine(a, b, grid, golden, joint_eval);
    pts.push_back({f1, e2.pm, e2.pm_se, true});
    const auto* pick = detail::tie_break(pts);
    if (pick && (pick->f != f1 || full)) {
      auto [tj, ej] = prob.at_beta(pick->f, spec.beta);
      if (full || ej.pm < e2.pm) {
        sol.f = pick->f;
        sol.t = tj;
        sol.perf = ej;
      }
    }
    if (full) {
      sol.stage1 = KKTSolution{};
      sol.stage1.f_star = sol.f;
      sol.stage1.g_star = prob.g_of(sol.f);
      sol.stage1.t_star = sol.t;
    }
  }
  sol.g = prob.g_of(sol.f);
  sol.status = SolveStatus::Ok;
  return sol;
}

}  // namespace censornet
