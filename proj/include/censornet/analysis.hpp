#pragma once

// Numerical checks of the analytical results on randomized transmission:
// derivative signs at the pure-censoring corner, the closed-form derivative
// of the mismatched-FC miss and false-alarm probabilities, and when interior
// optima appear.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "censornet/problem_o.hpp"

namespace censornet {

struct DerivativeReport {
  double rho = 0.0;
  double tau1 = 0.0, tau2 = 0.0, t = 1.0, rate = 0.0;
  // finite differences along g = g(f) at f = 1, common random numbers
  double dpm_df = 0.0, dpf_df = 0.0;
  double dpm_noise = 0.0, dpf_noise = 0.0;  // 3 x std over independent seeds
  // closed form (mismatched FC only)
  bool closed_form = false;
  double dpm_cf = 0.0, dpf_cf = 0.0, dpm_cf_se = 0.0, dpf_cf_se = 0.0;
  double gamma_m = 0.0, gamma_f = 0.0;
  double minus_dg_df = 0.0;     // p(R-1|H0) / p(R0|H0)
  double p0_ratio = 0.0;        // P_t / (1 - P_t)
  double spanning_mass = 0.0;   // P(some x in R-1 and some in R1 | H1)
  double h1_a00_share = 0.0;    // share of |dP'_M/df| carried by the P_x1(a00) terms
  bool tau2_negative = false;
};

namespace detail {

/// d/df at f = 1 of P(g(f), f) on a fixed sample set. Second-order one-sided.
inline std::pair<double, double> corner_slope(const SemiAnalyticModel& m, const IntervalProbs& h0,
                                              double t, double h = 1e-3) {
  const double gp = h0.zero > 0.0 ? -h0.minus / h0.zero : 0.0;
  auto at = [&](double f) {
    const double g = std::clamp(gp * (f - 1.0), 0.0, 1.0);
    return m.evaluate(g, f, t);
  };
  const PerfEstimate e0 = at(1.0), e1 = at(1.0 - h), e2 = at(1.0 - 2.0 * h);
  return {(3.0 * e0.pm - 4.0 * e1.pm + e2.pm) / (2.0 * h),
          (3.0 * e0.pf - 4.0 * e1.pf + e2.pf) / (2.0 * h)};
}

// Multinomial probability that no sensor pattern is confined to two
// consecutive intervals, i.e. both R-1 and R1 are occupied, under H1.
inline double spanning_mass(const NetworkConfig& cfg, double tau1, double tau2) {
  const auto tab = rectangle_table(cfg, cfg.rho, tau1, tau2, Hypothesis::H1);
  double s = 0.0;
  for (int nm = 1; nm <= cfg.K; ++nm)
    for (int nz = 0; nm + nz < cfg.K; ++nz) {
      const int np = cfg.K - nm - nz;
      const int c[3] = {nm, nz, np};
      s += multinomial(c) * tab->at(nm, nz);
    }
  return s;
}

inline DerivativeReport slope_report(const NetworkConfig& cfg, double tau1, double tau2, double t,
                                     PuRoute route, const EvalOptions& eval, int noise_seeds) {
  DerivativeReport r;
  r.rho = cfg.rho;
  r.tau1 = tau1;
  r.tau2 = tau2;
  r.t = t;
  const IntervalProbs h0 = interval_probs(cfg, tau1, tau2, Hypothesis::H0);
  r.rate = h0.plus + h0.minus;
  r.minus_dg_df = h0.zero > 0.0 ? h0.minus / h0.zero : 0.0;
  r.p0_ratio = r.rate / (1.0 - r.rate);
  r.spanning_mass = spanning_mass(cfg, tau1, tau2);
  r.tau2_negative = tau2 < 0.0;

  std::vector<std::pair<double, double>> d(static_cast<std::size_t>(std::max(1, noise_seeds)));
  parallel_for(d.size(), [&](std::size_t i) {
    EvalOptions e = eval;
    e.seed = eval.seed + 7919 * i;
    const SemiAnalyticModel m(cfg, tau1, tau2, route, AssumedModel::pure(cfg.rho, tau1, tau2), e);
    d[i] = corner_slope(m, h0, t);
  });
  r.dpm_df = d[0].first;
  r.dpf_df = d[0].second;
  if (d.size() > 1) {
    double mm = 0, mf = 0;
    for (const auto& [a, b] : d) {
      mm += a;
      mf += b;
    }
    mm /= d.size();
    mf /= d.size();
    double vm = 0, vf = 0;
    for (const auto& [a, b] : d) {
      vm += (a - mm) * (a - mm);
      vf += (b - mf) * (b - mf);
    }
    r.dpm_noise = 3.0 * std::sqrt(vm / (d.size() - 1));
    r.dpf_noise = 3.0 * std::sqrt(vf / (d.size() - 1));
  }
  return r;
}

}  // namespace detail

/// Closed-form corner derivatives of P'_M and P'_F, FC assuming pure censoring.
/// Only category vectors with one sensor moved between [0,-1] and [-1,0]
/// contribute at f = 1. The P_u terms come from an independent sample stream.
inline void closed_form_derivative_B(const NetworkConfig& cfg, double tau1, double tau2, double t,
                                     DerivativeReport& r, std::size_t n_mc = 20000,
                                     std::uint64_t seed = 0x5eed) {
  const int K = cfg.K;
  const IntervalProbs h0 = interval_probs(cfg, tau1, tau2, Hypothesis::H0);
  const double gp = h0.zero > 0.0 ? -h0.minus / h0.zero : 0.0;
  const auto t1 = rectangle_table(cfg, cfg.rho, tau1, tau2, Hypothesis::H1);
  const auto t0 = rectangle_table(cfg, cfg.rho, tau1, tau2, Hypothesis::H0);
  const DesignPoint design{tau1, tau2, 0.0, 1.0, t, Scheme::CRT1};
  const AssumedModel fc = AssumedModel::pure(cfg.rho, tau1, tau2);

  struct Term {
    int a1, a5;
    double c;
    ProbWithSe pu10, pu01;
  };
  std::vector<Term> terms;
  for (int a1 = 0; a1 <= K - 1; ++a1)
    for (int a5 = 0; a1 + a5 <= K - 1; ++a5)
      terms.push_back({a1, a5,
                       factorial(K) / (factorial(a1) * factorial(K - a1 - a5 - 1) * factorial(a5)),
                       {}, {}});
  parallel_for(terms.size(), [&](std::size_t i) {
    Term& tm = terms[i];
    const int z = K - tm.a1 - tm.a5 - 1;
    tm.pu10 = estimate_pu(cfg, design, CategoryVector::crt1({tm.a1, z, 1, 0, tm.a5}), fc, n_mc,
                          seed + 2 * i);
    tm.pu01 = estimate_pu(cfg, design, CategoryVector::crt1({tm.a1, z, 0, 1, tm.a5}), fc, n_mc,
                          seed + 2 * i + 1);
  });

  double dm = 0, df = 0, vm = 0, vf = 0;
  double num_m = 0, den_m = 0, num_f = 0, den_f = 0, a00_part = 0;
  for (const Term& tm : terms) {
    const int z = K - tm.a1 - tm.a5;
    const double x1_00 = t1->at(tm.a5, z), x1_01 = t1->at(tm.a5 + 1, z - 1);
    const double x0_00 = t0->at(tm.a5, z), x0_01 = t0->at(tm.a5 + 1, z - 1);
    const double diff = tm.pu10.p - tm.pu01.p;
    const double var = tm.pu10.se * tm.pu10.se + tm.pu01.se * tm.pu01.se;
    const double km = tm.c * (-x1_01 - gp * x1_00);
    const double kf = tm.c * (x0_01 + gp * x0_00);
    dm += diff * km;
    df += diff * kf;
    vm += km * km * var;
    vf += kf * kf * var;
    num_m += tm.c * diff * x1_01;
    den_m += tm.c * diff * x1_00;
    num_f += tm.c * diff * x0_01;
    den_f += tm.c * diff * x0_00;
    a00_part += std::abs(diff * tm.c * gp * x1_00);
  }
  r.closed_form = true;
  r.dpm_cf = dm;
  r.dpf_cf = df;
  r.dpm_cf_se = std::sqrt(vm);
  r.dpf_cf_se = std::sqrt(vf);
  r.gamma_m = den_m != 0.0 ? num_m / den_m : 0.0;
  r.gamma_f = den_f != 0.0 ? num_f / den_f : 0.0;
  double total = 0;
  for (const Term& tm : terms) {
    const int z = K - tm.a1 - tm.a5;
    const double diff = tm.pu10.p - tm.pu01.p;
    total += std::abs(diff * tm.c * t1->at(tm.a5 + 1, z - 1)) +
             std::abs(diff * tm.c * gp * t1->at(tm.a5, z));
  }
  r.h1_a00_share = total > 0.0 ? a00_part / total : 0.0;
}

/// Corner slopes for CRT-I with an FC that assumes pure censoring, plus the
/// closed-form values.
inline DerivativeReport check_theorem1(const NetworkConfig& cfg, double tau1_d, double tau2_d,
                                       double t_d, const EvalOptions& eval = {},
                                       int noise_seeds = 5) {
  DerivativeReport r =
      detail::slope_report(cfg, tau1_d, tau2_d, t_d, PuRoute::Symbols, eval, noise_seeds);
  closed_form_derivative_B(cfg, tau1_d, tau2_d, t_d, r, eval.n_mc_pu, eval.seed ^ 0xb5ad4eceda1ce2a9ULL);
  return r;
}

/// Corner slopes for CRT-II.
inline DerivativeReport check_theorem2(const NetworkConfig& cfg, double tau1_d, double tau2_d,
                                       double t_d, const EvalOptions& eval = {},
                                       int noise_seeds = 5) {
  return detail::slope_report(cfg, tau1_d, tau2_d, t_d, PuRoute::Realizations, eval, noise_seeds);
}

// Sign checks with the noise floor taken into account.
inline bool slope_positive(double d, double noise) { return d > noise; }
inline bool slope_zero(double d, double noise, double floor = 1e-6) {
  return std::abs(d) <= 5.0 * std::max(noise / 3.0, floor);
}

// Closed form and finite differences agree within 3 combined standard errors.
inline bool closed_form_agrees(const DerivativeReport& r) {
  if (!r.closed_form) return false;
  const double sm = std::hypot(r.dpm_noise / 3.0, r.dpm_cf_se);
  const double sf = std::hypot(r.dpf_noise / 3.0, r.dpf_cf_se);
  return std::abs(r.dpm_df - r.dpm_cf) <= 3.0 * sm + 1e-9 &&
         std::abs(r.dpf_df - r.dpf_cf) <= 3.0 * sf + 1e-9;
}

// ---------------------------------------------------------------------------

struct CorollaryRow {
  double rho = 0.0;
  double p0 = 0.0;
  Scheme scheme = Scheme::CRT2;
  CrtVariant variant = CrtVariant::MismatchedFC;
  bool cond_a = false;  // few patterns span R-1 and R1 under H1
  bool cond_b = false;  // tau2 < 0
  double spanning_mass = 0.0;
  double tau2 = 0.0;
  double f = 1.0, g = 0.0;
  double pm = 0.0, pm_pure = 0.0, pm_se = 0.0;
  bool interior = false;
  bool predicted_interior = false;
  SolveStatus status = SolveStatus::Ok;
};

inline constexpr double kSpanningThreshold = 0.01;

inline bool is_interior(double f, double tol = 1e-3) { return f > tol && f < 1.0 - tol; }

/// Solves problem (O) for one point and records whether the interior-optimum
/// conditions hold alongside what the solver found. Nothing is asserted here:
/// the conditions are sufficient, not necessary.
inline CorollaryRow corollary_row(const NetworkConfig& cfg, double p0, double beta, Scheme scheme,
                                  CrtVariant variant, const SolverOptions& opts = {}) {
  CorollaryRow row;
  row.rho = cfg.rho;
  row.p0 = p0;
  row.scheme = scheme;
  row.variant = variant;
  const PureSolution pure = solve_pure_censoring_O(cfg, p0, beta, opts);
  row.tau2 = pure.tau2;
  row.pm_pure = pure.perf.pm;
  row.spanning_mass = detail::spanning_mass(cfg, pure.tau1, pure.tau2);
  row.cond_a = row.spanning_mass < kSpanningThreshold;
  row.cond_b = pure.tau2 < 0.0;
  row.predicted_interior = scheme == Scheme::CRT2 ? (row.cond_a || row.cond_b) : row.cond_a;
  ProblemOSpec spec;
  spec.p0 = p0;
  spec.beta = beta;
  spec.scheme = scheme;
  spec.variant = variant;
  const OSolution s = solve_crt_O(cfg, spec, pure.tau1, pure.tau2, pure.t, opts);
  row.f = s.f;
  row.g = s.g;
  row.pm = s.perf.pm;
  row.pm_se = s.perf.pm_se;
  row.status = s.status;
  row.interior = is_interior(s.f);
  return row;
}

inline std::vector<CorollaryRow> check_corollaries(const NetworkConfig& base,
                                                   const std::vector<std::pair<double, double>>& rho_p0,
                                                   double beta, const SolverOptions& opts = {}) {
  std::vector<CorollaryRow> rows;
  for (const auto& [rho, p0] : rho_p0) {
    NetworkConfig cfg = base;
    cfg.rho = rho;
    cfg.validate();
    for (Scheme s : {Scheme::CRT2, Scheme::CRT1})
      rows.push_back(corollary_row(cfg, p0, beta, s, CrtVariant::MismatchedFC, opts));
  }
  return rows;
}

// ---------------------------------------------------------------------------

struct LemmaReport {
  double f_stage1 = 1.0;
  bool stage1_interior = false;
  double pm_full = 0.0, pm_full_se = 0.0;
  double pm_pure = 0.0, pm_pure_se = 0.0;
  bool holds = true;  // vacuous when stage 1 is not interior
};

/// If the fixed-t optimum is interior, the jointly optimized CRT-I point must
/// beat pure censoring.
inline LemmaReport check_lemma1(const NetworkConfig& cfg, double p0, double beta,
                                const SolverOptions& opts = {}) {
  LemmaReport r;
  const PureSolution pure = solve_pure_censoring_O(cfg, p0, beta, opts);
  r.pm_pure = pure.perf.pm;
  r.pm_pure_se = pure.perf.pm_se;
  ProblemOSpec spec;
  spec.p0 = p0;
  spec.beta = beta;
  spec.scheme = Scheme::CRT1;
  spec.variant = CrtVariant::MismatchedFC;
  const OSolution mism = solve_crt_O(cfg, spec, pure.tau1, pure.tau2, pure.t, opts);
  r.f_stage1 = mism.stage1.f_star;
  r.stage1_interior = is_interior(r.f_stage1);
  spec.variant = CrtVariant::FullSearch;
  const OSolution full = solve_crt_O(cfg, spec, pure.tau1, pure.tau2, pure.t, opts);
  r.pm_full = full.perf.pm;
  r.pm_full_se = full.perf.pm_se;
  if (r.stage1_interior)
    r.holds = r.pm_full < r.pm_pure - 3.0 * std::hypot(r.pm_full_se, r.pm_pure_se);
  return r;
}

}  // namespace censornet
