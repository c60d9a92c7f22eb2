#pragma once

// Sweeps over the numerical-study settings. Every sweep point solves all four
// scheme variants and yields one CSV row per variant; rows are produced in
// sweep order regardless of how many workers ran them.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "censornet/config.hpp"
#include "censornet/problem_o.hpp"
#include "censornet/problem_s.hpp"

namespace censornet {

struct SweepPoint {
  ProblemKind problem = ProblemKind::O;
  double snr_h_db = 5.0;
  double snr_c_db = 10.0;
  double rho = 0.5;
  double p0 = 0.4;
  double alpha = 0.1;
  double beta = 0.01;
};

struct ResultRow {
  SweepPoint point;
  std::string scheme;  // pure | crt2 | crt1_f1fc | crt1
  double rho_fc = 0.0;
  double tau1 = 0.0, tau2 = 0.0, t = 1.0, f = 1.0, g = 0.0;
  PerfEstimate perf;
  std::string status = "ok";
};

inline constexpr std::array<std::string_view, 4> kSchemeLabels{"pure", "crt2", "crt1_f1fc", "crt1"};

namespace detail {

inline ResultRow make_row(const SweepPoint& p, std::string scheme, double rho_fc, double tau1 = 0.0,
                          double tau2 = 0.0, double t = 1.0) {
  ResultRow r;
  r.point = p;
  r.scheme = std::move(scheme);
  r.rho_fc = rho_fc;
  r.tau1 = tau1;
  r.tau2 = tau2;
  r.t = t;
  return r;
}

struct Block {
  ProblemKind problem;
  std::vector<double> snr_h, snr_c, rho, p0, alpha, beta;
};

inline std::vector<Block> default_blocks(const ExperimentSpec& s) {
  using P = ProblemKind;
  const std::vector<double> rhos{0.1, 0.3, 0.5, 0.7, 0.9};
  const std::vector<double> snrh_sweep{0, 2.5, 5, 7.5, 10, 12.5, 15, 17.5, 20};
  const std::vector<double> beta_sweep{0.005, 0.01, 0.02, 0.05, 0.1};
  if (s.id == "table1") return {{P::O, {5}, {10}, {0.5, 0.7}, {0.4, 0.6, 0.8}, {0.1}, {0.01}}};
  if (s.id == "table2") return {{P::O, {10}, {10}, {0.5}, {0.4, 0.6, 0.8}, {0.1}, {0.01}}};
  if (s.id == "table3")
    return {{P::O, {5}, {10}, rhos, {0.4}, {0.1}, {0.01}},
            {P::O, {5}, {12}, {0.0}, {0.4, 0.5, 0.8}, {0.1}, {0.01}}};
  if (s.id == "table4")
    return {{P::Mismatch, {5}, {10}, {0.0, 0.1, 0.3, 0.5, 0.7, 0.9}, {0.4, 0.6, 0.8}, {0.1}, {0.01}}};
  if (s.id == "table5")
    return {{P::S, {5}, {10}, rhos, {0.4}, {0.1}, {0.01}},
            {P::S, {5}, {12}, {0.0}, {0.4}, {0.025}, {0.01}}};
  if (s.id == "fig_pm_vs_snrh") return {{P::O, snrh_sweep, {10}, {0.5}, {0.4}, {0.1}, {0.01}}};
  if (s.id == "fig_pm_vs_beta") return {{P::O, {10}, {10}, {0.5}, {0.4}, {0.1}, beta_sweep}};
  if (s.id == "fig_pt_vs_snrh") return {{P::S, snrh_sweep, {10}, {0.5}, {0.4}, {0.06}, {0.01}}};
  if (s.id == "fig_pt_vs_beta") return {{P::S, {10}, {10}, {0.5}, {0.4}, {0.06}, beta_sweep}};
  return {{s.problem, {5}, {10}, {0.5}, {0.4}, {0.1}, {0.01}}};
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8g", x);
  return buf;
}

}  // namespace detail

/// Sweep points in output order. Network values replace an experiment's own
/// values; sweep lists replace both.
inline std::vector<SweepPoint> plan_points(const ExperimentSpec& s) {
  std::vector<SweepPoint> out;
  for (detail::Block b : detail::default_blocks(s)) {
    auto pick = [](std::vector<double>& dst, const std::optional<double>& scalar,
                   const std::vector<double>& list) {
      if (scalar) dst = {*scalar};
      if (!list.empty()) dst = list;
    };
    pick(b.snr_h, s.snr_h_db, s.sweep_snr_h_db);
    pick(b.snr_c, s.snr_c_db, s.sweep_snr_c_db);
    pick(b.rho, s.rho, s.sweep_rho);
    pick(b.p0, std::nullopt, s.sweep_p0);
    pick(b.alpha, std::nullopt, s.sweep_alpha);
    pick(b.beta, std::nullopt, s.sweep_beta);
    // only the cap the problem uses is swept
    if (b.problem == ProblemKind::S) b.p0.resize(1);
    else b.alpha.resize(1);
    for (double sh : b.snr_h)
      for (double sc : b.snr_c)
        for (double r : b.rho)
          for (double p0 : b.p0)
            for (double a : b.alpha)
              for (double be : b.beta) out.push_back({b.problem, sh, sc, r, p0, a, be});
  }
  return out;
}

inline NetworkConfig network_for(const ExperimentSpec& s, const SweepPoint& p) {
  NetworkConfig cfg;
  cfg.K = s.K;
  cfg.A = s.A;
  cfg.sigma_v2 = dbm_to_watts(s.sigma_v2_dbm);
  cfg.rho = p.rho;
  cfg.set_snr_c_db(p.snr_c_db);
  cfg.set_snr_h_db(p.snr_h_db);
  cfg.validate();
  return cfg;
}

inline SolverOptions solver_options(const ExperimentSpec& s) {
  SolverOptions o;
  o.eval.n_mc_pu = s.n_mc_pu;
  o.eval.seed = s.seed;
  o.n_mc_coarse = s.n_mc_coarse;
  o.tau_grid = s.tau_grid;
  o.f_grid = s.f_grid;
  return o;
}

inline std::string status_name(SolveStatus st) { return std::string(to_string(st)); }

/// The four scheme variants for one (O) point.
inline std::vector<ResultRow> solve_point_O(const NetworkConfig& cfg, const SweepPoint& p,
                                            const SolverOptions& opts) {
  std::vector<ResultRow> rows;
  const PureSolution pure = solve_pure_censoring_O(cfg, p.p0, p.beta, opts);
  ResultRow r0{p, "pure", cfg.rho, pure.tau1, pure.tau2, pure.t, 1.0, 0.0, pure.perf,
               status_name(pure.status)};
  rows.push_back(r0);
  const std::tuple<const char*, Scheme, CrtVariant> variants[] = {
      {"crt2", Scheme::CRT2, CrtVariant::MismatchedFC},
      {"crt1_f1fc", Scheme::CRT1, CrtVariant::MismatchedFC},
      {"crt1", Scheme::CRT1, CrtVariant::FullSearch}};
  for (const auto& [label, scheme, variant] : variants) {
    ResultRow r = detail::make_row(p, label, cfg.rho, pure.tau1, pure.tau2);
    if (pure.status == SolveStatus::Infeasible) {
      r.status = "infeasible";
      rows.push_back(r);
      continue;
    }
    ProblemOSpec spec;
    spec.p0 = p.p0;
    spec.beta = p.beta;
    spec.scheme = scheme;
    spec.variant = variant;
    const OSolution s = solve_crt_O(cfg, spec, pure.tau1, pure.tau2, pure.t, opts);
    r.t = s.t;
    r.f = s.f;
    r.g = s.g;
    r.perf = s.perf;
    r.status = status_name(s.status);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<ResultRow> solve_point_S(const NetworkConfig& cfg, const SweepPoint& p,
                                            const SolverOptions& opts) {
  std::vector<ResultRow> rows;
  const PureSSolution pure = solve_pure_censoring_S(cfg, p.alpha, p.beta, opts);
  rows.push_back({p, "pure", cfg.rho, pure.tau1, pure.tau2, pure.t, 1.0, 0.0, pure.perf,
                  status_name(pure.status)});
  const std::tuple<const char*, Scheme, CrtVariant> variants[] = {
      {"crt2", Scheme::CRT2, CrtVariant::MismatchedFC},
      {"crt1_f1fc", Scheme::CRT1, CrtVariant::MismatchedFC},
      {"crt1", Scheme::CRT1, CrtVariant::FullSearch}};
  for (const auto& [label, scheme, variant] : variants) {
    ResultRow r = detail::make_row(p, label, cfg.rho, pure.tau1, pure.tau2);
    if (pure.status == SolveStatus::Infeasible) {
      r.status = "infeasible";
      rows.push_back(r);
      continue;
    }
    ProblemSSpec spec;
    spec.alpha = p.alpha;
    spec.beta = p.beta;
    spec.scheme = scheme;
    spec.variant = variant;
    const SSolution s = solve_crt_S(cfg, spec, pure.tau1, pure.tau2, pure.t, opts);
    r.t = s.t;
    r.f = s.f;
    r.g = s.g;
    r.perf = s.perf;
    r.status = status_name(s.status);
    rows.push_back(r);
  }
  return rows;
}

/// Pure censoring designed for an FC that assumes independent observations,
/// evaluated end to end under the true correlation.
inline ResultRow mismatch_row(const NetworkConfig& true_cfg, const PureSolution& design,
                              const SweepPoint& p, std::size_t n_oracle, std::uint64_t seed) {
  ResultRow r = detail::make_row(p, "pure", 0.0, design.tau1, design.tau2, design.t);
  const DesignPoint d{design.tau1, design.tau2, 0.0, 1.0, design.t, Scheme::PureCensoring};
  OracleOptions o;
  o.n_trials = n_oracle;
  o.seed = seed;
  r.perf = perf_oracle(true_cfg, d, AssumedModel::pure(0.0, design.tau1, design.tau2), o);
  r.status = status_name(design.status);
  return r;
}

struct ExperimentOutput {
  std::string id;
  std::vector<ResultRow> rows;
};

using ProgressFn = std::function<void(std::size_t index, std::size_t total, const SweepPoint&)>;

inline ExperimentOutput run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {}) {
  spec.validate();
  const std::vector<SweepPoint> pts = plan_points(spec);
  const SolverOptions opts = solver_options(spec);
  std::vector<std::vector<ResultRow>> per_point(pts.size());

  // Mismatch designs depend on everything but the true correlation.
  std::map<std::tuple<double, double, double, double>, PureSolution> designs;
  for (const auto& p : pts)
    if (p.problem == ProblemKind::Mismatch) designs[{p.snr_h_db, p.snr_c_db, p.p0, p.beta}];
  std::vector<decltype(designs)::iterator> keys;
  for (auto it = designs.begin(); it != designs.end(); ++it) keys.push_back(it);
  parallel_for(keys.size(), [&](std::size_t i) {
    const auto& [sh, sc, p0, be] = keys[i]->first;
    SweepPoint d{ProblemKind::O, sh, sc, 0.0, p0, 0.1, be};
    keys[i]->second = solve_pure_censoring_O(network_for(spec, d), p0, be, opts);
  });

  parallel_for(pts.size(), [&](std::size_t i) {
    const SweepPoint& p = pts[i];
    if (progress) progress(i, pts.size(), p);
    const NetworkConfig cfg = network_for(spec, p);
    try {
      switch (p.problem) {
        case ProblemKind::O: per_point[i] = solve_point_O(cfg, p, opts); break;
        case ProblemKind::S: per_point[i] = solve_point_S(cfg, p, opts); break;
        case ProblemKind::Mismatch:
          per_point[i] = {mismatch_row(cfg, designs.at({p.snr_h_db, p.snr_c_db, p.p0, p.beta}), p,
                                       spec.n_mc_oracle, spec.seed + 1000003 * i)};
          break;
      }
    } catch (const std::exception&) {
      ResultRow r = detail::make_row(p, "pure", p.rho);
      r.status = "error";
      per_point[i] = {r};
    }
  });

  ExperimentOutput out{spec.id, {}};
  for (auto& v : per_point)
    for (auto& r : v) out.rows.push_back(std::move(r));
  return out;
}

/// Mismatch rows with rho > 0 whose false-alarm rate does not exceed beta.
/// The study expects none.
inline std::vector<ResultRow> mismatch_violations(const ExperimentOutput& out) {
  std::vector<ResultRow> bad;
  for (const auto& r : out.rows)
    if (r.point.problem == ProblemKind::Mismatch && r.point.rho > 0.0 && r.status != "error" &&
        !(r.perf.pf > r.point.beta))
      bad.push_back(r);
  return bad;
}

inline const char* kCsvHeader =
    "experiment,problem,scheme,snr_h_db,snr_c_db,rho,rho_fc,p0,alpha,beta,tau1,tau2,t,f,g,"
    "pm,pm_se,pf,pf_se,pt,status";

inline std::string csv_row(const std::string& id, const ResultRow& r) {
  using detail::fmt;
  const SweepPoint& p = r.point;
  std::string s = id + "," + std::string(to_string(p.problem)) + "," + r.scheme;
  for (double v : {p.snr_h_db, p.snr_c_db, p.rho, r.rho_fc, p.p0, p.alpha, p.beta, r.tau1, r.tau2,
                   r.t, r.f, r.g, r.perf.pm, r.perf.pm_se, r.perf.pf, r.perf.pf_se, r.perf.pt})
    s += "," + fmt(v);
  return s + "," + r.status;
}

/// File name to CSV text. Figure experiments get one file per scheme curve.
inline std::map<std::string, std::string> to_csv_files(const ExperimentOutput& out) {
  std::map<std::string, std::string> files;
  const bool figure = out.id.rfind("fig_", 0) == 0;
  for (const ResultRow& r : out.rows) {
    const std::string name = figure ? out.id + "_" + r.scheme + ".csv" : out.id + ".csv";
    std::string& text = files[name];
    if (text.empty()) text = std::string(kCsvHeader) + "\n";
    text += csv_row(out.id, r) + "\n";
  }
  return files;
}

inline std::vector<std::string> write_csv_files(const ExperimentOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& [name, text] : to_csv_files(out)) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
    written.push_back(path.string());
  }
  return written;
}

}  // namespace censornet
