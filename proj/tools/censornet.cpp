// censornet: run the numerical study, solve single points, check the
// analytical derivative claims.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "censornet/analysis.hpp"
#include "censornet/experiments.hpp"

using namespace censornet;

namespace {

struct PointArgs {
  double snr_h = 5, snr_c = 10, rho = 0.5, p0 = 0.4, alpha = 0.1, beta = 0.01;
  std::size_t n_mc_pu = 20000;
  std::uint64_t seed = 1;
};

void add_point_options(CLI::App* app, PointArgs& a, bool with_alpha) {
  app->add_option("--snr-h", a.snr_h, "channel SNR in dB")->capture_default_str();
  app->add_option("--snr-c", a.snr_c, "observation SNR in dB")->capture_default_str();
  app->add_option("--rho", a.rho, "noise correlation")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
  if (with_alpha)
    app->add_option("--alpha", a.alpha, "miss-detection cap")->capture_default_str();
  else
    app->add_option("--p0", a.p0, "transmission budget")->capture_default_str();
  app->add_option("--beta", a.beta, "false-alarm cap")->capture_default_str();
  app->add_option("--n-mc-pu", a.n_mc_pu, "samples per fusion class")->capture_default_str();
  app->add_option("--seed", a.seed)->capture_default_str();
}

int solve_single(const PointArgs& a, ProblemKind kind) {
  ExperimentSpec spec;
  spec.n_mc_pu = a.n_mc_pu;
  spec.seed = a.seed;
  const SweepPoint p{kind, a.snr_h, a.snr_c, a.rho, a.p0, a.alpha, a.beta};
  const NetworkConfig cfg = network_for(spec, p);
  const auto rows = kind == ProblemKind::O ? solve_point_O(cfg, p, solver_options(spec))
                                           : solve_point_S(cfg, p, solver_options(spec));
  std::cout << kCsvHeader << "\n";
  const std::string id = kind == ProblemKind::O ? "solve-o" : "solve-s";
  for (const auto& r : rows) std::cout << csv_row(id, r) << "\n";
  return 0;
}

std::string flag(bool b) { return b ? "pass" : "FAIL"; }

int verify(const std::vector<double>& rhos, double p0, double snr_h, double snr_c,
           std::size_t n, const std::string& out_dir) {
  std::ostringstream csv;
  csv << "rho,tau2,spanning_mass,t1_dpm,t1_dpm_noise,t1_dpf,t1_dpf_noise,cf_dpm,cf_dpm_se,cf_dpf,"
         "cf_dpf_se,gamma_f,p0_ratio,minus_dg_df,t2_dpm,t2_dpf,t2_noise_m,t2_noise_f,"
         "crt1_pf_rising,crt1_pm_flat,closed_form,crt2_signs\n";
  int failures = 0;
  for (double rho : rhos) {
    NetworkConfig cfg = NetworkConfig::standard(snr_h, snr_c, rho);
    SolverOptions opts;
    opts.eval.n_mc_pu = n;
    const PureSolution pure = solve_pure_censoring_O(cfg, p0, 0.01, opts);
    const DerivativeReport t1 = check_theorem1(cfg, pure.tau1, pure.tau2, pure.t, opts.eval);
    const DerivativeReport t2 = check_theorem2(cfg, pure.tau1, pure.tau2, pure.t, opts.eval);
    const bool pf_pos = slope_positive(t1.dpf_df, t1.dpf_noise);
    const bool pm_zero_applies = t1.spanning_mass < kSpanningThreshold;
    const bool pm_zero = !pm_zero_applies || slope_zero(t1.dpm_df, t1.dpm_noise);
    const bool cf = closed_form_agrees(t1);
    const bool t2_applies = t2.tau2_negative;
    const bool t2_ok = !t2_applies || (slope_positive(t2.dpm_df, t2.dpm_noise) &&
                                       slope_positive(t2.dpf_df, t2.dpf_noise));
    failures += !pf_pos + !pm_zero + !cf + !t2_ok;
    std::printf(
        "rho=%.2f  tau2=%+.3f  spanning=%.4f\n"
        "  CRT-I slope at f=1: dPM=%.5f (noise %.5f) dPF=%.5f (noise %.5f)\n"
        "  closed form:        dPM=%.5f (se %.5f)    dPF=%.5f (se %.5f)\n"
        "  gamma_F=%.4f  P_t/(1-P_t)=%.4f  -dg/df=%.4f\n"
        "  CRT-II slope:       dPM=%.5f dPF=%.5f\n"
        "  dPF>0 %s | dPM~0 %s | closed form %s | CRT-II %s\n",
        rho, pure.tau2, t1.spanning_mass, t1.dpm_df, t1.dpm_noise, t1.dpf_df, t1.dpf_noise,
        t1.dpm_cf, t1.dpm_cf_se, t1.dpf_cf, t1.dpf_cf_se, t1.gamma_f, t1.p0_ratio, t1.minus_dg_df,
        t2.dpm_df, t2.dpf_df, flag(pf_pos).c_str(),
        pm_zero_applies ? flag(pm_zero).c_str() : "n/a", flag(cf).c_str(),
        t2_applies ? flag(t2_ok).c_str() : "n/a");
    std::fflush(stdout);
    auto f = [](double x) { return detail::fmt(x); };
    csv << f(rho) << "," << f(pure.tau2) << "," << f(t1.spanning_mass) << "," << f(t1.dpm_df)
        << "," << f(t1.dpm_noise) << "," << f(t1.dpf_df) << "," << f(t1.dpf_noise) << ","
        << f(t1.dpm_cf) << "," << f(t1.dpm_cf_se) << "," << f(t1.dpf_cf) << ","
        << f(t1.dpf_cf_se) << "," << f(t1.gamma_f) << "," << f(t1.p0_ratio) << ","
        << f(t1.minus_dg_df) << "," << f(t2.dpm_df) << "," << f(t2.dpf_df) << ","
        << f(t2.dpm_noise) << "," << f(t2.dpf_noise) << "," << (pf_pos ? "pass" : "fail") << ","
        << (pm_zero_applies ? (pm_zero ? "pass" : "fail") : "unmet") << ","
        << (cf ? "pass" : "fail") << "," << (t2_applies ? (t2_ok ? "pass" : "fail") : "unmet")
        << "\n";
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream(std::filesystem::path(out_dir) / "verify.csv") << csv.str();
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Censoring and randomized transmission for correlated sensor networks"};
  app.require_subcommand(1);
  int n_workers = 0;
  app.add_option("--workers", n_workers, "worker threads (default: CENSORNET_WORKERS or all cores)");

  ExperimentSpec spec;
  std::string config_path, id, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_oracle, n_pu;
  auto* run = app.add_subcommand("run", "run one experiment and write CSV files");
  run->add_option("experiment", id, "experiment id (optional when the config names one)");
  run->add_option("--config", config_path, "config file");
  run->add_option("--seed", seed);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--n-mc-oracle", n_oracle, "end-to-end trials for mismatch rows");
  run->add_option("--n-mc-pu", n_pu, "samples per fusion class");
  run->add_option("--workers", n_workers);
  bool print_config = false;
  run->add_flag("--print-config", print_config, "print the effective settings and exit");

  PointArgs po, ps;
  auto* solve_o = app.add_subcommand("solve-o", "minimize P_M under P_F and rate caps at one point");
  add_point_options(solve_o, po, false);
  auto* solve_s = app.add_subcommand("solve-s", "minimize P_t under P_M and P_F caps at one point");
  add_point_options(solve_s, ps, true);

  std::vector<double> v_rho{0.0, 0.3, 0.5, 0.7, 0.9};
  double v_p0 = 0.4, v_snr_h = 5, v_snr_c = 10;
  std::size_t v_n = 20000;
  std::string v_out = "results";
  auto* ver = app.add_subcommand("verify", "derivative signs at the pure-censoring corner");
  ver->add_option("--rho", v_rho)->delimiter(',')->capture_default_str();
  ver->add_option("--p0", v_p0)->capture_default_str();
  ver->add_option("--snr-h", v_snr_h)->capture_default_str();
  ver->add_option("--snr-c", v_snr_c)->capture_default_str();
  ver->add_option("--n-mc-pu", v_n)->capture_default_str();
  ver->add_option("--out", v_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (!config_path.empty()) spec = load_config(config_path);
      if (!id.empty()) {
        if (!config_path.empty() && spec.id != "custom" && spec.id != id)
          std::cerr << "note: command line experiment '" << id << "' overrides '" << spec.id
                    << "' from the config\n";
        spec.id = id;
      }
      if (id.empty() && config_path.empty()) {
        std::cerr << "run: give an experiment id or a --config file\n";
        return 2;
      }
      if (seed) spec.seed = *seed;
      if (!out_dir.empty()) spec.out_dir = out_dir;
      if (n_oracle) spec.n_mc_oracle = *n_oracle;
      if (n_pu) spec.n_mc_pu = *n_pu;
      if (n_workers > 0) spec.workers = n_workers;
      spec.validate();
      if (print_config) {
        std::cout << to_config_text(spec);
        return 0;
      }
      if (spec.workers > 0) set_workers(spec.workers);
      const auto out = run_experiment(spec, [](std::size_t i, std::size_t n, const SweepPoint& p) {
        std::fprintf(stderr, "[%zu/%zu] %s snr_h=%g snr_c=%g rho=%g p0=%g alpha=%g beta=%g\n", i + 1,
                     n, std::string(to_string(p.problem)).c_str(), p.snr_h_db, p.snr_c_db, p.rho,
                     p.p0, p.alpha, p.beta);
      });
      for (const auto& path : write_csv_files(out, spec.out_dir)) std::cout << path << "\n";
      const auto bad = mismatch_violations(out);
      for (const auto& r : bad)
        std::cerr << "mismatch check failed: rho=" << r.point.rho << " p0=" << r.point.p0
                  << " P_F=" << r.perf.pf << " does not exceed beta=" << r.point.beta << "\n";
      return bad.empty() ? 0 : 3;
    }
    if (n_workers > 0) set_workers(n_workers);
    if (*solve_o) return solve_single(po, ProblemKind::O);
    if (*solve_s) return solve_single(ps, ProblemKind::S);
    if (*ver) return verify(v_rho, v_p0, v_snr_h, v_snr_c, v_n, v_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
