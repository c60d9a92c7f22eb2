// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// underneath. Exit status is 0 once every criterion has been evaluated;
// --strict also fails on any FAIL line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "censornet/analysis.hpp"
#include "censornet/experiments.hpp"
#include "censornet/problem_s.hpp"

using namespace censornet;

namespace {

constexpr double kBeta = 0.01;

int failures = 0;

void line(bool pass, const std::string& id, const std::string& what) {
  failures += !pass;
  std::printf("%s %-3s %s\n", pass ? "PASS" : "FAIL", id.c_str(), what.c_str());
  std::fflush(stdout);
}

template <class... A>
void note(const char* f, A... a) {
  std::printf("         ");
  std::printf(f, a...);
  std::printf("\n");
  std::fflush(stdout);
}

double combined(double a, double b) { return std::hypot(a, b); }

// Solves are shared between criteria.
class Solves {
 public:
  explicit Solves(ExperimentSpec base) : base_(std::move(base)) {}

  const std::vector<ResultRow>& get(ProblemKind k, double snr_h, double snr_c, double rho,
                                    double cap) {
    const auto key = std::make_tuple(static_cast<int>(k), snr_h, snr_c, rho, cap);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    SweepPoint p{k, snr_h, snr_c, rho, 0.4, 0.1, kBeta};
    if (k == ProblemKind::S) p.alpha = cap;
    else p.p0 = cap;
    const NetworkConfig cfg = network_for(base_, p);
    const auto t0 = std::chrono::steady_clock::now();
    auto rows = k == ProblemKind::O ? solve_point_O(cfg, p, solver_options(base_))
                                    : solve_point_S(cfg, p, solver_options(base_));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note("solved %s snr_h=%g snr_c=%g rho=%g %s=%g in %.0fs", k == ProblemKind::O ? "O" : "S", snr_h,
         snr_c, rho, k == ProblemKind::O ? "p0" : "alpha", cap, secs);
    for (const auto& r : rows)
      note("  %-9s f=%.3f g=%.3f t=%.4g pm=%.4f(%.4f) pf=%.4f(%.4f) pt=%.4f %s", r.scheme.c_str(),
           r.f, r.g, r.t, r.perf.pm, r.perf.pm_se, r.perf.pf, r.perf.pf_se, r.perf.pt,
           r.status.c_str());
    return cache_.emplace(key, std::move(rows)).first->second;
  }

  std::vector<const ResultRow*> all_rows(ProblemKind k) const {
    std::vector<const ResultRow*> out;
    for (const auto& [key, rows] : cache_)
      if (std::get<0>(key) == static_cast<int>(k))
        for (const auto& r : rows) out.push_back(&r);
    return out;
  }

  const ExperimentSpec& base() const { return base_; }

 private:
  ExperimentSpec base_;
  std::map<std::tuple<int, double, double, double, double>, std::vector<ResultRow>> cache_;
};

const ResultRow& row(const std::vector<ResultRow>& rows, const std::string& scheme) {
  for (const auto& r : rows)
    if (r.scheme == scheme) return r;
  throw std::logic_error("no row for scheme " + scheme);
}

bool at_pure_corner(const ResultRow& r) { return r.f >= 1.0 - 1e-3 && r.g <= 1e-3; }

// ---------------------------------------------------------------------------

void criterion1(Solves& s) {
  const auto& pure = row(s.get(ProblemKind::O, 5, 10, 0.5, 0.4), "pure");
  char buf[160];
  std::snprintf(buf, sizeof buf, "pure censoring (O), rho=0.5 p0=0.4: P_M=%.4f, target 0.1266 +- 0.02",
                pure.perf.pm);
  line(std::abs(pure.perf.pm - 0.1266) <= 0.02, "1", buf);
}

struct RefRow {
  double snr_h, rho, p0;
  double pure, crt2, f1fc, crt1;
};

void criterion2(Solves& s) {
  const std::vector<RefRow> cfgs{
      {5, 0.5, 0.4, 0.1266, 0.1036, 0.1260, 0.1108}, {5, 0.5, 0.6, 0.1097, 0.0742, 0.1050, 0.0846},
      {5, 0.5, 0.8, 0.0824, 0.0644, 0.0824, 0.0800}, {5, 0.7, 0.4, 0.1500, 0.1250, 0.1390, 0.1270},
      {5, 0.7, 0.6, 0.1424, 0.1144, 0.1324, 0.1189}, {5, 0.7, 0.8, 0.1132, 0.0962, 0.1100, 0.1040},
      {10, 0.5, 0.4, 0.0593, 0.0530, 0.0580, 0.0540}, {10, 0.5, 0.6, 0.0548, 0.0490, 0.0530, 0.0498},
      {10, 0.5, 0.8, 0.0426, 0.0420, 0.0426, 0.0422}};
  int bad = 0, resolved = 0, ties = 0;
  for (const auto& c : cfgs) {
    const auto& rows = s.get(ProblemKind::O, c.snr_h, 10, c.rho, c.p0);
    // lower, upper, published gap
    const std::tuple<const char*, const char*, double> pairs[] = {
        {"crt2", "crt1", c.crt1 - c.crt2},
        {"crt1", "crt1_f1fc", c.f1fc - c.crt1},
        {"crt1_f1fc", "pure", c.pure - c.f1fc}};
    for (const auto& [lo, hi, gap] : pairs) {
      const auto& a = row(rows, lo);
      const auto& b = row(rows, hi);
      const double se = combined(a.perf.pm_se, b.perf.pm_se);
      const double d = b.perf.pm - a.perf.pm;
      bool ok;
      if (gap >= 0.005) {
        ok = d > 3.0 * se;
        ++resolved;
      } else {
        ok = d >= -3.0 * se;
        ++ties;
      }
      if (!ok) {
        ++bad;
        note("snr_h=%g rho=%g p0=%g: P_M(%s)=%.4f vs P_M(%s)=%.4f, diff %.4f, 3se %.4f, published gap %.4f",
             c.snr_h, c.rho, c.p0, lo, a.perf.pm, hi, b.perf.pm, d, 3 * se, gap);
      }
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "scheme ordering on 9 reference settings: %d of %d comparisons fail "
                "(%d must be resolved, %d may tie)",
                bad, resolved + ties, resolved, ties);
  line(bad == 0, "2", buf);
}

void criterion3(Solves& s) {
  int bad = 0;
  std::string where;
  for (ProblemKind k : {ProblemKind::O, ProblemKind::S}) {
    const auto& rows = s.get(k, 5, 10, 0.1, k == ProblemKind::O ? 0.4 : 0.1);
    const auto& pure = row(rows, "pure");
    for (const char* sch : {"crt2", "crt1_f1fc", "crt1"}) {
      const auto& r = row(rows, sch);
      const bool corner = at_pure_corner(r);
      bool agree;
      if (k == ProblemKind::O)
        agree = std::abs(r.perf.pm - pure.perf.pm) <= 3.0 * combined(r.perf.pm_se, pure.perf.pm_se);
      else
        agree = std::abs(r.perf.pt - pure.perf.pt) <= 1e-9;  // P_t carries no sampling error
      if (!corner || !agree) {
        ++bad;
        where += std::string(" ") + (k == ProblemKind::O ? "O/" : "S/") + sch;
        note("%s %s: f=%.3f g=%.3f pm=%.4f pt=%.4f vs pure pm=%.4f pt=%.4f", k == ProblemKind::O ? "O" : "S",
             sch, r.f, r.g, r.perf.pm, r.perf.pt, pure.perf.pm, pure.perf.pt);
      }
    }
  }
  line(bad == 0, "3",
       "rho=0.1 reduces every CRT variant to f=1, g=0 (O p0=0.4 and S alpha=0.1)" +
           (bad ? ", off corner:" + where : std::string()));
}

void criterion4(Solves& s) {
  int bad = 0;
  for (double p0 : {0.4, 0.5, 0.8}) {
    const auto& rows = s.get(ProblemKind::O, 5, 12, 0.0, p0);
    const auto& pure = row(rows, "pure");
    for (const char* sch : {"crt1_f1fc", "crt1"}) {
      const auto& r = row(rows, sch);
      const bool ok = at_pure_corner(r) &&
                      std::abs(r.perf.pm - pure.perf.pm) <= 3.0 * combined(r.perf.pm_se, pure.perf.pm_se);
      if (!ok) {
        ++bad;
        note("O p0=%g %s: f=%.3f g=%.3f pm=%.4f vs pure %.4f", p0, sch, r.f, r.g, r.perf.pm, pure.perf.pm);
      }
    }
    const auto& c2 = row(rows, "crt2");
    if (p0 == 0.4 && !is_interior(c2.f)) {
      ++bad;
      note("O p0=0.4 crt2: f=%.4f is not interior", c2.f);
    }
    if (p0 == 0.8 && c2.f < 1.0 - 1e-3) {
      ++bad;
      note("O p0=0.8 crt2: f=%.4f, expected 1", c2.f);
    }
  }
  const auto& rows = s.get(ProblemKind::S, 5, 12, 0.0, 0.025);
  const auto& pure = row(rows, "pure");
  for (const char* sch : {"crt1_f1fc", "crt1"}) {
    const auto& r = row(rows, sch);
    if (!at_pure_corner(r) || std::abs(r.perf.pt - pure.perf.pt) > 1e-9) {
      ++bad;
      note("S alpha=0.025 %s: f=%.3f g=%.3f pt=%.4f vs pure %.4f", sch, r.f, r.g, r.perf.pt, pure.perf.pt);
    }
  }
  line(bad == 0, "4",
       "rho=0: CRT-I stays at pure censoring, CRT-II interior at p0=0.4 and f=1 at p0=0.8 (" +
           std::to_string(bad) + " violations)");
}

void criterion5(Solves& s) {
  const auto& rows = s.get(ProblemKind::S, 5, 10, 0.5, 0.1);
  const double pure = row(rows, "pure").perf.pt, c2 = row(rows, "crt2").perf.pt,
               c1 = row(rows, "crt1").perf.pt;
  const bool values = std::abs(pure - 0.3328) <= 0.03 && std::abs(c2 - 0.2533) <= 0.03 &&
                      std::abs(c1 - 0.2915) <= 0.03;
  const double i2 = 1.0 - c2 / pure, i1 = 1.0 - c1 / pure;
  const bool order = i2 > i1 && i1 > 0.0;
  note("P_t pure=%.4f (0.3328) crt2=%.4f (0.2533) crt1=%.4f (0.2915); improvement crt2 %.1f%% crt1 %.1f%%",
       pure, c2, c1, 100 * i2, 100 * i1);
  char buf[200];
  std::snprintf(buf, sizeof buf, "problem S at rho=0.5: values within 0.03 %s, improvement ordering %s",
                values ? "yes" : "no", order ? "yes" : "no");
  line(values && order, "5", buf);
}

void criterion6(const ExperimentSpec& base) {
  ExperimentSpec spec = base;
  spec.id = "table4";
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentOutput out = run_experiment(spec);
  note("table4 in %.0fs", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  int above = 0, cells = 0;
  for (const auto& r : out.rows) {
    note("  p0=%.1f rho=%.1f P_F=%.4f(%.4f) P_M=%.4f %s", r.point.p0, r.point.rho, r.perf.pf,
         r.perf.pf_se, r.perf.pm, r.status.c_str());
    if (r.point.rho > 0.0) {
      ++cells;
      above += r.perf.pf > kBeta;
    }
  }
  std::vector<const ResultRow*> row04;
  for (const auto& r : out.rows)
    if (r.point.p0 == 0.4) row04.push_back(&r);
  std::sort(row04.begin(), row04.end(),
            [](const ResultRow* a, const ResultRow* b) { return a->point.rho < b->point.rho; });
  bool monotone = true;
  for (std::size_t i = 1; i < row04.size(); ++i)
    if (row04[i]->perf.pf < row04[i - 1]->perf.pf - 3.0 * combined(row04[i]->perf.pf_se, row04[i - 1]->perf.pf_se))
      monotone = false;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "mismatch (FC assumes rho=0): %d of %d cells with P_F > 0.01, p0=0.4 row monotone %s",
                above, cells, monotone ? "yes" : "no");
  line(above == cells && monotone, "6", buf);
}

void criterion7(Solves& s) {
  const auto& hi = s.get(ProblemKind::O, 20, 10, 0.5, 0.4);
  const auto& pure = row(hi, "pure");
  int apart = 0;
  for (const char* sch : {"crt2", "crt1_f1fc", "crt1"}) {
    const auto& r = row(hi, sch);
    const double d = r.perf.pm - pure.perf.pm, se = combined(r.perf.pm_se, pure.perf.pm_se);
    note("SNR_h=20 %s: P_M diff %.5f, 3se %.5f", sch, d, 3 * se);
    apart += std::abs(d) >= 3.0 * se;
  }
  const auto& mid = s.get(ProblemKind::O, 10, 10, 0.5, 0.4);
  const double gain = 1.0 - row(mid, "crt2").perf.pm / row(mid, "pure").perf.pm;
  note("SNR_h=10 CRT-II gain %.1f%%", 100 * gain);
  const auto& shi = s.get(ProblemKind::S, 20, 10, 0.5, 0.06);
  for (const char* sch : {"crt2", "crt1_f1fc", "crt1"})
    note("SNR_h=20 problem S %s: P_t diff %.4f (no sampling error on P_t; shown for reference)", sch,
         row(shi, sch).perf.pt - row(shi, "pure").perf.pt);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "SNR_h=20: %d of 3 CRT schemes differ from pure by >= 3 SE; SNR_h=10 CRT-II gain "
                "%.1f%% (need >= 8%%)",
                apart, 100 * gain);
  line(apart == 0 && gain >= 0.08, "7", buf);
}

// ---------------------------------------------------------------------------
// Property suite

void property_a() {
  double worst = 0.0;
  for (double rho : {0.0, 0.5, 0.9})
    for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
      const auto cfg = NetworkConfig::standard(5, 10, rho);
      std::vector<Interval> a(5);
      double sum = 0.0;
      for (int code = 0; code < 243; ++code) {
        int c = code;
        for (int k = 0; k < 5; ++k, c /= 3) a[k] = static_cast<Interval>(c % 3 - 1);
        sum += rectangle_prob(cfg, 0.4, -0.2, std::span<const Interval>(a), h);
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  const auto cfg = NetworkConfig::standard(5, 10, 0.6);
  const std::size_t n = 100000;
  int outside = 0, cells = 0;
  for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
    const auto xs = sample_observations(cfg, h, n, 2);
    std::vector<double> hits(36, 0.0);
    for (const auto& x : xs) {
      int nm = 0, nz = 0;
      for (double v : x) {
        const auto d = classify_observation(v, 0.35, -0.15);
        nm += d == Interval::Minus;
        nz += d == Interval::Zero;
      }
      hits[nm * 6 + nz] += 1;
    }
    const auto tab = rectangle_table(cfg, 0.6, 0.35, -0.15, h);
    for (int nm = 0; nm <= 5; ++nm)
      for (int nz = 0; nm + nz <= 5; ++nz) {
        const int c[3] = {nm, nz, 5 - nm - nz};
        const double p = multinomial(c) * tab->at(nm, nz);
        ++cells;
        outside += std::abs(hits[nm * 6 + nz] / n - p) > 3.0 * std::sqrt(p * (1 - p) / n) + 1e-12;
      }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "rectangle completeness max error %.2e (1e-9); MC cells outside 3 SE: %d of %d", worst,
                outside, cells);
  line(worst <= 1e-9 && outside == 0, "8a", buf);
}

void property_b() {
  double worst = 0.0;
  auto run = [&](int K, bool crt2) {
    for (double rho : {0.0, 0.5, 0.9}) {
      auto cfg = NetworkConfig::standard(5, 10, rho);
      cfg.K = K;
      const double tau1 = 0.4, tau2 = -0.15, g = 0.3, f = 0.65;
      const AssumedModel am = crt2 ? AssumedModel::pure(rho, tau1, tau2) : AssumedModel{rho, g, f, tau1, tau2};
      const FusionModel fc(cfg, am);
      for (std::uint32_t i = 0; i < 20; ++i) {
        RandomStream rng(17, hash_label("acceptance-lr"), i);
        const double sh = std::sqrt(cfg.sigma_h2 / 2), sv = std::sqrt(cfg.sigma_v2 / 2);
        std::vector<cplx> h(K), y(K);
        std::vector<std::uint8_t> rf(K), rg(K);
        for (int k = 0; k < K; ++k) {
          h[k] = {sh * rng.normal(), sh * rng.normal()};
          const int u = static_cast<int>(rng.uniform() * 3) - 1;
          y[k] = double(u) * h[k] + cplx(sv * rng.normal(), sv * rng.normal());
          rf[k] = rng.bernoulli(0.5);
          rg[k] = rng.bernoulli(0.5);
        }
        int total = 1;
        for (int k = 0; k < K; ++k) total *= 3;
        double num = 0, den = 0;
        std::vector<Interval> a(K);
        for (int code = 0; code < total; ++code) {
          int c = code;
          for (int k = 0; k < K; ++k, c /= 3) a[k] = static_cast<Interval>(c % 3 - 1);
          double prod = 1.0;
          for (int k = 0; k < K; ++k) {
            auto dens = [&](int u) { return symbol_likelihood(y[k], u, h[k], cfg.sigma_v2); };
            if (crt2) prod *= dens(map_symbol(a[k], rg[k] != 0, rf[k] != 0));
            else if (a[k] == Interval::Plus) prod *= dens(1);
            else if (a[k] == Interval::Zero) prod *= (1 - g) * dens(0) + g * dens(-1);
            else prod *= (1 - f) * dens(0) + f * dens(-1);
          }
          num += rectangle_prob(cfg, tau1, tau2, std::span<const Interval>(a), Hypothesis::H1) * prod;
          den += rectangle_prob(cfg, tau1, tau2, std::span<const Interval>(a), Hypothesis::H0) * prod;
        }
        const double l = crt2 ? fc.log_lr_crt2(y, h, rf, rg) : fc.log_lr_crt1(y, h);
        worst = std::max(worst, std::abs(std::exp(l) / (num / den) - 1.0));
      }
    }
  };
  for (int K : {1, 2, 3}) run(K, false);
  for (int K : {1, 2}) run(K, true);
  char buf[160];
  std::snprintf(buf, sizeof buf, "collapsed LR vs literal sums: max relative error %.2e (1e-10)", worst);
  line(worst <= 1e-10, "8b", buf);
}

void property_c() {
  int bad = 0, total = 0;
  for (Scheme scheme : {Scheme::PureCensoring, Scheme::CRT1, Scheme::CRT2}) {
    RandomStream rng(2024, hash_label("acceptance-designs"), static_cast<std::uint32_t>(scheme));
    for (int i = 0; i < 20; ++i) {
      const double rho = 0.9 * rng.uniform();
      const auto cfg = NetworkConfig::standard(2.0 + 10.0 * rng.uniform(), 10, rho);
      const double tau2 = -0.5 + 0.7 * rng.uniform();
      const double tau1 = tau2 + 0.1 + 0.5 * rng.uniform();
      const double g = scheme == Scheme::PureCensoring ? 0.0 : rng.uniform();
      const double f = scheme == Scheme::PureCensoring ? 1.0 : rng.uniform();
      const double beta = 0.005 + 0.1 * rng.uniform();
      const bool matched = scheme == Scheme::CRT1 && i % 2 == 0;
      const AssumedModel am = matched ? AssumedModel{rho, g, f, tau1, tau2} : AssumedModel::pure(rho, tau1, tau2);
      EvalOptions e;
      e.n_mc_pu = 6000;
      e.seed = 300 + i;
      const SemiAnalyticModel m(cfg, tau1, tau2, scheme == Scheme::CRT2 ? PuRoute::Realizations : PuRoute::Symbols,
                                am, e);
      const double t = m.t_for_pf(g, f, beta);
      const auto sa = m.evaluate(g, f, t);
      OracleOptions o;
      o.n_trials = 60000;
      o.seed = 700 + i;
      const auto orc = perf_oracle(cfg, DesignPoint{tau1, tau2, g, f, t, scheme}, am, o);
      total += 2;
      for (auto [x, y, sx, sy] : {std::tuple{sa.pm, orc.pm, sa.pm_se, orc.pm_se},
                                  std::tuple{sa.pf, orc.pf, sa.pf_se, orc.pf_se}})
        if (std::abs(x - y) > 3.0 * combined(sx, sy)) {
          ++bad;
          note("%s design %d: semi-analytic %.5f vs oracle %.5f (3se %.5f)",
               std::string(to_string(scheme)).c_str(), i, x, y, 3 * combined(sx, sy));
        }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "semi-analytic vs end-to-end oracle: %d of %d comparisons outside 3 SE",
                bad, total);
  line(bad == 0, "8c", buf);
}

void property_d() {
  RandomStream rng(1, hash_label("acceptance-agm"), 0);
  int violations = 0, checked = 0;
  double worst_eq = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Posynomial den;
    for (int i = 0; i < 2 + trial % 5; ++i)
      den.push_back({0.05 + 2 * rng.uniform(), 6 * rng.uniform() - 3, 6 * rng.uniform() - 3});
    const double g0 = 0.01 + 0.99 * rng.uniform(), f0 = 0.01 + 0.99 * rng.uniform();
    const auto cc = condense_agm(den, g0, f0);
    worst_eq = std::max(worst_eq, std::abs(cc.denominator.eval(g0, f0) / eval(den, g0, f0) - 1.0));
    for (int i = 0; i < 100; ++i, ++checked) {
      const double g = 1e-3 + rng.uniform(), f = 1e-3 + rng.uniform();
      violations += cc.denominator.eval(g, f) > eval(den, g, f) * (1 + 1e-12);
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "AGM condensation: %d of %d points violate the bound, equality error %.1e",
                violations, checked, worst_eq);
  line(violations == 0 && worst_eq <= 1e-10, "8d", buf);
}

void property_e(Solves& s) {
  s.get(ProblemKind::S, 5, 10, 0.5, 0.1);
  const SolverOptions opts = solver_options(s.base());
  int iterates = 0, broken = 0;
  // every problem-S point solved so far, both GP-based schemes
  for (const ResultRow* r : s.all_rows(ProblemKind::S)) {
    if (r->scheme != "pure") continue;
    const NetworkConfig c = network_for(s.base(), r->point);
    for (Scheme sch : {Scheme::CRT2, Scheme::CRT1}) {
      ProblemSSpec spec;
      spec.scheme = sch;
      spec.alpha = r->point.alpha;
      spec.beta = r->point.beta;
      const SSolution sol = solve_crt_S(c, spec, r->tau1, r->tau2, r->t, opts);
      for (const auto& it : sol.trace) {
        ++iterates;
        broken += !it.chain_ok;
      }
    }
  }
  const auto& pure = row(s.get(ProblemKind::S, 5, 10, 0.5, 0.1), "pure");
  const NetworkConfig cfg = NetworkConfig::standard(5, 10, 0.5);
  const SemiAnalyticModel m(cfg, pure.tau1, pure.tau2, PuRoute::Realizations,
                            AssumedModel::pure(0.5, pure.tau1, pure.tau2), opts.eval);
  RandomStream rng(5, hash_label("acceptance-dominance"), 0);
  int below = 0;
  for (bool miss : {true, false}) {
    const BasisPolynomial p = m.basis(miss, pure.t);
    const Posynomial d = dominating_posynomial(p);
    for (int i = 0; i < 1000; ++i) {
      const double g = 1e-3 + (1 - 1e-3) * rng.uniform(), f = 1e-3 + (1 - 1e-3) * rng.uniform();
      below += eval(d, g, f) < p.eval(g, f) * (1 - 1e-12);
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "feasibility chain broken at %d of %d GP iterates; dominance violated at %d of 2000 points",
                broken, iterates, below);
  line(broken == 0 && below == 0 && iterates > 0, "8e", buf);
}

void property_f(Solves& s) {
  const SolverOptions opts = solver_options(s.base());
  int pf_fail = 0, t2_fail = 0, t2_applies = 0, cf_fail = 0;
  for (double rho : {0.0, 0.3, 0.5, 0.7, 0.9}) {
    const NetworkConfig cfg = NetworkConfig::standard(5, 10, rho);
    const PureSolution pure = solve_pure_censoring_O(cfg, 0.4, kBeta, opts);
    const DerivativeReport t1 = check_theorem1(cfg, pure.tau1, pure.tau2, pure.t, opts.eval);
    const DerivativeReport t2 = check_theorem2(cfg, pure.tau1, pure.tau2, pure.t, opts.eval);
    const bool pf_ok = slope_positive(t1.dpf_df, t1.dpf_noise);
    const bool cf_ok = closed_form_agrees(t1);
    bool t2_ok = true;
    if (t2.tau2_negative) {
      ++t2_applies;
      t2_ok = slope_positive(t2.dpm_df, t2.dpm_noise) && slope_positive(t2.dpf_df, t2.dpf_noise);
    }
    pf_fail += !pf_ok;
    cf_fail += !cf_ok;
    t2_fail += !t2_ok;
    note("rho=%.1f tau2=%+.3f CRT-I dPF=%.5f (noise %.5f) %s | closed form dPM=%.5f dPF=%.5f %s | "
         "CRT-II dPM=%.5f (%.5f) dPF=%.5f (%.5f) %s",
         rho, pure.tau2, t1.dpf_df, t1.dpf_noise, pf_ok ? "ok" : "FAIL", t1.dpm_cf, t1.dpf_cf,
         cf_ok ? "ok" : "FAIL", t2.dpm_df, t2.dpm_noise, t2.dpf_df, t2.dpf_noise,
         t2.tau2_negative ? (t2_ok ? "ok" : "FAIL") : "n/a");
  }
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "corner slopes: CRT-I dP'_F/df > 0 fails at %d of 5 rho; CRT-II signs fail at %d of %d "
                "with tau2<0; closed form disagrees at %d of 5",
                pf_fail, t2_fail, t2_applies, cf_fail);
  line(pf_fail == 0 && t2_fail == 0 && cf_fail == 0, "8f", buf);
}

void property_g(Solves& s) {
  int bad = 0, total = 0;
  for (const ResultRow* r : s.all_rows(ProblemKind::O)) {
    ++total;
    if (std::abs(r->perf.pf - r->point.beta) >= std::max(1e-4, 2.0 * r->perf.pf_se)) {
      ++bad;
      note("O row %s rho=%g p0=%g: P_F=%.5f (se %.5f)", r->scheme.c_str(), r->point.rho, r->point.p0,
           r->perf.pf, r->perf.pf_se);
    }
  }
  for (const ResultRow* r : s.all_rows(ProblemKind::S)) {
    ++total;
    if (r->perf.pf - r->point.beta >= std::max(1e-4, 2.0 * r->perf.pf_se)) {
      ++bad;
      note("S row %s rho=%g: P_F=%.5f above beta", r->scheme.c_str(), r->point.rho, r->perf.pf);
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "threshold contract |P_F - beta| < max(1e-4, 2 se): %d of %d rows fail",
                bad, total);
  line(bad == 0, "8g", buf);
}

void property_h() {
  ExperimentSpec spec;
  spec.id = "custom";
  spec.n_mc_pu = 400;
  spec.n_mc_coarse = 200;
  spec.tau_grid = 11;
  spec.f_grid = 5;
  spec.sweep_p0 = {0.4, 0.8};
  const int before = workers();
  set_workers(1);
  const auto a = to_csv_files(run_experiment(spec));
  set_workers(3);
  const auto b = to_csv_files(run_experiment(spec));
  set_workers(before);
  line(a == b, "8h", "identical CSV output with 1 and 3 workers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  bool strict = false;
  std::vector<std::string> only;
  app.add_flag("--strict", strict, "exit non-zero when any criterion fails");
  app.add_option("--only", only, "run only these criteria (1..7, 8a..8h)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::set<std::string> pick(only.begin(), only.end());
  auto want = [&](const std::string& id) { return pick.empty() || pick.count(id) > 0; };

  Solves solves{ExperimentSpec{}};
  const std::vector<std::pair<std::string, std::function<void()>>> steps{
      {"1", [&] { criterion1(solves); }},  {"2", [&] { criterion2(solves); }},
      {"3", [&] { criterion3(solves); }},  {"4", [&] { criterion4(solves); }},
      {"5", [&] { criterion5(solves); }},  {"6", [&] { criterion6(solves.base()); }},
      {"7", [&] { criterion7(solves); }},  {"8a", property_a},
      {"8b", property_b},                  {"8c", property_c},
      {"8d", property_d},                  {"8e", [&] { property_e(solves); }},
      {"8f", [&] { property_f(solves); }}, {"8g", [&] { property_g(solves); }},
      {"8h", property_h}};

  int errors = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& [id, fn] : steps) {
    if (!want(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      ++errors;
      std::printf("ERROR %-3s %s\n", id.c_str(), e.what());
    }
    note("(%s took %.0fs)", id.c_str(),
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::printf("%d failing, %d errors, %.0fs total\n", failures, errors,
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  if (errors) return 2;
  return strict && failures ? 1 : 0;
}
