#pragma once

// P_M, P_F and P_t for every scheme, by two independent routes:
//
//  * semi-analytic: multinomial category sums weighted by rectangle
//    probabilities, with the conditional alarm probability P_u of each
//    category estimated by Monte Carlo over the channel;
//  * oracle: the whole chain (observation, quantizer, randomization, fading,
//    fusion) simulated end to end.
//
// P_u only depends on what the FC can tell apart. For pure censoring and
// CRT-I that is the multiset of transmitted symbols; for CRT-II it is the
// multiset of (r_f, r_g, symbol) triples. The Monte-Carlo samples of each such
// class are kept as sorted log-LR values, so P_u(t) for any t is a binary
// search and bisection on t is cheap and smooth across calls.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "censornet/correlated_gaussian.hpp"
#include "censornet/fusion_rules.hpp"
#include "censornet/network_model.hpp"
#include "censornet/parallel.hpp"
#include "censornet/rng.hpp"

namespace censornet {

// ---------------------------------------------------------------------------
// Combinatorics

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline double multinomial(std::span<const int> counts) {
  int total = 0;
  double denom = 1.0;
  for (int c : counts) {
    total += c;
    denom *= factorial(c);
  }
  return factorial(total) / denom;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(factorial(n) / (factorial(k) * factorial(n - k)));
}

/// All vectors of `parts` non-negative integers summing to `total`, in
/// lexicographic order.
inline std::vector<std::vector<int>> compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(parts), 0);
  auto rec = [&](auto&& self, int idx, int left) -> void {
    if (idx == parts - 1) {
      cur[idx] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[idx] = v;
      self(self, idx + 1, left - v);
    }
  };
  if (parts > 0) rec(rec, 0, total);
  return out;
}

// ---------------------------------------------------------------------------
// Categories

/// Per-sensor category: the interval, the transmitted symbol and (CRT-II only)
/// the Bernoulli realizations.
struct SensorCategory {
  Interval interval;
  int symbol;
  std::uint8_t r_f;
  std::uint8_t r_g;
};

// CRT-I: [1,1], [0,0], [0,-1], [-1,0], [-1,-1].
inline constexpr std::array<SensorCategory, 5> kCrt1Categories{{
    {Interval::Plus, 1, 0, 0},
    {Interval::Zero, 0, 0, 0},
    {Interval::Zero, -1, 0, 0},
    {Interval::Minus, 0, 0, 0},
    {Interval::Minus, -1, 0, 0},
}};

// CRT-II in the order 1_1, 1_0, 2_1, 2_0, ..., 6_1, 6_0, where
// 1_m = [1, 1, m], 2_m = [0, m, 0], 3_m = [0, m, 1], 4_m = [-1, 0, m],
// 5_m = [-1, 1, m], 6_m = [1, 0, m] as (interval, r_f, r_g).
inline constexpr std::array<SensorCategory, 12> kCrt2Categories = [] {
  struct Raw {
    Interval d;
    int rf_is_m;  // 1: r_f = m, 0: fixed
    int rf_fixed;
    int rg_is_m;
    int rg_fixed;
  };
  constexpr Raw raw[6] = {
      {Interval::Plus, 0, 1, 1, 0},  {Interval::Zero, 1, 0, 0, 0},  {Interval::Zero, 1, 0, 0, 1},
      {Interval::Minus, 0, 0, 1, 0}, {Interval::Minus, 0, 1, 1, 0}, {Interval::Plus, 0, 0, 1, 0},
  };
  std::array<SensorCategory, 12> out{};
  for (int l = 0; l < 6; ++l)
    for (int mi = 0; mi < 2; ++mi) {
      const int m = 1 - mi;
      const auto rf = static_cast<std::uint8_t>(raw[l].rf_is_m ? m : raw[l].rf_fixed);
      const auto rg = static_cast<std::uint8_t>(raw[l].rg_is_m ? m : raw[l].rg_fixed);
      out[2 * l + mi] = {raw[l].d, map_symbol(raw[l].d, rg != 0, rf != 0), rf, rg};
    }
  return out;
}();

struct CategoryVector {
  enum class Kind { CRT1, CRT2 };
  Kind kind = Kind::CRT1;
  std::vector<int> counts;

  static CategoryVector crt1(std::vector<int> a) { return {Kind::CRT1, std::move(a)}; }
  static CategoryVector crt2(std::vector<int> a) { return {Kind::CRT2, std::move(a)}; }

  std::span<const SensorCategory> categories() const noexcept {
    if (kind == Kind::CRT1) return kCrt1Categories;
    return kCrt2Categories;
  }

  int total() const noexcept { return std::accumulate(counts.begin(), counts.end(), 0); }

  void validate(int K) const {
    if (counts.size() != categories().size())
      throw std::invalid_argument("CategoryVector: wrong number of categories");
    for (int c : counts)
      if (c < 0) throw std::invalid_argument("CategoryVector: negative count");
    if (total() != K) throw std::invalid_argument("CategoryVector: counts must sum to K");
  }

  IntervalCounts intervals() const {
    IntervalCounts ic;
    auto cats = categories();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (cats[i].interval == Interval::Minus) ic.minus += counts[i];
      else if (cats[i].interval == Interval::Zero) ic.zero += counts[i];
      else ic.plus += counts[i];
    }
    return ic;
  }

  int a_g() const {
    if (kind != Kind::CRT2) throw std::logic_error("a_g is defined for CRT-II categories");
    int s = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) s += kCrt2Categories[i].r_g * counts[i];
    return s;
  }
  int a_f() const {
    if (kind != Kind::CRT2) throw std::logic_error("a_f is defined for CRT-II categories");
    int s = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) s += kCrt2Categories[i].r_f * counts[i];
    return s;
  }

  /// One sensor per row, categories in order (the C^a matrix).
  std::vector<SensorCategory> expand() const {
    std::vector<SensorCategory> rows;
    auto cats = categories();
    for (std::size_t i = 0; i < counts.size(); ++i)
      for (int j = 0; j < counts[i]; ++j) rows.push_back(cats[i]);
    return rows;
  }
};

// ---------------------------------------------------------------------------
// Observable classes and conditional alarm probabilities

enum class PuRoute { Symbols, Realizations };

/// An observable type the FC distinguishes.
struct ObservableType {
  int symbol;
  std::uint8_t r_f;
  std::uint8_t r_g;
};

inline std::vector<ObservableType> observable_types(PuRoute route) {
  std::vector<ObservableType> out;
  if (route == PuRoute::Symbols) {
    for (int u : {-1, 0, 1}) out.push_back({u, 0, 0});
    return out;
  }
  for (std::uint8_t rf = 0; rf < 2; ++rf)
    for (std::uint8_t rg = 0; rg < 2; ++rg) {
      std::vector<int> seen;
      for (Interval d : {Interval::Minus, Interval::Zero, Interval::Plus}) {
        const int u = map_symbol(d, rg != 0, rf != 0);
        if (std::find(seen.begin(), seen.end(), u) == seen.end()) seen.push_back(u);
      }
      std::sort(seen.begin(), seen.end());
      for (int u : seen) out.push_back({u, rf, rg});
    }
  return out;
}

inline int type_index(PuRoute route, const SensorCategory& c) {
  const auto types = observable_types(route);
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (types[i].symbol != c.symbol) continue;
    if (route == PuRoute::Symbols || (types[i].r_f == c.r_f && types[i].r_g == c.r_g))
      return static_cast<int>(i);
  }
  throw std::logic_error("type_index: category has no observable type");
}

struct ProbWithSe {
  double p = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Sorted Monte-Carlo log-LR samples per observable class.
class PuTable {
 public:
  PuTable(PuRoute route, int K) : route_(route), K_(K), types_(observable_types(route)) {
    for (auto& comp : compositions(K, static_cast<int>(types_.size()))) {
      index_.emplace(comp, static_cast<int>(classes_.size()));
      classes_.push_back(std::move(comp));
    }
    samples_.resize(classes_.size());
  }

  PuRoute route() const noexcept { return route_; }
  int K() const noexcept { return K_; }
  std::size_t size() const noexcept { return classes_.size(); }
  const std::vector<int>& class_counts(int c) const { return classes_[c]; }
  const std::vector<ObservableType>& types() const noexcept { return types_; }

  int class_of(std::span<const SensorCategory> rows) const {
    std::vector<int> counts(types_.size(), 0);
    for (const auto& r : rows) ++counts[type_index(route_, r)];
    return index_.at(counts);
  }

  static std::uint64_t class_stream(PuRoute route, const std::vector<int>& counts) {
    std::uint64_t h = hash_label(route == PuRoute::Symbols ? "pu-symbols" : "pu-realizations");
    for (int c : counts) h = hash_combine(h, static_cast<std::uint64_t>(c));
    return h;
  }

  /// Draws n channel realizations for class c and stores the sorted log-LRs.
  static std::vector<float> sample_class(const std::vector<int>& counts,
                                         const std::vector<ObservableType>& types, PuRoute route,
                                         const NetworkConfig& cfg, const FusionModel& fc,
                                         std::size_t n, std::uint64_t seed) {
    const int K = cfg.K;
    std::vector<ObservableType> rows;
    for (std::size_t t = 0; t < types.size(); ++t)
      for (int j = 0; j < counts[t]; ++j) rows.push_back(types[t]);
    std::vector<cplx> h(K), y(K);
    std::vector<std::uint8_t> rf(K), rg(K);
    for (int k = 0; k < K; ++k) {
      rf[k] = rows[k].r_f;
      rg[k] = rows[k].r_g;
    }
    const double sh = std::sqrt(cfg.sigma_h2 / 2.0), sv = std::sqrt(cfg.sigma_v2 / 2.0);
    // Classes that look like pure censoring to the FC reuse the symbol-route
    // stream (same row order), so CRT-II at g = 0, f = 1 reproduces it exactly.
    std::uint64_t stream = class_stream(route, counts);
    if (route == PuRoute::Realizations &&
        std::all_of(rows.begin(), rows.end(), [](const ObservableType& r) { return r.r_f == 1 && r.r_g == 0; })) {
      std::vector<int> sym(3, 0);
      for (const auto& r : rows) ++sym[r.symbol + 1];
      stream = class_stream(PuRoute::Symbols, sym);
    }
    std::vector<float> out(n);
    for (std::size_t j = 0; j < n; ++j) {
      RandomStream rng(seed, stream, static_cast<std::uint32_t>(j));
      for (int k = 0; k < K; ++k) {
        const double hr = sh * rng.normal(), hi = sh * rng.normal();
        const double vr = sv * rng.normal(), vi = sv * rng.normal();
        h[k] = {hr, hi};
        y[k] = static_cast<double>(rows[k].symbol) * h[k] + cplx(vr, vi);
      }
      const double l = route == PuRoute::Symbols ? fc.log_lr_crt1(y, h)
                                                 : fc.log_lr_crt2(y, h, rf, rg);
      out[j] = static_cast<float>(l);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Fills every class with n samples.
  void build(const NetworkConfig& cfg, const FusionModel& fc, std::size_t n, std::uint64_t seed) {
    build(cfg, fc, std::vector<std::size_t>(classes_.size(), n), seed);
  }

  /// Class c gets n[c] samples; 0 leaves it empty.
  void build(const NetworkConfig& cfg, const FusionModel& fc, const std::vector<std::size_t>& n,
             std::uint64_t seed) {
    if (n.size() != classes_.size()) throw std::invalid_argument("PuTable::build: size mismatch");
    parallel_for(classes_.size(), [&](std::size_t c) {
      if (n[c] == 0) return;
      samples_[c] = sample_class(classes_[c], types_, route_, cfg, fc, n[c], seed);
    });
  }

  /// True when every sensor of class c is seen as (r_f = 1, r_g = 0).
  bool pure_like(int c) const {
    if (route_ == PuRoute::Symbols) return true;
    for (std::size_t t = 0; t < types_.size(); ++t)
      if (classes_[c][t] > 0 && !(types_[t].r_f == 1 && types_[t].r_g == 0)) return false;
    return true;
  }

  /// P(u0 = 1 | class) at threshold exp(log_t). Inactive classes report 0.
  double alarm(int c, double log_t) const {
    const auto& s = samples_[c];
    if (s.empty()) return 0.0;
    const auto it = std::upper_bound(s.begin(), s.end(), log_t,
                                     [](double v, float x) { return v < static_cast<double>(x); });
    return static_cast<double>(s.end() - it) / static_cast<double>(s.size());
  }

  /// Midpoint between the largest stored log-LR <= log_t and the smallest one
  /// above it. Moving the threshold there changes no alarm count but keeps it
  /// off atoms of the LR distribution, where float storage would decide ties.
  double gap_midpoint(double log_t) const {
    double below = -kInf, above = kInf;
    auto cmp = [](double v, float x) { return v < static_cast<double>(x); };
    for (const auto& s : samples_) {
      if (s.empty()) continue;
      const auto it = std::upper_bound(s.begin(), s.end(), log_t, cmp);
      if (it != s.end()) above = std::min(above, static_cast<double>(*it));
      if (it != s.begin()) below = std::max(below, static_cast<double>(*(it - 1)));
    }
    if (std::isinf(below) || std::isinf(above)) return log_t;
    return 0.5 * (below + above);
  }

  std::size_t samples(int c) const { return samples_[c].size(); }

  /// Smallest and largest stored log-LR over all classes.
  std::pair<double, double> log_lr_range() const {
    double lo = kInf, hi = -kInf;
    for (const auto& s : samples_)
      if (!s.empty()) {
        lo = std::min(lo, static_cast<double>(s.front()));
        hi = std::max(hi, static_cast<double>(s.back()));
      }
    if (lo > hi) return {-1.0, 1.0};
    return {lo, hi};
  }

 private:
  PuRoute route_;
  int K_;
  std::vector<ObservableType> types_;
  std::vector<std::vector<int>> classes_;
  std::map<std::vector<int>, int> index_;
  std::vector<std::vector<float>> samples_;
};

// ---------------------------------------------------------------------------
// Polynomials in g and f

/// sum c[a][b][c][d] (1-g)^a g^b (1-f)^c f^d with every exponent in 0..K.
class BasisPolynomial {
 public:
  explicit BasisPolynomial(int K = 0)
      : K_(K), c_(static_cast<std::size_t>((K + 1) * (K + 1) * (K + 1) * (K + 1)), 0.0) {}

  int K() const noexcept { return K_; }
  std::size_t index(int a, int b, int c, int d) const noexcept {
    const int s = K_ + 1;
    return static_cast<std::size_t>(((a * s + b) * s + c) * s + d);
  }
  double& at(int a, int b, int c, int d) noexcept { return c_[index(a, b, c, d)]; }
  double at(int a, int b, int c, int d) const noexcept { return c_[index(a, b, c, d)]; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (int a = 0; a <= K_; ++a)
      for (int b = 0; b <= K_; ++b)
        for (int c = 0; c <= K_; ++c)
          for (int d = 0; d <= K_; ++d) {
            const double v = at(a, b, c, d);
            if (v != 0.0) fn(a, b, c, d, v);
          }
  }

  double eval(double g, double f) const {
    double s = 0.0;
    for_each([&](int a, int b, int c, int d, double v) {
      s += v * std::pow(1.0 - g, a) * std::pow(g, b) * std::pow(1.0 - f, c) * std::pow(f, d);
    });
    return s;
  }

 private:
  int K_;
  std::vector<double> c_;
};

/// Positive and negative parts of a polynomial in monomials f^n g^m.
struct SignedBivariatePolynomial {
  int K = 0;
  std::vector<double> pos;  // index n * (K+1) + m for f^n g^m
  std::vector<double> neg;

  explicit SignedBivariatePolynomial(int K_ = 0)
      : K(K_),
        pos(static_cast<std::size_t>((K_ + 1) * (K_ + 1)), 0.0),
        neg(static_cast<std::size_t>((K_ + 1) * (K_ + 1)), 0.0) {}

  double positive(int n, int m) const { return pos[n * (K + 1) + m]; }
  double negative(int n, int m) const { return neg[n * (K + 1) + m]; }

  double eval_part(const std::vector<double>& part, double g, double f) const {
    double s = 0.0;
    for (int n = 0; n <= K; ++n)
      for (int m = 0; m <= K; ++m) {
        const double c = part[n * (K + 1) + m];
        if (c != 0.0) s += c * std::pow(f, n) * std::pow(g, m);
      }
    return s;
  }
  double eval_positive(double g, double f) const { return eval_part(pos, g, f); }
  double eval_negative(double g, double f) const { return eval_part(neg, g, f); }
  double eval(double g, double f) const { return eval_positive(g, f) - eval_negative(g, f); }

  std::size_t monomial_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (pos[i] != 0.0 || neg[i] != 0.0) ++n;
    return n;
  }
};

/// Binomial expansion of a basis polynomial, then split by sign.
inline SignedBivariatePolynomial expand_signed(const BasisPolynomial& p) {
  const int K = p.K();
  std::vector<double> acc(static_cast<std::size_t>((K + 1) * (K + 1)), 0.0);
  p.for_each([&](int a, int b, int c, int d, double v) {
    for (int i = 0; i <= a; ++i)
      for (int j = 0; j <= c; ++j) {
        const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        const int m = b + i, n = d + j;
        if (m > K || n > K) throw std::logic_error("expand_signed: degree exceeds K");
        acc[n * (K + 1) + m] += sign * binomial(a, i) * binomial(c, j) * v;
      }
  });
  SignedBivariatePolynomial out(K);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i] > 0.0) out.pos[i] = acc[i];
    else if (acc[i] < 0.0) out.neg[i] = -acc[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Results

struct PerfEstimate {
  enum class Route { SemiAnalytic, Oracle };
  double pm = 0.0;
  double pf = 0.0;
  double pt = 0.0;
  double pc = 1.0;
  double pm_se = 0.0;
  double pf_se = 0.0;
  double pt_se = 0.0;
  std::size_t n_samples = 0;
  Route route = Route::SemiAnalytic;
};

struct EvalOptions {
  std::size_t n_mc_pu = 20000;
  std::uint64_t seed = 1;
  QuadratureOptions quad{};
  // Classes whose largest possible weight falls below this are not sampled.
  double skip_weight = 1e-12;
  // CRT-II only: a class whose weight never exceeds alloc_ref on a (g, f)
  // grid gets proportionally fewer samples, but at least n_min. Classes that
  // look like pure censoring always get n_mc_pu. 0 disables.
  double alloc_ref = 0.03;
  std::size_t n_min = 200;
};

// ---------------------------------------------------------------------------
// Semi-analytic evaluator

/// Category-sum evaluator for one set of thresholds and one FC model.
///
/// Route Symbols covers pure censoring and CRT-I (5 categories; P_u depends on
/// the FC's assumed g_fc, f_fc). Route Realizations covers CRT-II
/// (12 categories; P_u does not depend on g, f at all).
class SemiAnalyticModel {
 public:
  struct Term {
    int cls;
    std::array<int, 4> exps;  // (1-g), g, (1-f), f
    double w1;                // multinomial * P_x1
    double w0;                // multinomial * P_x0
  };

  SemiAnalyticModel(const NetworkConfig& cfg, double tau1, double tau2, PuRoute route,
                    const AssumedModel& assumed, const EvalOptions& opts)
      : cfg_(cfg), tau1_(tau1), tau2_(tau2), route_(route), assumed_(assumed), opts_(opts),
        table_(route, cfg.K) {
    cfg.validate();
    if (!(tau2 <= tau1)) throw ConfigError("tau2", "lower threshold must not exceed tau1");
    const auto px1 = rectangle_table(cfg, cfg.rho, tau1, tau2, Hypothesis::H1, opts.quad);
    const auto px0 = rectangle_table(cfg, cfg.rho, tau1, tau2, Hypothesis::H0, opts.quad);
    const int K = cfg.K;

    std::map<std::tuple<int, int, int, int, int>, std::size_t> merged;
    auto add_term = [&](int cls, std::array<int, 4> e, double w1, double w0) {
      const auto key = std::make_tuple(cls, e[0], e[1], e[2], e[3]);
      auto it = merged.find(key);
      if (it == merged.end()) {
        merged.emplace(key, terms_.size());
        terms_.push_back({cls, e, w1, w0});
      } else {
        terms_[it->second].w1 += w1;
        terms_[it->second].w0 += w0;
      }
    };

    if (route == PuRoute::Symbols) {
      for (auto& a : compositions(K, 5)) {
        const CategoryVector cv = CategoryVector::crt1(a);
        const IntervalCounts ic = cv.intervals();
        const double mult = multinomial(a);
        const int cls = table_.class_of(cv.expand());
        add_term(cls, {a[1], a[2], a[3], a[4]}, mult * px1->at(ic), mult * px0->at(ic));
      }
    } else {
      for (auto& a : compositions(K, 12)) {
        const CategoryVector cv = CategoryVector::crt2(a);
        const IntervalCounts ic = cv.intervals();
        const double mult = multinomial(a);
        const int cls = table_.class_of(cv.expand());
        const int ag = cv.a_g(), af = cv.a_f();
        add_term(cls, {K - ag, ag, K - af, af}, mult * px1->at(ic), mult * px0->at(ic));
      }
    }
    std::sort(terms_.begin(), terms_.end(), [](const Term& x, const Term& y) {
      return std::tie(x.cls, x.exps) < std::tie(y.cls, y.exps);
    });

    std::vector<double> bound(table_.size(), 0.0);
    for (const auto& t : terms_) bound[t.cls] += std::max(t.w1, t.w0);
    std::vector<std::size_t> n_class(table_.size(), 0);
    for (std::size_t c = 0; c < bound.size(); ++c)
      if (bound[c] >= opts.skip_weight) n_class[c] = opts.n_mc_pu;
    if (route == PuRoute::Realizations && opts.alloc_ref > 0.0) {
      std::vector<double> peak(table_.size(), 0.0), w1, w0;
      for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
          class_weights(i / 10.0, j / 10.0, w1, w0);
          for (std::size_t c = 0; c < peak.size(); ++c) peak[c] = std::max({peak[c], w1[c], w0[c]});
        }
      for (std::size_t c = 0; c < n_class.size(); ++c) {
        if (n_class[c] == 0 || table_.pure_like(static_cast<int>(c))) continue;
        const double share = std::min(1.0, peak[c] / opts.alloc_ref);
        const auto n = static_cast<std::size_t>(std::ceil(share * static_cast<double>(opts.n_mc_pu)));
        n_class[c] = std::clamp(n, std::min(opts.n_min, opts.n_mc_pu), opts.n_mc_pu);
      }
    }

    AssumedModel fc_model = assumed;
    fc_model.tau1 = tau1;
    fc_model.tau2 = tau2;
    if (route == PuRoute::Realizations) {
      fc_model.g_fc = 0.0;
      fc_model.f_fc = 1.0;
    }
    fusion_ = std::make_shared<FusionModel>(cfg, fc_model, opts.quad);
    table_.build(cfg, *fusion_, n_class, opts.seed);
  }

  const NetworkConfig& config() const noexcept { return cfg_; }
  double tau1() const noexcept { return tau1_; }
  double tau2() const noexcept { return tau2_; }
  PuRoute route() const noexcept { return route_; }
  const AssumedModel& assumed() const noexcept { return assumed_; }
  const PuTable& table() const noexcept { return table_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  const EvalOptions& options() const noexcept { return opts_; }

  /// Per-class weights (sum over that class's categories of
  /// multinomial * P_x * basis(g, f)) under H1 and H0.
  void class_weights(double g, double f, std::vector<double>& w1, std::vector<double>& w0) const {
    w1.assign(table_.size(), 0.0);
    w0.assign(table_.size(), 0.0);
    const int K = cfg_.K;
    std::vector<double> pg(K + 1), p1g(K + 1), pf(K + 1), p1f(K + 1);
    pg[0] = p1g[0] = pf[0] = p1f[0] = 1.0;
    for (int i = 1; i <= K; ++i) {
      pg[i] = pg[i - 1] * g;
      p1g[i] = p1g[i - 1] * (1.0 - g);
      pf[i] = pf[i - 1] * f;
      p1f[i] = p1f[i - 1] * (1.0 - f);
    }
    for (const auto& t : terms_) {
      const double b = p1g[t.exps[0]] * pg[t.exps[1]] * p1f[t.exps[2]] * pf[t.exps[3]];
      w1[t.cls] += t.w1 * b;
      w0[t.cls] += t.w0 * b;
    }
  }

  PerfEstimate evaluate(double g, double f, double t) const {
    check_gf(g, f);
    if (!(t > 0.0)) throw ConfigError("t", "fusion threshold must be > 0");
    std::vector<double> w1, w0;
    class_weights(g, f, w1, w0);
    return combine(w1, w0, std::log(t), g, f);
  }

  double pf(double g, double f, double t) const { return evaluate(g, f, t).pf; }
  double pm(double g, double f, double t) const { return evaluate(g, f, t).pm; }

  /// Smallest t with P_F(t) <= beta (P_F is non-increasing in t).
  double t_for_pf(double g, double f, double beta) const {
    std::vector<double> w1, w0;
    class_weights(g, f, w1, w0);
    auto pf_at = [&](double log_t) {
      double s = 0.0;
      for (std::size_t c = 0; c < w0.size(); ++c)
        if (w0[c] != 0.0) s += w0[c] * table_.alarm(static_cast<int>(c), log_t);
      return s;
    };
    auto [lo, hi] = table_.log_lr_range();
    lo -= 1.0;
    hi += 1.0;
    if (pf_at(lo) <= beta) return std::exp(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (pf_at(mid) <= beta) hi = mid;
      else lo = mid;
    }
    return std::exp(table_.gap_midpoint(hi));
  }

  /// Largest t with P_M(t) <= alpha (P_M is non-decreasing in t).
  double t_for_pm(double g, double f, double alpha) const {
    std::vector<double> w1, w0;
    class_weights(g, f, w1, w0);
    auto pm_at = [&](double log_t) {
      double s = 0.0;
      for (std::size_t c = 0; c < w1.size(); ++c)
        if (w1[c] != 0.0) s += w1[c] * (1.0 - table_.alarm(static_cast<int>(c), log_t));
      return s;
    };
    auto [lo, hi] = table_.log_lr_range();
    lo -= 1.0;
    hi += 1.0;
    if (pm_at(hi) <= alpha) return std::exp(hi);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (pm_at(mid) <= alpha) lo = mid;
      else hi = mid;
    }
    return std::exp(table_.gap_midpoint(lo));
  }

  /// Coefficients of P_M (miss) or P_F in the (1-g)^a g^b (1-f)^c f^d basis at
  /// fixed t. Only meaningful when P_u does not depend on g, f, which holds
  /// for CRT-II and for a CRT-I FC with fixed beliefs.
  BasisPolynomial basis(bool miss, double t) const {
    BasisPolynomial p(cfg_.K);
    const double log_t = std::log(t);
    for (const auto& term : terms_) {
      const double pu = table_.alarm(term.cls, log_t);
      const double w = miss ? term.w1 * (1.0 - pu) : term.w0 * pu;
      p.at(term.exps[0], term.exps[1], term.exps[2], term.exps[3]) += w;
    }
    return p;
  }

 private:
  static void check_gf(double g, double f) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("g", "must lie in [0, 1]");
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("f", "must lie in [0, 1]");
  }

  PerfEstimate combine(const std::vector<double>& w1, const std::vector<double>& w0, double log_t,
                       double g, double f) const {
    PerfEstimate e;
    double vm = 0.0, vf = 0.0;
    std::size_t nmax = 0;
    for (std::size_t c = 0; c < w1.size(); ++c) {
      if (w1[c] == 0.0 && w0[c] == 0.0) continue;
      const int ci = static_cast<int>(c);
      const double p = table_.alarm(ci, log_t);
      const std::size_t n = table_.samples(ci);
      e.pm += w1[c] * (1.0 - p);
      e.pf += w0[c] * p;
      if (n > 0) {
        const double var = p * (1.0 - p) / static_cast<double>(n);
        vm += w1[c] * w1[c] * var;
        vf += w0[c] * w0[c] * var;
        nmax = std::max(nmax, n);
      }
    }
    e.pm = std::clamp(e.pm, 0.0, 1.0);
    e.pf = std::clamp(e.pf, 0.0, 1.0);
    e.pm_se = std::sqrt(vm);
    e.pf_se = std::sqrt(vf);
    const RateProbs r = rate_probs(cfg_, tau1_, tau2_, g, f);
    e.pt = r.pt;
    e.pc = r.pc;
    e.n_samples = nmax;
    e.route = PerfEstimate::Route::SemiAnalytic;
    return e;
  }

  NetworkConfig cfg_;
  double tau1_, tau2_;
  PuRoute route_;
  AssumedModel assumed_;
  EvalOptions opts_;
  PuTable table_;
  std::vector<Term> terms_;
  std::shared_ptr<FusionModel> fusion_;
};

/// Monte-Carlo P(u0 = 1 | C = C^a) for one category vector.
inline ProbWithSe estimate_pu(const NetworkConfig& cfg, const DesignPoint& design,
                              const CategoryVector& cat, const AssumedModel& assumed,
                              std::size_t n_mc, std::uint64_t seed,
                              const QuadratureOptions& quad = {}) {
  cat.validate(cfg.K);
  design.validate();
  const PuRoute route =
      cat.kind == CategoryVector::Kind::CRT2 ? PuRoute::Realizations : PuRoute::Symbols;
  AssumedModel fc_model = assumed;
  fc_model.tau1 = design.tau1;
  fc_model.tau2 = design.tau2;
  if (route == PuRoute::Realizations) {
    fc_model.g_fc = 0.0;
    fc_model.f_fc = 1.0;
  }
  const FusionModel fc(cfg, fc_model, quad);
  PuTable table(route, cfg.K);
  const int cls = table.class_of(cat.expand());
  const auto samples = PuTable::sample_class(table.class_counts(cls), table.types(), route, cfg,
                                             fc, n_mc, seed);
  const double log_t = std::log(design.t);
  const auto it = std::upper_bound(samples.begin(), samples.end(), log_t,
                                   [](double v, float x) { return v < static_cast<double>(x); });
  ProbWithSe r;
  r.n = n_mc;
  r.p = n_mc ? static_cast<double>(samples.end() - it) / static_cast<double>(n_mc) : 0.0;
  r.se = n_mc ? std::sqrt(r.p * (1.0 - r.p) / static_cast<double>(n_mc)) : 0.0;
  return r;
}

/// CRT-I / pure censoring category sum. With assumed = (g_fc = 0, f_fc = 1)
/// this is the mismatched-FC performance P'_M, P'_F.
inline PerfEstimate perf_semianalytic_crt1(const NetworkConfig& cfg, const DesignPoint& design,
                                           const AssumedModel& assumed, const EvalOptions& opts) {
  const DesignPoint d = design.normalized();
  d.validate();
  if (d.scheme == Scheme::CRT2)
    throw std::invalid_argument("perf_semianalytic_crt1: scheme must be CRT1 or pure censoring");
  SemiAnalyticModel model(cfg, d.tau1, d.tau2, PuRoute::Symbols, assumed, opts);
  return model.evaluate(d.g, d.f, d.t);
}

inline PerfEstimate perf_semianalytic_crt2(const NetworkConfig& cfg, const DesignPoint& design,
                                           const EvalOptions& opts, double rho_fc) {
  DesignPoint d = design;
  d.validate();
  SemiAnalyticModel model(cfg, d.tau1, d.tau2, PuRoute::Realizations,
                          AssumedModel::pure(rho_fc, d.tau1, d.tau2), opts);
  return model.evaluate(d.g, d.f, d.t);
}

inline PerfEstimate perf_semianalytic_crt2(const NetworkConfig& cfg, const DesignPoint& design,
                                           const EvalOptions& opts) {
  return perf_semianalytic_crt2(cfg, design, opts, cfg.rho);
}

// ---------------------------------------------------------------------------
// End-to-end oracle

struct OracleOptions {
  std::size_t n_trials = 1'000'000;
  std::uint64_t seed = 1;
  QuadratureOptions quad{};
  std::size_t chunk = 4096;
};

inline PerfEstimate perf_oracle(const NetworkConfig& cfg, const DesignPoint& design,
                                const AssumedModel& assumed, const OracleOptions& opts) {
  cfg.validate();
  const DesignPoint d = design.normalized();
  d.validate();
  AssumedModel fc_model = assumed;
  fc_model.tau1 = d.tau1;
  fc_model.tau2 = d.tau2;
  if (d.scheme == Scheme::CRT2) {
    fc_model.g_fc = 0.0;
    fc_model.f_fc = 1.0;
  }
  const FusionModel fc(cfg, fc_model, opts.quad);
  const int K = cfg.K;
  const double log_t = std::log(d.t);
  const double sh = std::sqrt(cfg.sigma_h2 / 2.0), sv = std::sqrt(cfg.sigma_v2 / 2.0);
  const std::size_t n = opts.n_trials;
  const std::size_t chunks = (n + opts.chunk - 1) / opts.chunk;

  struct Partial {
    std::size_t alarms[2] = {0, 0};
    double tx_sum = 0.0, tx_sq = 0.0;
  };
  std::vector<Partial> parts(chunks);

  parallel_for(chunks, [&](std::size_t ci) {
    std::vector<double> x(K);
    std::vector<cplx> h(K), y(K);
    std::vector<std::uint8_t> rf(K), rg(K);
    Partial& p = parts[ci];
    const std::size_t begin = ci * opts.chunk, end = std::min(n, begin + opts.chunk);
    for (int hyp = 0; hyp < 2; ++hyp) {
      const Hypothesis H = hyp ? Hypothesis::H1 : Hypothesis::H0;
      const std::uint64_t stream = hash_combine(hash_label("oracle"), static_cast<std::uint64_t>(hyp));
      for (std::size_t i = begin; i < end; ++i) {
        RandomStream rng(opts.seed, stream, static_cast<std::uint32_t>(i));
        draw_observation(cfg, H, rng, x);
        int sent = 0;
        for (int k = 0; k < K; ++k) {
          const Interval dk = classify_observation(x[k], d.tau1, d.tau2);
          rg[k] = rng.bernoulli(d.g) ? 1 : 0;
          rf[k] = rng.bernoulli(d.f) ? 1 : 0;
          const int u = map_symbol(dk, rg[k] != 0, rf[k] != 0);
          sent += (u != 0);
          const double hr = sh * rng.normal(), hi = sh * rng.normal();
          const double vr = sv * rng.normal(), vi = sv * rng.normal();
          h[k] = {hr, hi};
          y[k] = static_cast<double>(u) * h[k] + cplx(vr, vi);
        }
        const double l =
            d.scheme == Scheme::CRT2 ? fc.log_lr_crt2(y, h, rf, rg) : fc.log_lr_crt1(y, h);
        if (l > log_t) ++p.alarms[hyp];
        if (hyp == 0) {
          const double frac = static_cast<double>(sent) / K;
          p.tx_sum += frac;
          p.tx_sq += frac * frac;
        }
      }
    }
  });

  std::size_t alarms0 = 0, alarms1 = 0;
  double tx = 0.0, tx2 = 0.0;
  for (const auto& p : parts) {
    alarms0 += p.alarms[0];
    alarms1 += p.alarms[1];
    tx += p.tx_sum;
    tx2 += p.tx_sq;
  }
  PerfEstimate e;
  e.route = PerfEstimate::Route::Oracle;
  e.n_samples = n;
  if (n == 0) return e;
  const double dn = static_cast<double>(n);
  e.pf = static_cast<double>(alarms0) / dn;
  e.pm = 1.0 - static_cast<double>(alarms1) / dn;
  e.pf_se = std::sqrt(e.pf * (1.0 - e.pf) / dn);
  e.pm_se = std::sqrt(e.pm * (1.0 - e.pm) / dn);
  e.pt = tx / dn;
  e.pc = 1.0 - e.pt;
  e.pt_se = std::sqrt(std::max(0.0, tx2 / dn - e.pt * e.pt) / dn);
  return e;
}

// ---------------------------------------------------------------------------
// Signed coefficients for the signomial program

enum class CoeffRoute { CRT1Mismatched, CRT2 };

struct SignedCoefficients {
  SignedBivariatePolynomial pm;
  SignedBivariatePolynomial pf;
  BasisPolynomial pm_basis;
  BasisPolynomial pf_basis;
};

inline SignedCoefficients extract_signed_coeffs(const SemiAnalyticModel& model, double t) {
  SignedCoefficients out{SignedBivariatePolynomial(model.config().K),
                         SignedBivariatePolynomial(model.config().K), model.basis(true, t),
                         model.basis(false, t)};
  out.pm = expand_signed(out.pm_basis);
  out.pf = expand_signed(out.pf_basis);
  return out;
}

inline SignedCoefficients extract_signed_coeffs(const NetworkConfig& cfg, double tau1, double tau2,
                                                double t, CoeffRoute route,
                                                const EvalOptions& opts) {
  const PuRoute pr = route == CoeffRoute::CRT2 ? PuRoute::Realizations : PuRoute::Symbols;
  SemiAnalyticModel model(cfg, tau1, tau2, pr, AssumedModel::pure(cfg.rho, tau1, tau2), opts);
  return extract_signed_coeffs(model, t);
}

}  // namespace censornet
