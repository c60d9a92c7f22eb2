#pragma once

// Physical model of the sensing network: hypotheses, the three observation
// intervals, the interval-to-symbol map and the transmission-rate algebra.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "censornet/normal.hpp"

namespace censornet {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class Hypothesis { H0, H1 };

enum class Scheme { PureCensoring, CRT1, CRT2 };

inline std::string_view to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::PureCensoring: return "pure";
    case Scheme::CRT1: return "crt1";
    case Scheme::CRT2: return "crt2";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "pure" || name == "pure_censoring" || name == "PureCensoring") return Scheme::PureCensoring;
  if (name == "crt1" || name == "CRT1" || name == "crt-i") return Scheme::CRT1;
  if (name == "crt2" || name == "CRT2" || name == "crt-ii") return Scheme::CRT2;
  throw ConfigError("scheme", "unknown scheme '" + std::string(name) + "'");
}

inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) noexcept { return 10.0 * std::log10(x); }
/// dBm (relative to 1 mW) to watts.
inline double dbm_to_watts(double dbm) noexcept { return 1e-3 * db_to_linear(dbm); }

/// All physical parameters of the detection problem. Linear values are the
/// source of truth; the SNR accessors convert on the fly.
struct NetworkConfig {
  int K = 5;
  double A = 1.0;
  double sigma_w2 = 0.1;
  double rho = 0.0;
  double sigma_h2 = dbm_to_watts(-50.0) * db_to_linear(5.0);
  double sigma_v2 = dbm_to_watts(-50.0);

  double snr_c_db() const noexcept { return linear_to_db(A * A / sigma_w2); }
  double snr_h_db() const noexcept { return linear_to_db(sigma_h2 / sigma_v2); }
  void set_snr_c_db(double db) noexcept { sigma_w2 = A * A / db_to_linear(db); }
  void set_snr_h_db(double db) noexcept { sigma_h2 = sigma_v2 * db_to_linear(db); }
  double sigma_w() const noexcept { return std::sqrt(sigma_w2); }

  void validate() const {
    if (K < 1) throw ConfigError("K", "sensor count must be >= 1");
    if (!(sigma_w2 > 0.0) || !std::isfinite(sigma_w2)) throw ConfigError("sigma_w2", "must be > 0");
    if (!(sigma_h2 > 0.0) || !std::isfinite(sigma_h2)) throw ConfigError("sigma_h2", "must be > 0");
    if (!(sigma_v2 > 0.0) || !std::isfinite(sigma_v2)) throw ConfigError("sigma_v2", "must be > 0");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho", "correlation must lie in [0, 1)");
    if (!std::isfinite(A)) throw ConfigError("A", "must be finite");
  }

  /// The setting used throughout the numerical study: K=5, A=1, sigma_v^2=-50 dBm.
  static NetworkConfig standard(double snr_h_db, double snr_c_db, double rho) {
    NetworkConfig cfg;
    cfg.rho = rho;
    cfg.set_snr_c_db(snr_c_db);
    cfg.set_snr_h_db(snr_h_db);
    cfg.validate();
    return cfg;
  }
};

/// The controllable design. PureCensoring pins g = 0, f = 1.
struct DesignPoint {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double g = 0.0;
  double f = 1.0;
  double t = 1.0;
  Scheme scheme = Scheme::PureCensoring;

  DesignPoint normalized() const {
    DesignPoint d = *this;
    if (d.scheme == Scheme::PureCensoring) {
      d.g = 0.0;
      d.f = 1.0;
    }
    return d;
  }

  void validate() const {
    if (!(tau2 <= tau1)) throw ConfigError("tau2", "lower threshold must not exceed tau1");
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("g", "must lie in [0, 1]");
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("f", "must lie in [0, 1]");
    if (!(t > 0.0)) throw ConfigError("t", "fusion threshold must be > 0");
  }
};

/// Index d of the interval containing an observation:
/// R^-1 = (-inf, tau2), R^0 = [tau2, tau1], R^1 = (tau1, inf).
enum class Interval : int { Minus = -1, Zero = 0, Plus = 1 };

inline constexpr int value(Interval d) noexcept { return static_cast<int>(d); }

inline Interval classify_observation(double x, double tau1, double tau2) noexcept {
  if (x < tau2) return Interval::Minus;
  if (x > tau1) return Interval::Plus;
  return Interval::Zero;
}

/// Transmit symbol for interval d given the two Bernoulli realizations:
/// R^1 -> +1, R^0 -> r_g * (0 - 1), R^-1 -> r_f * (-1).
inline constexpr int map_symbol(Interval d, bool r_g, bool r_f) noexcept {
  switch (d) {
    case Interval::Plus: return 1;
    case Interval::Zero: return r_g ? -1 : 0;
    case Interval::Minus: return r_f ? -1 : 0;
  }
  return 0;
}

/// Marginal single-sensor interval probabilities.
struct IntervalProbs {
  double minus = 0.0;  // P(x in R^-1)
  double zero = 0.0;   // P(x in R^0)
  double plus = 0.0;   // P(x in R^1)

  double of(Interval d) const noexcept {
    return d == Interval::Minus ? minus : (d == Interval::Zero ? zero : plus);
  }
};

inline IntervalProbs interval_probs(const NetworkConfig& cfg, double tau1, double tau2,
                                    Hypothesis h) {
  if (!(tau2 <= tau1)) throw ConfigError("tau2", "lower threshold must not exceed tau1");
  const double mean = (h == Hypothesis::H1) ? cfg.A : 0.0;
  const double s = cfg.sigma_w();
  const double lo = (tau2 - mean) / s;
  const double hi = (tau1 - mean) / s;
  IntervalProbs p;
  p.minus = normal_cdf(lo);
  p.plus = normal_sf(hi);
  p.zero = normal_interval(lo, hi);
  return p;
}

struct RateProbs {
  double pt = 0.0;  // P(u != 0 | H0)
  double pc = 1.0;  // P(u == 0 | H0)
};

inline RateProbs rate_probs(const NetworkConfig& cfg, double tau1, double tau2, double g,
                            double f) {
  if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("g", "must lie in [0, 1]");
  if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("f", "must lie in [0, 1]");
  const IntervalProbs p = interval_probs(cfg, tau1, tau2, Hypothesis::H0);
  const double pc = (1.0 - g) * p.zero + (1.0 - f) * p.minus;
  return {1.0 - pc, pc};
}

/// g as a function of f on the constant-rate line P_t = p0_target.
struct GOfF {
  double g = 0.0;
  double dg_df = 0.0;
};

inline GOfF g_of_f(const IntervalProbs& h0, double p0_target, double f) {
  if (!(h0.zero > 0.0))
    throw std::domain_error("g_of_f: censoring interval has zero mass under H0");
  return {(p0_target - h0.plus - f * h0.minus) / h0.zero, -h0.minus / h0.zero};
}

inline GOfF g_of_f(const NetworkConfig& cfg, double tau1, double tau2, double p0_target,
                   double f) {
  return g_of_f(interval_probs(cfg, tau1, tau2, Hypothesis::H0), p0_target, f);
}

/// Admissible f on the constant-rate line, from 0 <= g(f) <= 1 and 0 <= f <= 1.
struct FeasibleRange {
  double l0 = 0.0;
  double l1 = 1.0;
  double l0p = 0.0;
  double l1p = 1.0;
  bool feasible = true;
};

inline FeasibleRange feasible_f_range(const IntervalProbs& h0, double p0_target) {
  FeasibleRange r;
  if (!(h0.minus > 0.0)) {
    // f has no effect on the rate; any f works iff g(f) lands in [0, 1].
    const double g = h0.zero > 0.0 ? (p0_target - h0.plus) / h0.zero : 0.0;
    r.l0 = -kInf;
    r.l1 = kInf;
    r.feasible = g >= -1e-12 && g <= 1.0 + 1e-12;
    r.l0p = 0.0;
    r.l1p = 1.0;
    return r;
  }
  r.l0 = (p0_target - 1.0 + h0.minus) / h0.minus;
  r.l1 = (p0_target - h0.plus) / h0.minus;
  r.l0p = std::max(0.0, r.l0);
  r.l1p = std::min(1.0, r.l1);
  r.feasible = r.l0p <= r.l1p;
  return r;
}

inline FeasibleRange feasible_f_range(const NetworkConfig& cfg, double tau1, double tau2,
                                      double p0_target) {
  return feasible_f_range(interval_probs(cfg, tau1, tau2, Hypothesis::H0), p0_target);
}

}  // namespace censornet
