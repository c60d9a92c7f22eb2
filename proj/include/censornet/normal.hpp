#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>

namespace censornet {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standard normal CDF.
inline double normal_cdf(double z) noexcept {
  if (z == kInf) return 1.0;
  if (z == -kInf) return 0.0;
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 * 0.5);
}

/// Upper tail 1 - Phi(z), accurate for large positive z.
inline double normal_sf(double z) noexcept { return normal_cdf(-z); }

inline double normal_pdf(double z) noexcept {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

/// P(lo <= Z <= hi) for a standard normal, evaluated on the tail closest to the
/// interval so that narrow intervals far from zero keep their relative accuracy.
inline double normal_interval(double lo, double hi) noexcept {
  if (hi <= lo) return 0.0;
  if (lo > 0.0) return std::max(0.0, normal_sf(lo) - normal_sf(hi));
  return std::max(0.0, normal_cdf(hi) - normal_cdf(lo));
}

/// Inverse of the standard normal CDF (Acklam's rational approximation followed
/// by one Halley step against erfc, giving close to full double precision).
inline double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("normal_quantile: p outside [0,1]");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;

  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                          -2.759285104469687e+02, 1.383577518672690e+02,
                          -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                          -1.556989798598866e+02, 6.680131188771972e+01,
                          -1.328068155288572e+01};
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                          -2.400758277161838e+00, -2.549732539343734e+00,
                          4.374664141464968e+00, 2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                          2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; the residual is taken on the smaller tail.
  const double e = (p < 0.5) ? normal_cdf(x) - p : -(normal_sf(x) - (1.0 - p));
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

/// log(sum(exp(v))) over a span, -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> v) noexcept {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace censornet
