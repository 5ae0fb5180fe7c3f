#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "gausscov/error.hpp"

namespace gausscov {

namespace detail {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
// Converges quickly for x < (a + 1) / (a + b + 2).
inline long double beta_continued_fraction(long double a, long double b, long double x) {
  constexpr int max_iterations = 20000;
  constexpr long double eps = 1e-18L;
  constexpr long double tiny = 1e-4000L;
  const long double qab = a + b;
  const long double qap = a + 1.0L;
  const long double qam = a - 1.0L;
  long double c = 1.0L;
  long double d = 1.0L - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0L / d;
  long double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const long double m2 = 2.0L * m;
    long double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0L + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0L + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0L + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0L + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const long double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0L) < eps) return h;
  }
  throw DomainError("incomplete Beta continued fraction did not converge");
}

// log(x^a (1-x)^b / B(a, b)) in extended precision. The lgamma terms are
// large for large a + b, so the cancellation has to happen in long double.
inline long double beta_log_prefactor(long double a, long double b, long double x) {
  return a * std::log(x) + b * std::log1p(-x) + std::lgamma(a + b) - std::lgamma(a) -
         std::lgamma(b);
}

}  // namespace detail

// Regularized incomplete Beta function I_x(a, b).
inline double beta_cdf(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("beta_cdf needs a > 0 and b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("beta_cdf needs 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const long double la = a, lb = b, lx = x;
  const long double ly = 1.0L - lx;
  const long double log_front = detail::beta_log_prefactor(la, lb, lx);
  if (lx < (la + 1.0L) / (la + lb + 2.0L)) {
    const long double front = std::exp(log_front);
    return static_cast<double>(front * detail::beta_continued_fraction(la, lb, lx) / la);
  }
  const long double front = std::exp(log_front);
  return static_cast<double>(1.0L - front * detail::beta_continued_fraction(lb, la, ly) / lb);
}

// Smallest x with beta_cdf(a, b, x) >= p, by bisection to the last ulp.
inline double beta_quantile(double a, double b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("beta_quantile needs 0 <= p <= 1");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 2000; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (beta_cdf(a, b, mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// Upper tail of the F(nu1, nu2) distribution through the Beta identity.
inline double f_upper_tail(double nu1, double nu2, double f) {
  if (!(f >= 0.0)) throw DomainError("F statistic must be non-negative");
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_{nu2 / (nu2 + nu1 f)}(nu2 / 2, nu1 / 2)
  return beta_cdf(nu2 / 2.0, nu1 / 2.0, nu2 / (nu2 + nu1 * f));
}

// Sizes entering one Gaussian P-value.
//   n            rows
//   k            dimension of the fit that contains the tested covariate,
//                intercept included when one is fitted
//   q_remaining  number of Gaussian competitors (the exponent N)
struct PvalueContext {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t q_remaining = 1;

  // Tested covariate sits in a subset of `subset_size` covariates out of q.
  static PvalueContext for_subset(std::size_t n, std::size_t fit_dim, std::size_t q,
                                  std::size_t subset_size) {
    return {n, fit_dim, q - subset_size + 1};
  }
  // Best candidate joining `selected` covariates already chosen out of q.
  static PvalueContext for_step(std::size_t n, std::size_t fit_dim, std::size_t q,
                                std::size_t selected) {
    return {n, fit_dim, q - selected};
  }

  void validate() const {
    if (k + 2 > n)
      throw DomainError("need n - k >= 2, got n = " + std::to_string(n) + ", k = " + std::to_string(k));
    if (q_remaining < 1) throw DomainError("need at least one Gaussian competitor");
  }
};

struct RatioPValue {
  double p = 1.0;
  // The ratio exceeded 1 by rounding and was clamped.
  bool clamped = false;
};

inline constexpr double kRatioSlack = 1e-12;

// P_F of a covariate: Beta_{(n-k)/2, 1/2}(rss_with / rss_without), the
// probability that a Gaussian covariate in its place would fit better.
inline RatioPValue pf_from_rss_ratio(const PvalueContext& ctx, double rss_with, double rss_without) {
  ctx.validate();
  if (!(rss_without > 0.0) || !(rss_with >= 0.0) || !std::isfinite(rss_without))
    throw DomainError("rss values must satisfy rss_with >= 0 and rss_without > 0");
  double ratio = rss_with / rss_without;
  RatioPValue out;
  if (ratio > 1.0) {
    if (ratio > 1.0 + kRatioSlack) throw DomainError("rss ratio exceeds 1");
    ratio = 1.0;
    out.clamped = true;
  }
  out.p = beta_cdf(static_cast<double>(ctx.n - ctx.k) / 2.0, 0.5, ratio);
  return out;
}

// 1 - (1 - p)^N without losing tiny p to cancellation.
inline double gaussian_tail_power(double p_f, std::size_t exponent) {
  if (!(p_f >= 0.0 && p_f <= 1.0)) throw DomainError("P_F must lie in [0, 1]");
  if (exponent < 1) throw DomainError("exponent must be at least 1");
  if (p_f == 0.0) return 0.0;
  if (p_f == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(exponent) * std::log1p(-p_f));
}

// P_G of a covariate inside a subset: exponent q - k + 1.
inline double pg_all_subset(const PvalueContext& ctx, double p_f) {
  if (ctx.q_remaining < 1) throw DomainError("need at least one Gaussian competitor");
  return gaussian_tail_power(p_f, ctx.q_remaining);
}

// P_G of the best remaining candidate in a stepwise sweep: exponent q - k.
inline double pg_stepwise(const PvalueContext& ctx, double p_f) {
  if (ctx.q_remaining < 1) throw DomainError("need at least one Gaussian competitor");
  return gaussian_tail_power(p_f, ctx.q_remaining);
}

// Largest P_F whose P_G stays below p0 for N competitors: 1 - (1 - p0)^(1/N).
inline double pf_threshold(double p0, std::size_t exponent) {
  return -std::expm1(std::log1p(-p0) / static_cast<double>(exponent));
}

}  // namespace gausscov
