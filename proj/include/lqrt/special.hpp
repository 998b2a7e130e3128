#pragma once

// Special functions for the classical comparison tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "lqrt/errors.hpp"

namespace lqrt::special {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Two-sided Student-t tail P(|T| >= |t|) with df degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw DomainError("student t requires df > 0");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) throw DomainError("student t: statistic is NaN");
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

/// log C(n, k).
inline double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// P(K <= k) for K ~ Binomial(n, p).
inline double binomial_cdf(std::uint64_t n, std::int64_t k, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_cdf requires p in [0, 1]");
  if (k < 0) return 0.0;
  if (static_cast<std::uint64_t>(k) >= n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  // Upper k keeps the continued fraction on its fast side.
  return 1.0 - regularized_incomplete_beta(static_cast<double>(k) + 1.0,
                                           static_cast<double>(n - static_cast<std::uint64_t>(k)), p);
}

/// P(K >= k) for K ~ Binomial(n, 1/2).
///
/// Exact (integer binomial coefficients over 2^n) for n <= 62, log-space
/// summation beyond.
inline double binomial_tail(std::uint64_t n, std::int64_t k) {
  if (k <= 0) return 1.0;
  if (static_cast<std::uint64_t>(k) > n) return 0.0;
  const auto lo = static_cast<std::uint64_t>(k);
  if (n <= 62) {
    // C(n, i) fits in 63 bits for n <= 62; summing the smaller tail avoids overflow.
    std::uint64_t c = 1;  // C(n, 0)
    std::uint64_t total = 0;
    const bool upper_is_small = lo > n / 2;
    for (std::uint64_t i = 0; i <= n; ++i) {
      if (i > 0) c = c / i * (n - i + 1) + c % i * (n - i + 1) / i;
      const bool in_tail = upper_is_small ? (i >= lo) : (i < lo);
      if (in_tail) total += c;
    }
    const double frac = std::ldexp(static_cast<double>(total), -static_cast<int>(n));
    return upper_is_small ? frac : 1.0 - frac;
  }
  double acc = 0.0;
  const double log_half_n = -static_cast<double>(n) * std::numbers::ln2;
  for (std::uint64_t i = lo; i <= n; ++i) acc += std::exp(log_choose(n, i) + log_half_n);
  return std::min(acc, 1.0);
}

}  // namespace lqrt::special
