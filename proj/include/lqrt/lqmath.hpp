#pragma once

// Lq-deformed logarithm, Gaussian density primitives and the location
// derivatives of the Lq-likelihood.

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "lqrt/errors.hpp"

namespace lqrt {

/// Read-only view of observations. Owning storage is std::vector<double>.
using Sample = std::span<const double>;

/// Distortion parameter of the Lq-likelihood, 0 < q <= 1.
class QParam {
 public:
  constexpr explicit QParam(double q) : q_(q) {
    if (!(q > 0.0 && q <= 1.0)) {
      throw DomainError("q must lie in (0, 1], got " + std::to_string(q));
    }
  }

  [[nodiscard]] constexpr double value() const noexcept { return q_; }
  [[nodiscard]] constexpr double one_minus() const noexcept { return 1.0 - q_; }
  [[nodiscard]] constexpr bool is_log() const noexcept { return q_ == 1.0; }

  friend constexpr bool operator==(QParam, QParam) = default;

 private:
  double q_;
};

struct NormalParams {
  double mu = 0.0;
  double sigma2 = 1.0;
};

/// L_q applied to a value already given on the log scale.
///
/// Uses expm1 so the result stays accurate as q approaches 1, and never
/// forms exp(log_u) directly, which matters for densities far in the tails.
[[nodiscard]] inline double lq_log_of_log(double log_u, QParam q) noexcept {
  if (q.is_log()) return log_u;
  const double s = q.one_minus();
  return std::expm1(s * log_u) / s;
}

/// q-deformed logarithm: ln(u) at q = 1, (u^(1-q) - 1)/(1 - q) otherwise.
[[nodiscard]] inline double lq_log(double u, QParam q) {
  if (!(u > 0.0)) throw DomainError("lq_log requires u > 0");
  return lq_log_of_log(std::log(u), q);
}

[[nodiscard]] inline double normal_log_pdf(double x, const NormalParams& p) noexcept {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const double d = x - p.mu;
  return -0.5 * (kLog2Pi + std::log(p.sigma2)) - d * d / (2.0 * p.sigma2);
}

/// Per-observation reweighting factor f(x|mu, sigma2)^(1-q), computed through
/// the log-density so that extreme outliers do not underflow prematurely.
[[nodiscard]] inline double lq_weight(double x, const NormalParams& p, QParam q) noexcept {
  if (q.is_log()) return 1.0;
  return std::exp(q.one_minus() * normal_log_pdf(x, p));
}

/// Sum of L_q(f(x_i)) over the sample.
[[nodiscard]] inline double lq_likelihood(Sample sample, const NormalParams& p, QParam q) {
  if (sample.empty()) throw DomainError("lq_likelihood requires a non-empty sample");
  double total = 0.0;
  for (double x : sample) total += lq_log_of_log(normal_log_pdf(x, p), q);
  return total;
}

/// d/dmu of L_q(f(x|mu, sigma2)).
[[nodiscard]] inline double lq_score_mu(double x, const NormalParams& p, QParam q) noexcept {
  return lq_weight(x, p, q) * (x - p.mu) / p.sigma2;
}

/// d^2/dmu^2 of L_q(f(x|mu, sigma2)).
[[nodiscard]] inline double lq_curvature_mu(double x, const NormalParams& p,
                                            QParam q) noexcept {
  const double z = (x - p.mu) / p.sigma2;
  return lq_weight(x, p, q) * (q.one_minus() * z * z - 1.0 / p.sigma2);
}

}  // namespace lqrt
