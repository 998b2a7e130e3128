#pragma once

// Maximum Lq-likelihood estimation for the univariate normal family by
// iterative reweighting. Four fitters share one driver:
//
//   fit_normal               free mean, free variance
//   fit_variance_known_mean  mean fixed, free variance
//   fit_shared_variance      two samples, separate means, pooled variance
//   fit_shared_mean          two samples, common mean, separate variances
//
// Each iteration recomputes the weights f(x_i | previous iterate)^(1-q), then
// updates the mean(s), then the variance(s) using the new mean(s), then clips
// variances to FitConfig::variance_floor.
//
// Weights enter every update only through ratios, so they are evaluated
// relative to the largest log-weight of the sample. This keeps at least one
// weight equal to 1 even when the variance has collapsed onto a data point.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lqrt/errors.hpp"
#include "lqrt/lqmath.hpp"

namespace lqrt {

struct FitConfig {
  double tol = 1e-8;
  int max_iter = 500;
  double variance_floor = std::numeric_limits<double>::epsilon();

  void validate() const {
    if (!(tol > 0.0)) throw DomainError("FitConfig: tol must be positive");
    if (max_iter < 1) throw DomainError("FitConfig: max_iter must be at least 1");
    if (!(variance_floor > 0.0)) throw DomainError("FitConfig: variance_floor must be positive");
  }
};

struct NormalFit {
  double mu = 0.0;
  double sigma2 = 1.0;
  int iterations = 0;
  bool converged = false;
  bool clipped = false;  // returned variance sits at the floor

  [[nodiscard]] NormalParams params() const noexcept { return {mu, sigma2}; }
  [[nodiscard]] bool degenerate() const noexcept { return clipped || !converged; }
};

struct SharedVarianceParams {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma2 = 1.0;
};

struct SharedVarianceFit {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma2 = 1.0;
  int iterations = 0;
  bool converged = false;
  bool clipped = false;

  [[nodiscard]] NormalParams params_x() const noexcept { return {mu_x, sigma2}; }
  [[nodiscard]] NormalParams params_y() const noexcept { return {mu_y, sigma2}; }
  [[nodiscard]] bool degenerate() const noexcept { return clipped || !converged; }
};

struct SharedMeanParams {
  double mu = 0.0;
  double sigma2_x = 1.0;
  double sigma2_y = 1.0;
};

struct SharedMeanFit {
  double mu = 0.0;
  double sigma2_x = 1.0;
  double sigma2_y = 1.0;
  int iterations = 0;
  bool converged = false;
  bool clipped = false;  // either variance at the floor

  [[nodiscard]] NormalParams params_x() const noexcept { return {mu, sigma2_x}; }
  [[nodiscard]] NormalParams params_y() const noexcept { return {mu, sigma2_y}; }
  [[nodiscard]] bool degenerate() const noexcept { return clipped || !converged; }
};

/// One reweighting update together with whether any variance was clipped.
template <class Params>
struct Step {
  Params next;
  bool clipped = false;
};

namespace detail {

inline void require_finite(Sample s, const char* who) {
  for (double v : s) {
    if (!std::isfinite(v)) throw DomainError(std::string(who) + ": sample contains a non-finite value");
  }
}

inline void require_size(Sample s, std::size_t min_size, const char* who) {
  if (s.size() < min_size) {
    throw DomainError(std::string(who) + ": sample needs at least " + std::to_string(min_size) +
                      " observations, got " + std::to_string(s.size()));
  }
}

inline double mean(Sample s) {
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(s.size());
}

inline double sum_sq_dev(Sample s, double center) {
  double total = 0.0;
  for (double v : s) total += (v - center) * (v - center);
  return total;
}

inline double clip(double v, double floor, bool& clipped) {
  if (v < floor || !(v == v)) {
    clipped = true;
    return floor;
  }
  return v;
}

/// Weighted sums of one sample with weights exp((1-q) logpdf_i - log_scale).
struct WeightedSums {
  double log_scale = 0.0;
  double sum_w = 0.0;
  double sum_wx = 0.0;
  std::vector<double> w;

  [[nodiscard]] double mean() const noexcept { return sum_wx / sum_w; }

  [[nodiscard]] double sum_sq_dev(Sample s, double center) const noexcept {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) total += w[i] * (s[i] - center) * (s[i] - center);
    return total;
  }
};

inline WeightedSums weighted_sums(Sample s, const NormalParams& p, QParam q) {
  WeightedSums out;
  out.w.resize(s.size());
  if (q.is_log()) {
    std::fill(out.w.begin(), out.w.end(), 1.0);
  } else {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.w[i] = q.one_minus() * normal_log_pdf(s[i], p);
      top = std::max(top, out.w[i]);
    }
    for (double& wi : out.w) wi = std::exp(wi - top);
    out.log_scale = top;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.sum_w += out.w[i];
    out.sum_wx += out.w[i] * s[i];
  }
  return out;
}

inline double relative_change(double next, double prev) {
  return std::abs(next - prev) / std::abs(next);
}

inline double location_change(double next, double prev, double sigma2) {
  return std::abs(next - prev) / std::max(std::sqrt(sigma2), 1e-12);
}

template <class Params, class Fit, class StepFn, class ChangeFn, class Emit>
Fit iterate(Params current, bool init_clipped, const FitConfig& cfg, StepFn step, ChangeFn change,
            Emit emit) {
  int iterations = 0;
  bool converged = false;
  bool clipped = init_clipped;
  while (iterations < cfg.max_iter) {
    const Step<Params> s = step(current);
    ++iterations;
    clipped = s.clipped;
    const double delta = change(s.next, current);
    current = s.next;
    if (delta < cfg.tol) {
      converged = true;
      break;
    }
  }
  return emit(current, iterations, converged, clipped);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single reweighting updates. Exposed for diagnostics and tests; the fitters
// below are these steps run to convergence.

inline Step<NormalParams> step_normal(Sample x, const NormalParams& current, QParam q,
                                      double variance_floor) {
  const auto sums = detail::weighted_sums(x, current, q);
  Step<NormalParams> out;
  out.next.mu = sums.mean();
  out.next.sigma2 =
      detail::clip(sums.sum_sq_dev(x, out.next.mu) / sums.sum_w, variance_floor, out.clipped);
  return out;
}

inline Step<NormalParams> step_known_mean(Sample x, const NormalParams& current, QParam q,
                                          double variance_floor) {
  const auto sums = detail::weighted_sums(x, current, q);
  Step<NormalParams> out;
  out.next.mu = current.mu;
  out.next.sigma2 =
      detail::clip(sums.sum_sq_dev(x, current.mu) / sums.sum_w, variance_floor, out.clipped);
  return out;
}

inline Step<SharedVarianceParams> step_shared_variance(Sample x, Sample y,
                                                       const SharedVarianceParams& current,
                                                       QParam q, double variance_floor) {
  const auto sx = detail::weighted_sums(x, {current.mu_x, current.sigma2}, q);
  const auto sy = detail::weighted_sums(y, {current.mu_y, current.sigma2}, q);
  Step<SharedVarianceParams> out;
  out.next.mu_x = sx.mean();
  out.next.mu_y = sy.mean();
  // Bring both samples' weights onto a common scale before pooling.
  const double top = std::max(sx.log_scale, sy.log_scale);
  const double cx = std::exp(sx.log_scale - top);
  const double cy = std::exp(sy.log_scale - top);
  const double num = cx * sx.sum_sq_dev(x, out.next.mu_x) + cy * sy.sum_sq_dev(y, out.next.mu_y);
  const double den = cx * sx.sum_w + cy * sy.sum_w;
  out.next.sigma2 = detail::clip(num / den, variance_floor, out.clipped);
  return out;
}

/// Shared-mean update. The common mean is the weighted mean of both samples
/// with each sample's weights divided by that sample's current variance, so
/// the step solves the weighted score equation for mu given the variances.
inline Step<SharedMeanParams> step_shared_mean(Sample x, Sample y, const SharedMeanParams& current,
                                               QParam q, double variance_floor) {
  const auto sx = detail::weighted_sums(x, {current.mu, current.sigma2_x}, q);
  const auto sy = detail::weighted_sums(y, {current.mu, current.sigma2_y}, q);
  const double top = std::max(sx.log_scale, sy.log_scale);
  const double cx = std::exp(sx.log_scale - top) / current.sigma2_x;
  const double cy = std::exp(sy.log_scale - top) / current.sigma2_y;
  Step<SharedMeanParams> out;
  out.next.mu = (cx * sx.sum_wx + cy * sy.sum_wx) / (cx * sx.sum_w + cy * sy.sum_w);
  bool clipped_x = false;
  bool clipped_y = false;
  out.next.sigma2_x =
      detail::clip(sx.sum_sq_dev(x, out.next.mu) / sx.sum_w, variance_floor, clipped_x);
  out.next.sigma2_y =
      detail::clip(sy.sum_sq_dev(y, out.next.mu) / sy.sum_w, variance_floor, clipped_y);
  out.clipped = clipped_x || clipped_y;
  return out;
}

// ---------------------------------------------------------------------------
// Fitters

inline NormalFit fit_normal(Sample x, QParam q, const FitConfig& cfg = {}) {
  cfg.validate();
  detail::require_size(x, 2, "fit_normal");
  detail::require_finite(x, "fit_normal");

  bool clipped = false;
  const double mu0 = detail::mean(x);
  NormalParams init{mu0, detail::clip(detail::sum_sq_dev(x, mu0) / static_cast<double>(x.size()),
                                      cfg.variance_floor, clipped)};
  return detail::iterate<NormalParams, NormalFit>(
      init, clipped, cfg,
      [&](const NormalParams& p) { return step_normal(x, p, q, cfg.variance_floor); },
      [](const NormalParams& next, const NormalParams& prev) {
        return std::max(detail::location_change(next.mu, prev.mu, next.sigma2),
                        detail::relative_change(next.sigma2, prev.sigma2));
      },
      [](const NormalParams& p, int it, bool conv, bool clip) {
        return NormalFit{p.mu, p.sigma2, it, conv, clip};
      });
}

inline NormalFit fit_variance_known_mean(Sample x, double mu, QParam q, const FitConfig& cfg = {}) {
  cfg.validate();
  detail::require_size(x, 1, "fit_variance_known_mean");
  detail::require_finite(x, "fit_variance_known_mean");
  if (!std::isfinite(mu)) throw DomainError("fit_variance_known_mean: mu must be finite");

  bool clipped = false;
  NormalParams init{mu, detail::clip(detail::sum_sq_dev(x, mu) / static_cast<double>(x.size()),
                                     cfg.variance_floor, clipped)};
  return detail::iterate<NormalParams, NormalFit>(
      init, clipped, cfg,
      [&](const NormalParams& p) { return step_known_mean(x, p, q, cfg.variance_floor); },
      [](const NormalParams& next, const NormalParams& prev) {
        return detail::relative_change(next.sigma2, prev.sigma2);
      },
      [](const NormalParams& p, int it, bool conv, bool clip) {
        return NormalFit{p.mu, p.sigma2, it, conv, clip};
      });
}

inline SharedVarianceFit fit_shared_variance(Sample x, Sample y, QParam q,
                                             const FitConfig& cfg = {}) {
  cfg.validate();
  detail::require_size(x, 2, "fit_shared_variance");
  detail::require_size(y, 2, "fit_shared_variance");
  detail::require_finite(x, "fit_shared_variance");
  detail::require_finite(y, "fit_shared_variance");

  bool clipped = false;
  const double mx = detail::mean(x);
  const double my = detail::mean(y);
  const double pooled = (detail::sum_sq_dev(x, mx) + detail::sum_sq_dev(y, my)) /
                        static_cast<double>(x.size() + y.size());
  SharedVarianceParams init{mx, my, detail::clip(pooled, cfg.variance_floor, clipped)};
  return detail::iterate<SharedVarianceParams, SharedVarianceFit>(
      init, clipped, cfg,
      [&](const SharedVarianceParams& p) {
        return step_shared_variance(x, y, p, q, cfg.variance_floor);
      },
      [](const SharedVarianceParams& next, const SharedVarianceParams& prev) {
        return std::max({detail::location_change(next.mu_x, prev.mu_x, next.sigma2),
                         detail::location_change(next.mu_y, prev.mu_y, next.sigma2),
                         detail::relative_change(next.sigma2, prev.sigma2)});
      },
      [](const SharedVarianceParams& p, int it, bool conv, bool clip) {
        return SharedVarianceFit{p.mu_x, p.mu_y, p.sigma2, it, conv, clip};
      });
}

inline SharedMeanFit fit_shared_mean(Sample x, Sample y, QParam q, const FitConfig& cfg = {}) {
  cfg.validate();
  detail::require_size(x, 2, "fit_shared_mean");
  detail::require_size(y, 2, "fit_shared_mean");
  detail::require_finite(x, "fit_shared_mean");
  detail::require_finite(y, "fit_shared_mean");

  bool clipped_x = false;
  bool clipped_y = false;
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  const double mu0 = (detail::mean(x) * n + detail::mean(y) * m) / (n + m);
  SharedMeanParams init{mu0, detail::clip(detail::sum_sq_dev(x, mu0) / n, cfg.variance_floor, clipped_x),
                        detail::clip(detail::sum_sq_dev(y, mu0) / m, cfg.variance_floor, clipped_y)};
  return detail::iterate<SharedMeanParams, SharedMeanFit>(
      init, clipped_x || clipped_y, cfg,
      [&](const SharedMeanParams& p) { return step_shared_mean(x, y, p, q, cfg.variance_floor); },
      [](const SharedMeanParams& next, const SharedMeanParams& prev) {
        const double tighter = std::min(next.sigma2_x, next.sigma2_y);
        return std::max({detail::location_change(next.mu, prev.mu, tighter),
                         detail::relative_change(next.sigma2_x, prev.sigma2_x),
                         detail::relative_change(next.sigma2_y, prev.sigma2_y)});
      },
      [](const SharedMeanParams& p, int it, bool conv, bool clip) {
        return SharedMeanFit{p.mu, p.sigma2_x, p.sigma2_y, it, conv, clip};
      });
}

/// Asymptotically unbiased variance, q * sigma2. Diagnostic only; the tests
/// work with the uncorrected estimate.
inline double variance_bias_correction(double sigma2, QParam q) {
  if (!(sigma2 > 0.0)) throw DomainError("variance_bias_correction requires sigma2 > 0");
  return q.value() * sigma2;
}

}  // namespace lqrt
