#pragma once

// Lq-likelihood-ratio-type tests for normal means: one-sample, paired and
// two-sample unpaired (pooled or separate variances), with bootstrap
// p-values and adaptive selection of q.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "lqrt/errors.hpp"
#include "lqrt/lqmath.hpp"
#include "lqrt/mlqe.hpp"
#include "lqrt/parallel.hpp"
#include "lqrt/random.hpp"

namespace lqrt {

/// A statistic together with its unclamped value and whether any of the
/// underlying fits clipped a variance or stopped at max_iter.
struct StatisticEval {
  double value = 0.0;
  double raw = 0.0;
  bool degenerate = false;
};

namespace detail {

inline StatisticEval make_eval(double term_full, double term_null, bool degenerate) {
  const double raw = 2.0 * (term_full - term_null);
  return {std::max(raw, 0.0), raw, degenerate};
}

inline std::vector<double> concat(Sample x, Sample y) {
  std::vector<double> out(x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

}  // namespace detail

inline StatisticEval evaluate_1samp(Sample x, double mu0, QParam q, const FitConfig& cfg = {}) {
  const NormalFit full = fit_normal(x, q, cfg);
  const NormalFit null = fit_variance_known_mean(x, mu0, q, cfg);
  return detail::make_eval(lq_likelihood(x, full.params(), q), lq_likelihood(x, null.params(), q),
                           full.degenerate() || null.degenerate());
}

/// Pooled-variance statistic: separate means under the alternative, one
/// mean and one variance for the combined sample under the null.
inline StatisticEval evaluate_ind_equal_var(Sample x, Sample y, QParam q,
                                            const FitConfig& cfg = {}) {
  const SharedVarianceFit full = fit_shared_variance(x, y, q, cfg);
  const std::vector<double> both = detail::concat(x, y);
  const NormalFit null = fit_normal(both, q, cfg);
  return detail::make_eval(
      lq_likelihood(x, full.params_x(), q) + lq_likelihood(y, full.params_y(), q),
      lq_likelihood(both, null.params(), q), full.degenerate() || null.degenerate());
}

/// Separate-variance statistic: each sample fit freely under the alternative,
/// a common mean with separate variances under the null.
inline StatisticEval evaluate_ind_unequal_var(Sample x, Sample y, QParam q,
                                              const FitConfig& cfg = {}) {
  const NormalFit fx = fit_normal(x, q, cfg);
  const NormalFit fy = fit_normal(y, q, cfg);
  const SharedMeanFit null = fit_shared_mean(x, y, q, cfg);
  return detail::make_eval(
      lq_likelihood(x, fx.params(), q) + lq_likelihood(y, fy.params(), q),
      lq_likelihood(x, null.params_x(), q) + lq_likelihood(y, null.params_y(), q),
      fx.degenerate() || fy.degenerate() || null.degenerate());
}

inline StatisticEval evaluate_ind(Sample x, Sample y, QParam q, bool equal_var,
                                  const FitConfig& cfg = {}) {
  return equal_var ? evaluate_ind_equal_var(x, y, q, cfg) : evaluate_ind_unequal_var(x, y, q, cfg);
}

inline double statistic_1samp(Sample x, double mu0, QParam q, const FitConfig& cfg = {}) {
  return evaluate_1samp(x, mu0, q, cfg).value;
}

inline double statistic_ind_equal_var(Sample x, Sample y, QParam q, const FitConfig& cfg = {}) {
  return evaluate_ind_equal_var(x, y, q, cfg).value;
}

inline double statistic_ind_unequal_var(Sample x, Sample y, QParam q, const FitConfig& cfg = {}) {
  return evaluate_ind_unequal_var(x, y, q, cfg).value;
}

// ---------------------------------------------------------------------------
// Bootstrap p-values

struct BootstrapPValue {
  double pvalue = 1.0;
  double degenerate_fraction = 0.0;
  double statistic = 0.0;  // observed statistic on the original data
};

namespace detail {

inline void require_bootstrap(int b) {
  if (b < 1) throw DomainError("bootstrap count must be at least 1");
}

/// p = #{D_b > D} / B. An observed statistic of exactly zero is the least
/// extreme value possible and gets p = 1.
inline BootstrapPValue summarize(double observed, const std::vector<double>& boot,
                                 const std::vector<char>& degenerate) {
  const auto exceed = std::count_if(boot.begin(), boot.end(), [&](double d) { return d > observed; });
  const auto bad = std::count(degenerate.begin(), degenerate.end(), char{1});
  const double b = static_cast<double>(boot.size());
  BootstrapPValue out;
  out.statistic = observed;
  out.pvalue = observed == 0.0 ? 1.0 : static_cast<double>(exceed) / b;
  out.degenerate_fraction = static_cast<double>(bad) / b;
  return out;
}

}  // namespace detail

/// Resamples the data shifted so its Lq-location equals mu0 and counts
/// bootstrap statistics above the observed one. Repetition b draws from
/// rng::substream(seed, {b}).
inline BootstrapPValue pvalue_bootstrap_1samp(Sample x, double mu0, QParam q, int bootstrap,
                                              std::uint64_t seed, Execution exec = {},
                                              const FitConfig& cfg = {}) {
  detail::require_bootstrap(bootstrap);
  const NormalFit center = fit_normal(x, q, cfg);
  std::vector<double> shifted(x.begin(), x.end());
  for (double& v : shifted) v = v - center.mu + mu0;

  const StatisticEval observed = evaluate_1samp(x, mu0, q, cfg);
  const auto count = static_cast<std::size_t>(bootstrap);
  std::vector<double> boot(count);
  std::vector<char> degenerate(count);
  parallel_for(count, exec, [&](std::size_t b) {
    rng::Engine stream = rng::substream(seed, {b});
    const std::vector<double> draw = rng::resample(shifted, stream);
    const StatisticEval s = evaluate_1samp(draw, mu0, q, cfg);
    boot[b] = s.value;
    degenerate[b] = s.degenerate ? 1 : 0;
  });
  return detail::summarize(observed.value, boot, degenerate);
}

/// Both samples are centered at zero by their own Lq-locations and resampled
/// independently; within repetition b the first sample's indices are drawn
/// before the second's from rng::substream(seed, {b}).
inline BootstrapPValue pvalue_bootstrap_ind(Sample x, Sample y, QParam q, bool equal_var,
                                            int bootstrap, std::uint64_t seed,
                                            Execution exec = {}, const FitConfig& cfg = {}) {
  detail::require_bootstrap(bootstrap);
  const NormalFit cx = fit_normal(x, q, cfg);
  const NormalFit cy = fit_normal(y, q, cfg);
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  for (double& v : xs) v -= cx.mu;
  for (double& v : ys) v -= cy.mu;

  const StatisticEval observed = evaluate_ind(x, y, q, equal_var, cfg);
  const auto count = static_cast<std::size_t>(bootstrap);
  std::vector<double> boot(count);
  std::vector<char> degenerate(count);
  parallel_for(count, exec, [&](std::size_t b) {
    rng::Engine stream = rng::substream(seed, {b});
    const std::vector<double> dx = rng::resample(xs, stream);
    const std::vector<double> dy = rng::resample(ys, stream);
    const StatisticEval s = evaluate_ind(dx, dy, q, equal_var, cfg);
    boot[b] = s.value;
    degenerate[b] = s.degenerate ? 1 : 0;
  });
  return detail::summarize(observed.value, boot, degenerate);
}

// ---------------------------------------------------------------------------
// Selection of q

struct QGridPoint {
  double q = 1.0;
  double objective = 0.0;
};

struct QSelectionReport {
  QParam q_hat{1.0};
  std::vector<QGridPoint> grid;
};

/// 0.50, 0.51, ..., 1.00.
inline std::vector<double> q_grid() {
  std::vector<double> grid;
  grid.reserve(51);
  for (int k = 50; k <= 100; ++k) grid.push_back(static_cast<double>(k) / 100.0);
  return grid;
}

/// Empirical sandwich variance a_q * b_q * a_q of the location MLqE, with
/// a_q the inverse mean curvature and b_q the mean squared score, both
/// evaluated at the unconstrained fit. +inf when the curvature sum is zero
/// or the result is not a number.
inline double sandwich_variance(Sample x, QParam q, const FitConfig& cfg = {}) {
  const NormalFit fit = fit_normal(x, q, cfg);
  const NormalParams p = fit.params();
  double curvature = 0.0;
  double score_sq = 0.0;
  for (double v : x) {
    curvature += lq_curvature_mu(v, p, q);
    const double s = lq_score_mu(v, p, q);
    score_sq += s * s;
  }
  if (curvature == 0.0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(x.size());
  const double a = 1.0 / (curvature / n);
  const double b = score_sq / n;
  const double v = a * b * a;
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

namespace detail {

/// Grid argmin; among equal objectives the largest q wins.
template <class Objective>
QSelectionReport select_on_grid(Objective objective) {
  QSelectionReport report;
  double best = std::numeric_limits<double>::infinity();
  double best_q = 1.0;
  for (double q : q_grid()) {
    const double v = objective(QParam(q));
    report.grid.push_back({q, v});
    if (v <= best) {
      best = v;
      best_q = q;
    }
  }
  report.q_hat = QParam(best_q);
  return report;
}

}  // namespace detail

inline QSelectionReport select_q_1samp(Sample x, const FitConfig& cfg = {}) {
  detail::require_size(x, 3, "select_q_1samp");
  detail::require_finite(x, "select_q_1samp");
  return detail::select_on_grid([&](QParam q) { return sandwich_variance(x, q, cfg); });
}

/// Sum of the per-sample sandwich variances, each from that sample's own
/// unconstrained fit. equal_var does not change the objective.
inline QSelectionReport select_q_ind(Sample x, Sample y, bool /*equal_var*/,
                                     const FitConfig& cfg = {}) {
  detail::require_size(x, 3, "select_q_ind");
  detail::require_size(y, 3, "select_q_ind");
  detail::require_finite(x, "select_q_ind");
  detail::require_finite(y, "select_q_ind");
  return detail::select_on_grid(
      [&](QParam q) { return sandwich_variance(x, q, cfg) + sandwich_variance(y, q, cfg); });
}

// ---------------------------------------------------------------------------
// Public tests

struct TestOptions {
  std::optional<double> q;  // empty: select q adaptively
  int bootstrap = 100;
  std::optional<std::uint64_t> seed;  // empty: seeded from std::random_device
  Execution exec{};
  FitConfig fit{};
};

struct TestOutcome {
  double statistic = 0.0;
  double pvalue = 1.0;
  QParam q_used{1.0};
  int bootstrap_count = 0;
  double degenerate_fraction = 0.0;
  std::uint64_t seed = 0;
  bool q_selected = false;
};

namespace detail {

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

inline TestOutcome make_outcome(const BootstrapPValue& p, QParam q, const TestOptions& opts,
                                std::uint64_t seed) {
  return {p.statistic, p.pvalue, q, opts.bootstrap, p.degenerate_fraction, seed,
          !opts.q.has_value()};
}

}  // namespace detail

inline TestOutcome lqrtest_1samp(Sample x, double u, const TestOptions& opts = {}) {
  detail::require_size(x, opts.q ? 2 : 3, "lqrtest_1samp");
  detail::require_finite(x, "lqrtest_1samp");
  if (!std::isfinite(u)) throw DomainError("lqrtest_1samp: u must be finite");
  detail::require_bootstrap(opts.bootstrap);

  const QParam q = opts.q ? QParam(*opts.q) : select_q_1samp(x, opts.fit).q_hat;
  const std::uint64_t seed = detail::resolve_seed(opts.seed);
  const BootstrapPValue p = pvalue_bootstrap_1samp(x, u, q, opts.bootstrap, seed, opts.exec, opts.fit);
  return detail::make_outcome(p, q, opts, seed);
}

/// Paired test: the one-sample test on x1 - x2 against 0.
inline TestOutcome lqrtest_rel(Sample x1, Sample x2, const TestOptions& opts = {}) {
  if (x1.size() != x2.size()) {
    throw DomainError("lqrtest_rel: samples must have equal length");
  }
  std::vector<double> diff(x1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x1[i] - x2[i];
  return lqrtest_1samp(diff, 0.0, opts);
}

inline TestOutcome lqrtest_ind(Sample x1, Sample x2, bool equal_var = true,
                               const TestOptions& opts = {}) {
  const std::size_t min_size = opts.q ? 2 : 3;
  detail::require_size(x1, min_size, "lqrtest_ind");
  detail::require_size(x2, min_size, "lqrtest_ind");
  detail::require_finite(x1, "lqrtest_ind");
  detail::require_finite(x2, "lqrtest_ind");
  detail::require_bootstrap(opts.bootstrap);

  const QParam q = opts.q ? QParam(*opts.q) : select_q_ind(x1, x2, equal_var, opts.fit).q_hat;
  const std::uint64_t seed = detail::resolve_seed(opts.seed);
  const BootstrapPValue p =
      pvalue_bootstrap_ind(x1, x2, q, equal_var, opts.bootstrap, seed, opts.exec, opts.fit);
  return detail::make_outcome(p, q, opts, seed);
}

}  // namespace lqrt
