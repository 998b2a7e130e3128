#pragma once

// Classical comparison tests: Student/Welch t-tests, Wilcoxon signed-rank,
// Wilcoxon rank-sum and the sign test. All p-values are two-sided.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lqrt/errors.hpp"
#include "lqrt/lqmath.hpp"
#include "lqrt/special.hpp"

namespace lqrt::classical {

enum class Method {
  t_1samp,
  t_rel,
  t_ind_pooled,
  t_ind_welch,
  wilcoxon_signed_rank,
  rank_sum,
  sign,
};

constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::t_1samp: return "t_1samp";
    case Method::t_rel: return "t_rel";
    case Method::t_ind_pooled: return "t_ind_pooled";
    case Method::t_ind_welch: return "t_ind_welch";
    case Method::wilcoxon_signed_rank: return "wilcoxon_signed_rank";
    case Method::rank_sum: return "rank_sum";
    case Method::sign: return "sign";
  }
  return "unknown";
}

struct ClassicalOutcome {
  double statistic = 0.0;
  double pvalue = 1.0;
  Method method = Method::t_1samp;
};

namespace detail {

inline void require(bool ok, const char* msg) {
  if (!ok) throw DomainError(msg);
}

inline void require_finite(Sample s, const char* who) {
  for (double v : s) {
    if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite observation");
  }
}

inline double mean(Sample s) {
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

/// Unbiased sample variance.
inline double variance(Sample s, double m) {
  double ss = 0.0;
  for (double v : s) ss += (v - m) * (v - m);
  return ss / static_cast<double>(s.size() - 1);
}

/// Mid-ranks (1-based) of values; also returns sum over tie groups of t^3 - t.
inline std::vector<double> midranks(const std::vector<double>& values, double* tie_term = nullptr) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

}  // namespace detail

/// One-sample t-test. A zero-variance sample yields p = 1 when its mean
/// equals mu0 and p = 0 otherwise (statistic 0 or +-inf).
inline ClassicalOutcome ttest_1samp(Sample x, double mu0) {
  detail::require(x.size() >= 2, "ttest_1samp: need at least 2 observations");
  detail::require_finite(x, "ttest_1samp");
  const double n = static_cast<double>(x.size());
  const double m = detail::mean(x);
  const double var = detail::variance(x, m);
  ClassicalOutcome out{0.0, 1.0, Method::t_1samp};
  if (var == 0.0) {
    if (m != mu0) {
      out.statistic = m > mu0 ? INFINITY : -INFINITY;
      out.pvalue = 0.0;
    }
    return out;
  }
  out.statistic = (m - mu0) / std::sqrt(var / n);
  out.pvalue = special::student_t_two_sided(out.statistic, n - 1.0);
  return out;
}

inline ClassicalOutcome ttest_rel(Sample x, Sample y) {
  detail::require(x.size() == y.size(), "ttest_rel: samples must have equal length");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - y[i];
  ClassicalOutcome out = ttest_1samp(d, 0.0);
  out.method = Method::t_rel;
  return out;
}

/// Student t with pooled unbiased variance (df = n + m - 2) when equal_var,
/// Welch t with Welch-Satterthwaite df otherwise.
inline ClassicalOutcome ttest_ind(Sample x, Sample y, bool equal_var = true) {
  detail::require(x.size() >= 2 && y.size() >= 2, "ttest_ind: need at least 2 observations each");
  detail::require_finite(x, "ttest_ind");
  detail::require_finite(y, "ttest_ind");
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  const double mx = detail::mean(x);
  const double my = detail::mean(y);
  const double vx = detail::variance(x, mx);
  const double vy = detail::variance(y, my);
  ClassicalOutcome out{0.0, 1.0, equal_var ? Method::t_ind_pooled : Method::t_ind_welch};

  if (vx == 0.0 && vy == 0.0) {
    if (mx != my) {
      out.statistic = mx > my ? INFINITY : -INFINITY;
      out.pvalue = 0.0;
    }
    return out;
  }
  double se2 = 0.0;
  double df = 0.0;
  if (equal_var) {
    const double pooled = ((n - 1.0) * vx + (m - 1.0) * vy) / (n + m - 2.0);
    se2 = pooled * (1.0 / n + 1.0 / m);
    df = n + m - 2.0;
  } else {
    const double ax = vx / n;
    const double ay = vy / m;
    se2 = ax + ay;
    df = se2 * se2 / (ax * ax / (n - 1.0) + ay * ay / (m - 1.0));
  }
  out.statistic = (mx - my) / std::sqrt(se2);
  out.pvalue = special::student_t_two_sided(out.statistic, df);
  return out;
}

/// Number of nonzero differences up to which the signed-rank p-value is exact.
inline constexpr std::size_t kSignedRankExactMax = 25;

/// Wilcoxon signed-rank test on x (against 0) or on x - y.
///
/// Zero differences are dropped; absolute differences get mid-ranks. The
/// statistic is min(W+, W-). Exact null distribution (counting subsets of
/// the actual, possibly tied, ranks) for n' <= 25, otherwise the normal
/// approximation with tie-corrected variance and continuity correction.
inline ClassicalOutcome wilcoxon_signed_rank(Sample x, std::optional<Sample> y = std::nullopt) {
  detail::require_finite(x, "wilcoxon_signed_rank");
  std::vector<double> d;
  if (y) {
    detail::require(x.size() == y->size(), "wilcoxon_signed_rank: samples must have equal length");
    detail::require_finite(*y, "wilcoxon_signed_rank");
    for (std::size_t i = 0; i < x.size(); ++i) d.push_back(x[i] - (*y)[i]);
  } else {
    d.assign(x.begin(), x.end());
  }
  std::erase(d, 0.0);

  ClassicalOutcome out{0.0, 1.0, Method::wilcoxon_signed_rank};
  if (d.empty()) return out;

  std::vector<double> abs_d(d.size());
  std::transform(d.begin(), d.end(), abs_d.begin(), [](double v) { return std::abs(v); });
  double tie_term = 0.0;
  const std::vector<double> ranks = detail::midranks(abs_d, &tie_term);
  double w_plus = 0.0;
  double w_minus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0.0 ? w_plus : w_minus) += ranks[i];
  const double w = std::min(w_plus, w_minus);
  out.statistic = w;

  const std::size_t n = d.size();
  if (n <= kSignedRankExactMax) {
    // Mid-ranks are multiples of 1/2; count subsets of doubled ranks.
    std::vector<std::size_t> doubled(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t r : doubled) {
      for (std::size_t s = total; s >= r; --s) {
        count[s] += count[s - r];
        if (s == r) break;
      }
    }
    const auto limit = static_cast<std::size_t>(std::lround(2.0 * w));
    double lower = 0.0;
    for (std::size_t s = 0; s <= limit; ++s) lower += count[s];
    out.pvalue = std::min(1.0, 2.0 * std::ldexp(lower, -static_cast<int>(n)));
    return out;
  }
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double dev = std::max(std::abs(w - mean) - 0.5, 0.0);
  out.pvalue = var > 0.0 ? std::min(1.0, 2.0 * special::normal_cdf(-dev / std::sqrt(var))) : 1.0;
  return out;
}

/// Wilcoxon rank-sum z statistic (rank sum of x), normal approximation with
/// mid-ranks, no tie correction and no continuity correction.
inline ClassicalOutcome rank_sum(Sample x, Sample y) {
  detail::require(!x.empty() && !y.empty(), "rank_sum: samples must be non-empty");
  detail::require_finite(x, "rank_sum");
  detail::require_finite(y, "rank_sum");
  std::vector<double> all(x.begin(), x.end());
  all.insert(all.end(), y.begin(), y.end());
  const std::vector<double> ranks = detail::midranks(all);
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);
  const double expected = n1 * (n1 + n2 + 1.0) / 2.0;
  const double sd = std::sqrt(n1 * n2 * (n1 + n2 + 1.0) / 12.0);
  ClassicalOutcome out{(r1 - expected) / sd, 1.0, Method::rank_sum};
  out.pvalue = std::min(1.0, 2.0 * special::normal_cdf(-std::abs(out.statistic)));
  return out;
}

/// Exact sign test of the median against mu0. The statistic is k - n'/2,
/// k the count above mu0 among the n' observations not equal to it.
inline ClassicalOutcome sign_test(Sample x, double mu0 = 0.0) {
  detail::require(!x.empty(), "sign_test: sample must be non-empty");
  detail::require_finite(x, "sign_test");
  std::int64_t above = 0;
  std::int64_t below = 0;
  for (double v : x) {
    if (v > mu0) ++above;
    else if (v < mu0) ++below;
  }
  const std::int64_t n = above + below;
  ClassicalOutcome out{static_cast<double>(above) - 0.5 * static_cast<double>(n), 1.0, Method::sign};
  if (n == 0) return out;
  const auto un = static_cast<std::uint64_t>(n);
  const double upper = special::binomial_tail(un, above);      // P(K >= k)
  const double lower = special::binomial_tail(un, n - above);  // P(K <= k) by symmetry
  out.pvalue = std::min(1.0, 2.0 * std::min(upper, lower));
  return out;
}

}  // namespace lqrt::classical
