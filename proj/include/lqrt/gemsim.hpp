#pragma once

// Gross-error-model data generation and the Monte Carlo size/power runner.
//
// Observations come from (1 - eps) N(mu, sigma2) + eps N(mu, tau2). A
// scenario fixes the set-up, the null and alternative means, variances and
// sample size; run_scenario estimates the rejection rate of one test over a
// grid of contamination levels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lqrt/baselines.hpp"
#include "lqrt/errors.hpp"
#include "lqrt/lqrtest.hpp"
#include "lqrt/parallel.hpp"
#include "lqrt/random.hpp"
#include "lqrt/special.hpp"

namespace lqrt::gem {

struct GrossErrorSpec {
  double mu = 0.0;
  double sigma2 = 1.0;  // inlier variance
  double tau2 = 50.0;   // outlier variance
  double eps = 0.0;     // contamination probability

  void validate() const {
    if (!std::isfinite(mu)) throw DomainError("GrossErrorSpec: mu must be finite");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("GrossErrorSpec: sigma2 must be positive");
    if (!(tau2 > sigma2) || !std::isfinite(tau2)) throw DomainError("GrossErrorSpec: tau2 must exceed sigma2");
    if (!(eps >= 0.0 && eps < 0.5)) throw DomainError("GrossErrorSpec: eps must lie in [0, 0.5)");
  }

  [[nodiscard]] double mixture_variance() const noexcept { return (1.0 - eps) * sigma2 + eps * tau2; }
};

/// n independent draws; each observation first draws its outlier indicator,
/// then its value.
inline std::vector<double> sample_gem(const GrossErrorSpec& spec, std::size_t n, rng::Engine& stream) {
  spec.validate();
  const double sd_in = std::sqrt(spec.sigma2);
  const double sd_out = std::sqrt(spec.tau2);
  std::vector<double> out(n);
  for (double& v : out) {
    const bool outlier = rng::uniform01(stream) < spec.eps;
    v = spec.mu + (outlier ? sd_out : sd_in) * rng::standard_normal(stream);
  }
  return out;
}

/// n pairs sharing one outlier indicator per pair: both members come from the
/// inlier component or both from the outlier component.
inline std::pair<std::vector<double>, std::vector<double>> sample_gem_paired(const GrossErrorSpec& spec,
                                                                             std::size_t n,
                                                                             rng::Engine& stream) {
  spec.validate();
  const double sd_in = std::sqrt(spec.sigma2);
  const double sd_out = std::sqrt(spec.tau2);
  std::vector<double> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sd = rng::uniform01(stream) < spec.eps ? sd_out : sd_in;
    a[i] = spec.mu + sd * rng::standard_normal(stream);
    b[i] = spec.mu + sd * rng::standard_normal(stream);
  }
  return {std::move(a), std::move(b)};
}

enum class Setup { one_sample, paired, unpaired_equal_var, unpaired_unequal_var };

constexpr std::string_view setup_name(Setup s) {
  switch (s) {
    case Setup::one_sample: return "one_sample";
    case Setup::paired: return "paired";
    case Setup::unpaired_equal_var: return "unpaired_equal_var";
    case Setup::unpaired_unequal_var: return "unpaired_unequal_var";
  }
  return "unknown";
}

inline Setup parse_setup(std::string_view name) {
  for (Setup s : {Setup::one_sample, Setup::paired, Setup::unpaired_equal_var, Setup::unpaired_unequal_var}) {
    if (setup_name(s) == name) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

struct Means {
  double first = 0.0;
  double second = 0.0;  // unused in the one-sample set-up
};

struct ScenarioSpec {
  Setup setup = Setup::one_sample;
  Means means_null;
  Means means_alt;
  double sigma2_first = 1.0;
  double sigma2_second = 1.0;
  double tau2 = 50.0;
  std::size_t n = 50;
  std::string hypothesis;

  [[nodiscard]] std::string_view name() const { return setup_name(setup); }

  void validate() const {
    if (n < 2) throw DomainError("ScenarioSpec: n must be at least 2");
    for (double v : {means_null.first, means_null.second, means_alt.first, means_alt.second,
                     sigma2_first, sigma2_second, tau2}) {
      if (!std::isfinite(v)) throw DomainError("ScenarioSpec: parameters must be finite");
    }
  }
};

/// The four set-ups of the comparison study, n = 50 per sample.
inline std::vector<ScenarioSpec> builtin_scenarios() {
  return {
      {Setup::one_sample, {0.0, 0.0}, {0.34, 0.0}, 1.0, 1.0, 50.0, 50, "H0: mu1 = 0 vs H1: mu1 != 0"},
      {Setup::paired, {0.0, 0.0}, {0.0, 0.5}, 1.0, 1.0, 50.0, 50, "H0: mu1 = mu2 vs H1: mu1 != mu2"},
      {Setup::unpaired_equal_var, {0.0, 0.0}, {0.0, 0.5}, 1.0, 1.0, 50.0, 50,
       "H0: mu1 = mu2 vs H1: mu1 != mu2"},
      {Setup::unpaired_unequal_var, {0.0, 0.0}, {0.0, 0.5}, 1.0, 0.01, 50.0, 50,
       "H0: mu1 = mu2 vs H1: mu1 != mu2"},
  };
}

inline const ScenarioSpec& builtin_scenario(Setup setup) {
  static const std::vector<ScenarioSpec> all = builtin_scenarios();
  for (const auto& s : all) {
    if (s.setup == setup) return s;
  }
  throw ConfigError("no builtin scenario");
}

enum class TestId { lqrt, ttest, wilcoxon, sign, ranksum };

constexpr std::string_view test_name(TestId t) {
  switch (t) {
    case TestId::lqrt: return "lqrt";
    case TestId::ttest: return "ttest";
    case TestId::wilcoxon: return "wilcoxon";
    case TestId::sign: return "sign";
    case TestId::ranksum: return "ranksum";
  }
  return "unknown";
}

inline TestId parse_test(std::string_view name) {
  for (TestId t : {TestId::lqrt, TestId::ttest, TestId::wilcoxon, TestId::sign, TestId::ranksum}) {
    if (test_name(t) == name) return t;
  }
  throw ConfigError("unknown test '" + std::string(name) + "'");
}

/// Tests compared in each set-up.
inline std::vector<TestId> tests_for(Setup setup) {
  switch (setup) {
    case Setup::one_sample:
    case Setup::paired: return {TestId::lqrt, TestId::ttest, TestId::wilcoxon, TestId::sign};
    case Setup::unpaired_equal_var:
    case Setup::unpaired_unequal_var: return {TestId::lqrt, TestId::ttest, TestId::ranksum};
  }
  return {};
}

/// Default contamination grid.
inline std::vector<double> default_eps_grid() { return {0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30}; }

enum class Hypothesis { null_hypothesis, alternative };

struct RunOptions {
  int reps = 500;
  double alpha = 0.05;
  int bootstrap = 200;
  std::uint64_t seed = 0;
  Hypothesis hypothesis = Hypothesis::alternative;
  Execution exec{};

  void validate() const {
    if (reps < 1) throw DomainError("RunOptions: reps must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("RunOptions: alpha must lie in (0, 1)");
    if (bootstrap < 1) throw DomainError("RunOptions: bootstrap must be at least 1");
  }
};

struct PowerEstimate {
  double rejection_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int repetitions = 0;
  double alpha = 0.05;
  double epsilon = 0.0;
  std::string test_name;
  std::uint64_t seed = 0;
};

/// rate +- 1.96 sqrt(rate (1 - rate) / reps), clamped to [0, 1].
inline std::pair<double, double> normal_interval(double rate, int reps) {
  const double half = 1.96 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
  return {std::max(0.0, rate - half), std::min(1.0, rate + half)};
}

/// Central interval [lo/n, hi/n] of Binomial(n, p) with at least the given
/// coverage: lo is the smallest k with P(K <= k) >= (1 - level)/2 and hi the
/// smallest k with P(K <= k) >= (1 + level)/2.
inline std::pair<double, double> exact_binomial_interval(int n, double p, double level) {
  const double lo_target = 0.5 * (1.0 - level);
  const double hi_target = 0.5 * (1.0 + level);
  const auto un = static_cast<std::uint64_t>(n);
  int lo = 0;
  while (lo < n && special::binomial_cdf(un, lo, p) < lo_target) ++lo;
  int hi = lo;
  while (hi < n && special::binomial_cdf(un, hi, p) < hi_target) ++hi;
  return {static_cast<double>(lo) / n, static_cast<double>(hi) / n};
}

/// One simulated data set.
struct Dataset {
  std::vector<double> first;
  std::vector<double> second;  // empty in the one-sample set-up
};

/// Data for one repetition, drawn from rng::substream(seed, {eps_index, rep, 0}).
inline Dataset generate(const ScenarioSpec& sc, double eps, Hypothesis h, std::uint64_t seed,
                        std::uint64_t eps_index, std::uint64_t rep) {
  rng::Engine stream = rng::substream(seed, {eps_index, rep, 0});
  const Means& means = h == Hypothesis::null_hypothesis ? sc.means_null : sc.means_alt;
  Dataset d;
  switch (sc.setup) {
    case Setup::one_sample:
      d.first = sample_gem({means.first, sc.sigma2_first, sc.tau2, eps}, sc.n, stream);
      break;
    case Setup::paired: {
      auto [a, b] = sample_gem_paired({0.0, sc.sigma2_first, sc.tau2, eps}, sc.n, stream);
      for (double& v : a) v += means.first;
      for (double& v : b) v += means.second;
      d.first = std::move(a);
      d.second = std::move(b);
      break;
    }
    case Setup::unpaired_equal_var:
    case Setup::unpaired_unequal_var:
      d.first = sample_gem({means.first, sc.sigma2_first, sc.tau2, eps}, sc.n, stream);
      d.second = sample_gem({means.second, sc.sigma2_second, sc.tau2, eps}, sc.n, stream);
      break;
  }
  return d;
}

/// p-value of one test on one data set. LqRT selects q adaptively and
/// bootstraps serially with the given seed.
inline double run_test(const ScenarioSpec& sc, TestId test, const Dataset& d, int bootstrap,
                       std::uint64_t boot_seed) {
  const auto valid = tests_for(sc.setup);
  if (std::find(valid.begin(), valid.end(), test) == valid.end()) {
    throw ConfigError("test '" + std::string(test_name(test)) + "' does not apply to scenario '" +
                      std::string(sc.name()) + "'");
  }
  TestOptions opts;
  opts.bootstrap = bootstrap;
  opts.seed = boot_seed;
  const double mu0 = sc.means_null.first;
  switch (sc.setup) {
    case Setup::one_sample:
      switch (test) {
        case TestId::lqrt: return lqrtest_1samp(d.first, mu0, opts).pvalue;
        case TestId::ttest: return classical::ttest_1samp(d.first, mu0).pvalue;
        case TestId::wilcoxon: {
          std::vector<double> centered = d.first;
          for (double& v : centered) v -= mu0;
          return classical::wilcoxon_signed_rank(centered).pvalue;
        }
        case TestId::sign: return classical::sign_test(d.first, mu0).pvalue;
        default: break;
      }
      break;
    case Setup::paired:
      switch (test) {
        case TestId::lqrt: return lqrtest_rel(d.first, d.second, opts).pvalue;
        case TestId::ttest: return classical::ttest_rel(d.first, d.second).pvalue;
        case TestId::wilcoxon: return classical::wilcoxon_signed_rank(d.first, Sample(d.second)).pvalue;
        case TestId::sign: {
          std::vector<double> diff(d.first.size());
          for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = d.first[i] - d.second[i];
          return classical::sign_test(diff, 0.0).pvalue;
        }
        default: break;
      }
      break;
    case Setup::unpaired_equal_var:
    case Setup::unpaired_unequal_var: {
      const bool equal_var = sc.setup == Setup::unpaired_equal_var;
      switch (test) {
        case TestId::lqrt: return lqrtest_ind(d.first, d.second, equal_var, opts).pvalue;
        case TestId::ttest: return classical::ttest_ind(d.first, d.second, equal_var).pvalue;
        case TestId::ranksum: return classical::rank_sum(d.first, d.second).pvalue;
        default: break;
      }
      break;
    }
  }
  throw ConfigError("unsupported test for scenario");
}

/// Rejection indicators (p <= alpha) for every repetition at one contamination
/// level. Repetition r uses data from generate(..., eps_index, r) and, for
/// LqRT, bootstrap seed rng::derive_seed(seed, {eps_index, r, 1}).
inline std::vector<char> simulate_rejections(const ScenarioSpec& sc, TestId test, double eps,
                                             std::uint64_t eps_index, const RunOptions& opts) {
  std::vector<char> reject(static_cast<std::size_t>(opts.reps));
  parallel_for(reject.size(), opts.exec, [&](std::size_t r) {
    const Dataset d = generate(sc, eps, opts.hypothesis, opts.seed, eps_index, r);
    const std::uint64_t boot_seed = rng::derive_seed(opts.seed, {eps_index, r, 1});
    reject[r] = run_test(sc, test, d, opts.bootstrap, boot_seed) <= opts.alpha ? 1 : 0;
  });
  return reject;
}

inline std::vector<PowerEstimate> run_scenario(const ScenarioSpec& sc, TestId test,
                                               const std::vector<double>& eps_grid,
                                               const RunOptions& opts) {
  sc.validate();
  opts.validate();
  const auto valid = tests_for(sc.setup);
  if (std::find(valid.begin(), valid.end(), test) == valid.end()) {
    throw ConfigError("test '" + std::string(test_name(test)) + "' does not apply to scenario '" +
                      std::string(sc.name()) + "'");
  }
  std::vector<PowerEstimate> out;
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    GrossErrorSpec{0.0, 1.0, 2.0, eps_grid[e]}.validate();
    const std::vector<char> reject = simulate_rejections(sc, test, eps_grid[e], e, opts);
    const auto hits = std::count(reject.begin(), reject.end(), char{1});
    PowerEstimate est;
    est.rejection_rate = static_cast<double>(hits) / static_cast<double>(opts.reps);
    std::tie(est.ci_low, est.ci_high) = normal_interval(est.rejection_rate, opts.reps);
    est.repetitions = opts.reps;
    est.alpha = opts.alpha;
    est.epsilon = eps_grid[e];
    est.test_name = std::string(test_name(test));
    est.seed = opts.seed;
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace lqrt::gem
