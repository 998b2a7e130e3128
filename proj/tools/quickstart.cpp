// Runs the three tests on simulated data and prints the outcomes.

#include <cmath>
#include <cstdio>
#include <vector>

#include "lqrt/lqrt.hpp"

int main() {
  using namespace lqrt;

  rng::Engine stream = rng::substream(314);
  const std::vector<double> clean = gem::sample_gem({0.0, 1.0, 50.0, 0.0}, 50, stream);
  // 45 inliers around 0.32 plus 5 wide outliers.
  std::vector<double> contaminated = gem::sample_gem({0.32, 1.0, 50.0, 0.0}, 45, stream);
  for (int i = 0; i < 5; ++i) contaminated.push_back(0.32 + std::sqrt(50.0) * rng::standard_normal(stream));

  TestOptions opts;
  opts.seed = 314;

  auto show = [](const char* label, const TestOutcome& r) {
    std::printf("%-34s statistic=%-12.6g pvalue=%-6.3g q=%.2f\n", label, r.statistic, r.pvalue,
                r.q_used.value());
  };

  show("one-sample, clean, mu0 = 0", lqrtest_1samp(clean, 0.0, opts));
  show("one-sample, clean, mu0 = 1", lqrtest_1samp(clean, 1.0, opts));
  for (double q : {0.9, 0.6}) {
    TestOptions fixed = opts;
    fixed.q = q;
    std::printf("q fixed at %.1f: ", q);
    show("contaminated, mu0 = 0", lqrtest_1samp(contaminated, 0.0, fixed));
  }
  show("one-sample, contaminated, mu0 = 0", lqrtest_1samp(contaminated, 0.0, opts));

  const std::vector<double> other = gem::sample_gem({0.0, 1.0, 50.0, 0.0}, 50, stream);
  const std::vector<double> shifted = gem::sample_gem({1.0, 1.0, 50.0, 0.0}, 70, stream);
  show("paired, equal means", lqrtest_rel(clean, other, opts));
  show("unpaired, shifted, pooled", lqrtest_ind(clean, shifted, true, opts));
  show("unpaired, shifted, separate", lqrtest_ind(clean, shifted, false, opts));
  return 0;
}
