#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lqrt/baselines.hpp"
#include "oracles.hpp"
#include "sampling.hpp"

namespace cl = lqrt::classical;

namespace {

std::vector<double> negated(std::vector<double> x) {
  for (double& v : x) v = -v;
  return x;
}

TEST(TTest1Samp, Examples) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto centered = cl::ttest_1samp(x, 3.0);
  EXPECT_EQ(centered.statistic, 0.0);
  EXPECT_EQ(centered.pvalue, 1.0);
  EXPECT_EQ(centered.method, cl::Method::t_1samp);

  const auto r = cl::ttest_1samp(x, 2.0);
  EXPECT_NEAR(r.statistic, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(r.pvalue, oracle::t_pvalue_ibeta(std::sqrt(2.0), 4.0), 1e-12);
  EXPECT_NEAR(r.pvalue, 0.230200, 1e-6);
}

TEST(TTest1Samp, ReflectionInvariance) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 50; ++i) {
    const auto x = testdata::normal(gen, 12, 0.4);
    const auto a = cl::ttest_1samp(x, 0.1 * i);
    const auto b = cl::ttest_1samp(negated(x), -0.1 * i);
    EXPECT_NEAR(a.pvalue, b.pvalue, 1e-14);
    EXPECT_NEAR(a.statistic, -b.statistic, 1e-12);
  }
}

TEST(TTest1Samp, ZeroVarianceConvention) {
  const std::vector<double> x{4, 4, 4};
  EXPECT_EQ(cl::ttest_1samp(x, 4.0).pvalue, 1.0);
  const auto r = cl::ttest_1samp(x, 3.0);
  EXPECT_EQ(r.pvalue, 0.0);
  EXPECT_EQ(r.statistic, INFINITY);
  EXPECT_THROW(cl::ttest_1samp(std::vector<double>{1.0}, 0.0), lqrt::DomainError);
}

TEST(TTestRel, Examples) {
  const std::vector<double> x{1, 2, 3, 4, 5}, zero(5, 0.0);
  const auto same = cl::ttest_rel(x, x);
  EXPECT_EQ(same.pvalue, 1.0);
  EXPECT_EQ(same.method, cl::Method::t_rel);

  const auto r = cl::ttest_rel(x, zero);
  const double t = 3.0 / std::sqrt(2.5 / 5.0);
  EXPECT_NEAR(r.statistic, t, 1e-13);
  EXPECT_NEAR(r.pvalue, oracle::t_pvalue_ibeta(t, 4.0), 1e-12);

  const auto swapped = cl::ttest_rel(zero, x);
  EXPECT_NEAR(swapped.statistic, -r.statistic, 1e-13);
  EXPECT_DOUBLE_EQ(swapped.pvalue, r.pvalue);

  EXPECT_THROW(cl::ttest_rel(x, std::vector<double>{1, 2}), lqrt::DomainError);
}

TEST(TTestInd, Examples) {
  const std::vector<double> x{0, 2}, y{10, 12};
  const auto same = cl::ttest_ind(x, x);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.pvalue, 1.0);

  // Unbiased pooled variance s_p^2 = 2.
  const auto pooled = cl::ttest_ind(x, y, true);
  const double t = -10.0 / std::sqrt(2.0 * (0.5 + 0.5));
  EXPECT_NEAR(pooled.statistic, t, 1e-13);
  EXPECT_NEAR(pooled.pvalue, oracle::t_pvalue_ibeta(t, 2.0), 1e-12);
  EXPECT_EQ(pooled.method, cl::Method::t_ind_pooled);

  const auto welch = cl::ttest_ind(x, y, false);
  EXPECT_NEAR(welch.pvalue, pooled.pvalue, 1e-14);
  EXPECT_EQ(welch.method, cl::Method::t_ind_welch);
}

TEST(TTestInd, WelchMatchesOracle) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 50; ++i) {
    const auto x = testdata::normal(gen, 8 + i % 5, 0.0, 1.0);
    const auto y = testdata::normal(gen, 15 + i % 7, 0.5, 3.0);
    auto moments = [](const std::vector<double>& s) {
      double m = 0.0;
      for (double v : s) m += v;
      m /= static_cast<double>(s.size());
      double ss = 0.0;
      for (double v : s) ss += (v - m) * (v - m);
      return std::pair{m, ss / static_cast<double>(s.size() - 1)};
    };
    const auto [mx, vx] = moments(x);
    const auto [my, vy] = moments(y);
    const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
    const double se2 = vx / n + vy / m;
    const double df = se2 * se2 / ((vx / n) * (vx / n) / (n - 1) + (vy / m) * (vy / m) / (m - 1));
    const double t = (mx - my) / std::sqrt(se2);
    const auto r = cl::ttest_ind(x, y, false);
    EXPECT_NEAR(r.statistic, t, 1e-12);
    EXPECT_NEAR(r.pvalue, oracle::t_pvalue_quadrature(t, df), 1e-8);

    const double sp2 = ((n - 1) * vx + (m - 1) * vy) / (n + m - 2);
    const double tp = (mx - my) / std::sqrt(sp2 * (1 / n + 1 / m));
    EXPECT_NEAR(cl::ttest_ind(x, y, true).pvalue, oracle::t_pvalue_ibeta(tp, n + m - 2), 1e-10);
  }
}

TEST(TTestInd, ZeroVarianceConvention) {
  const std::vector<double> a{1, 1, 1}, b{2, 2};
  EXPECT_EQ(cl::ttest_ind(a, a).pvalue, 1.0);
  EXPECT_EQ(cl::ttest_ind(a, b).pvalue, 0.0);
  EXPECT_THROW(cl::ttest_ind(a, std::vector<double>{1.0}), lqrt::DomainError);
}

TEST(SignedRank, Examples) {
  const auto sym = cl::wilcoxon_signed_rank(std::vector<double>{-2, -1, 1, 2});
  EXPECT_EQ(sym.statistic, 5.0);  // mid-ranks 1.5, 1.5, 3.5, 3.5
  EXPECT_EQ(sym.pvalue, 1.0);

  const std::vector<double> pos{1, 2, 3, 4, 5};
  const auto r = cl::wilcoxon_signed_rank(pos);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.pvalue, 0.0625);
  EXPECT_DOUBLE_EQ(cl::wilcoxon_signed_rank(negated(pos)).pvalue, 0.0625);

  EXPECT_EQ(cl::wilcoxon_signed_rank(std::vector<double>{0, 0, 0}).pvalue, 1.0);
}

TEST(SignedRank, PairedForm) {
  const std::vector<double> x{3.1, 2.0, 5.5, 4.2, 1.0, 7.7}, y{2.0, 2.5, 3.0, 4.2, 0.1, 6.0};
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - y[i];
  const auto paired = cl::wilcoxon_signed_rank(x, lqrt::Sample(y));
  const auto direct = cl::wilcoxon_signed_rank(d);
  EXPECT_EQ(paired.statistic, direct.statistic);
  EXPECT_EQ(paired.pvalue, direct.pvalue);
  EXPECT_THROW(cl::wilcoxon_signed_rank(x, lqrt::Sample(d.data(), 3)), lqrt::DomainError);
}

TEST(SignedRank, ExactMatchesEnumeration) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> coarse(-6, 6);
  for (int n = 1; n <= 12; ++n) {
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> d;
      // Half of the draws are integer-valued to force ties and zeros.
      if (rep % 2 == 0) {
        for (int i = 0; i < n; ++i) d.push_back(coarse(gen));
      } else {
        d = testdata::normal(gen, static_cast<std::size_t>(n), 0.3);
      }
      std::vector<double> nz;
      for (double v : d) {
        if (v != 0.0) nz.push_back(v);
      }
      const auto r = cl::wilcoxon_signed_rank(d);
      if (nz.empty()) {
        EXPECT_EQ(r.pvalue, 1.0);
        continue;
      }
      const auto ranks = oracle::midranks_of_abs(nz);
      double plus = 0, minus = 0;
      for (std::size_t i = 0; i < nz.size(); ++i) (nz[i] > 0 ? plus : minus) += ranks[i];
      EXPECT_DOUBLE_EQ(r.statistic, std::min(plus, minus));
      EXPECT_NEAR(r.pvalue, oracle::signed_rank_enumeration(ranks, std::min(plus, minus)), 1e-14);
    }
  }
}

TEST(SignedRank, NormalApproximationAboveCutoff) {
  std::mt19937_64 gen(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = testdata::normal(gen, 40, 0.2 * (rep % 4));
    const auto ranks = oracle::midranks_of_abs(d);
    double plus = 0, minus = 0;
    for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? plus : minus) += ranks[i];
    const double w = std::min(plus, minus);
    const double n = 40.0;
    const double z = (std::abs(w - n * (n + 1) / 4) - 0.5) / std::sqrt(n * (n + 1) * (2 * n + 1) / 24);
    const double p = std::erfc(z / std::sqrt(2.0));
    EXPECT_NEAR(cl::wilcoxon_signed_rank(d).pvalue, std::min(1.0, p), 1e-12);
  }
}

TEST(RankSum, Examples) {
  const auto r = cl::rank_sum(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
  EXPECT_NEAR(r.statistic, -4.5 / std::sqrt(5.25), 1e-14);
  EXPECT_NEAR(r.statistic, -1.9640, 1e-4);
  EXPECT_NEAR(r.pvalue, 0.0495, 1e-4);
  EXPECT_EQ(r.method, cl::Method::rank_sum);

  const auto tied = cl::rank_sum(std::vector<double>{1, 2}, std::vector<double>{1, 2});
  EXPECT_EQ(tied.statistic, 0.0);
  EXPECT_EQ(tied.pvalue, 1.0);
}

TEST(RankSum, SwapInvariance) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 30; ++i) {
    const auto x = testdata::normal(gen, 7 + i % 4);
    const auto y = testdata::normal(gen, 9 + i % 3, 0.5);
    const auto a = cl::rank_sum(x, y);
    const auto b = cl::rank_sum(y, x);
    EXPECT_NEAR(a.pvalue, b.pvalue, 1e-14);
    EXPECT_NEAR(a.statistic, -b.statistic, 1e-12);
  }
  EXPECT_THROW(cl::rank_sum(std::vector<double>{}, std::vector<double>{1.0}), lqrt::DomainError);
}

TEST(SignTest, Examples) {
  const std::vector<double> balanced{-5, -4, -3, -2, -1, 1, 2, 3, 4, 5};
  EXPECT_EQ(cl::sign_test(balanced, 0.0).pvalue, 1.0);

  const std::vector<double> eight{1, 2, 3, 4, 5, 6, 7, 8, -1, -2};
  const auto r = cl::sign_test(eight, 0.0);
  EXPECT_EQ(r.pvalue, 112.0 / 1024.0);
  EXPECT_EQ(r.statistic, 3.0);

  std::vector<double> around(eight), reflected(eight);
  for (double& v : around) v += 0.5;
  for (std::size_t i = 0; i < around.size(); ++i) reflected[i] = 1.0 - around[i];
  EXPECT_EQ(cl::sign_test(around, 0.5).pvalue, cl::sign_test(reflected, 0.5).pvalue);

  EXPECT_EQ(cl::sign_test(std::vector<double>{2, 2}, 2.0).pvalue, 1.0);
}

TEST(SignTest, MatchesExactSums) {
  std::mt19937_64 gen(13);
  for (int n = 1; n <= 30; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto x = testdata::normal(gen, static_cast<std::size_t>(n), 0.1 * rep);
      int above = 0;
      for (double v : x) above += v > 0.0;
      const long double upper = oracle::binomial_upper_exact(n, above);
      const long double lower = oracle::binomial_upper_exact(n, n - above);
      const double expected = static_cast<double>(std::min(1.0L, 2 * std::min(upper, lower)));
      EXPECT_NEAR(cl::sign_test(x, 0.0).pvalue, expected, 1e-15);
    }
  }
}

TEST(Baselines, PValuesInUnitInterval) {
  std::mt19937_64 gen(17);
  for (int i = 0; i < 200; ++i) {
    const auto x = testdata::contaminated(gen, 5 + i % 40, 0.0, 1.0, 0.2, 50.0);
    const auto y = testdata::contaminated(gen, 6 + i % 30, 0.5, 1.0, 0.2, 50.0);
    for (double p : {cl::ttest_1samp(x, 0.0).pvalue, cl::ttest_ind(x, y, true).pvalue,
                     cl::ttest_ind(x, y, false).pvalue, cl::wilcoxon_signed_rank(x).pvalue,
                     cl::rank_sum(x, y).pvalue, cl::sign_test(x, 0.0).pvalue}) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(Baselines, MethodNames) {
  EXPECT_EQ(cl::method_name(cl::Method::t_ind_welch), "t_ind_welch");
  EXPECT_EQ(cl::method_name(cl::Method::sign), "sign");
}

}  // namespace
