#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ipp/grid.hpp"
#include "ipp/stats.hpp"
#include "oracles.hpp"

using namespace ipp;

TEST(Stats, MeanAndStddev) {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(xs), 5.0);
  EXPECT_NEAR(stddev(xs), std::sqrt(32.0 / 7.0), 1e-15);
  EXPECT_EQ(stddev(std::vector<double>{3.0}), 0.0);
}

TEST(TTest, IdenticalSamples) {
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4};
  const auto r = two_sample_t_test(a, a);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.df, 6);
  EXPECT_NEAR(r.p, 1.0, 1e-15);
}

TEST(TTest, TabulatedValue) {
  // Two-tailed p for t = 2.976 at 18 degrees of freedom (~0.0080).
  EXPECT_NEAR(student_t_two_tailed_p(2.976, 18), 0.0080, 1e-4);
  EXPECT_NEAR(student_t_two_tailed_p(2.976, 18), oracle::t_two_tailed_p(2.976, 18), 1e-10);
  EXPECT_EQ(student_t_two_tailed_p(-2.976, 18), student_t_two_tailed_p(2.976, 18));
}

TEST(TTest, MatchesQuadratureOracleOnGrid) {
  for (int df : {1, 2, 3, 5, 10, 18, 30, 100, 238}) {
    for (double t : {0.0, 0.1, 0.5, 1.0, 1.96, 2.5, 3.0, 5.0, 8.0}) {
      EXPECT_NEAR(student_t_two_tailed_p(t, df), oracle::t_two_tailed_p(t, df), 1e-9) << "t=" << t << " df=" << df;
    }
  }
}

TEST(TTest, PooledStatisticFromSummaries) {
  // Two samples of ten with means 5 and 3 and equal spread.
  const std::vector<double> a{3, 4, 4, 5, 5, 5, 5, 6, 6, 7};
  const std::vector<double> b{1, 2, 2, 3, 3, 3, 3, 4, 4, 5};
  const auto r = two_sample_t_test(a, b);
  const double va = stddev(a) * stddev(a), vb = stddev(b) * stddev(b);
  const double sp = std::sqrt((9 * va + 9 * vb) / 18.0);
  EXPECT_EQ(r.df, 18);
  EXPECT_NEAR(r.t, 2.0 / (sp * std::sqrt(0.2)), 1e-12);
  EXPECT_GT(r.t, 3.0);
  EXPECT_LT(r.p, 0.01);
  EXPECT_FALSE(r.degenerate);
  const auto back = two_sample_t_test(b, a);
  EXPECT_NEAR(back.t, -r.t, 1e-15);
  EXPECT_NEAR(back.p, r.p, 1e-15);
}

TEST(TTest, Degenerate) {
  const std::vector<double> a{1, 1, 1}, b{2, 2, 2};
  const auto r = two_sample_t_test(a, b);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.p, 0.0);
  EXPECT_TRUE(std::isinf(r.t));
  EXPECT_EQ(two_sample_t_test(a, a).p, 1.0);
  EXPECT_THROW(two_sample_t_test(std::vector<double>{1}, a), Error);
  EXPECT_THROW(student_t_two_tailed_p(1.0, 0), Error);
}

TEST(TTest, PValueMonotoneInT) {
  double prev = 1.0;
  for (double t = 0.0; t < 10.0; t += 0.25) {
    const double p = student_t_two_tailed_p(t, 12);
    EXPECT_LE(p, prev);
    EXPECT_GE(p, 0.0);
    prev = p;
  }
}

TEST(TTest, FromSummaryStatistics) {
  const auto r = pooled_t_test(0.415, 0.014, 10, 0.400, 0.006, 10);
  EXPECT_EQ(r.df, 18);
  EXPECT_NEAR(r.t, 0.015 / std::sqrt((0.014 * 0.014 + 0.006 * 0.006) / 2.0 * 0.2), 1e-12);
  EXPECT_GT(r.t, 2.8);
  EXPECT_LT(r.t, 3.3);
}
