#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ipp/kriging.hpp"
#include "oracles.hpp"

using namespace ipp;

namespace {

SampleSet random_samples(Rng& rng, int t, int h, int w) {
  std::uniform_int_distribution<int> r(0, h - 1), c(0, w - 1);
  std::uniform_real_distribution<double> z(0.0, 1.0);
  SampleSet s;
  while (static_cast<int>(s.size()) < t) {
    const Cell cell{r(rng), c(rng)};
    if (!s.contains(cell)) s.add(cell, z(rng));
  }
  return s;
}

VariogramParams random_params(Rng& rng) {
  std::uniform_real_distribution<double> p(0.05, 2.0), r(2.0, 25.0), n(0.0, 0.3);
  return {p(rng), r(rng), n(rng)};
}

}  // namespace

TEST(Spherical, AnalyticValues) {
  const VariogramParams v{1.3, 7.0, 0.2};
  EXPECT_EQ(spherical_gamma(0.0, v), 0.0);
  EXPECT_NEAR(spherical_gamma(7.0, v), 1.5, 1e-15);
  EXPECT_NEAR(spherical_gamma(14.0, v), 1.5, 1e-15);
  EXPECT_NEAR(spherical_gamma(3.5, v), 0.2 + 1.3 * (0.75 - 0.0625), 1e-15);
}

TEST(Spherical, MonotoneInLag) {
  const VariogramParams v{1.0, 10.0, 0.1};
  double prev = 0.0;
  for (double h = 0.0; h < 25.0; h += 0.25) {
    const double g = spherical_gamma(h, v);
    EXPECT_GE(g, prev);
    prev = g;
  }
}

TEST(Empirical, EqualValuesSingleBinZero) {
  SampleSet s;
  s.add({0, 0}, 0.4);
  s.add({3, 4}, 0.4);
  const auto e = empirical_semivariogram(s);
  ASSERT_EQ(e.lag_centers.size(), 1u);
  EXPECT_DOUBLE_EQ(e.lag_centers[0], 5.0);
  EXPECT_EQ(e.semivariances[0], 0.0);
}

TEST(Empirical, TwoValuesHalfSquaredDifference) {
  SampleSet s;
  s.add({0, 0}, 0.0);
  s.add({0, 6}, 2.0);
  const auto e = empirical_semivariogram(s);
  ASSERT_EQ(e.semivariances.size(), 1u);
  EXPECT_DOUBLE_EQ(e.lag_centers[0], 6.0);
  EXPECT_DOUBLE_EQ(e.semivariances[0], 2.0);
}

TEST(Empirical, CollinearHandEnumeration) {
  SampleSet s;
  s.add({0, 0}, 0.0);
  s.add({0, 3}, 1.0);
  s.add({0, 6}, 2.0);
  const auto e = empirical_semivariogram(s);
  ASSERT_EQ(e.lag_centers.size(), 2u);
  EXPECT_DOUBLE_EQ(e.lag_centers[0], 3.0);
  EXPECT_DOUBLE_EQ(e.lag_centers[1], 6.0);
  EXPECT_DOUBLE_EQ(e.semivariances[0], 0.5);
  EXPECT_DOUBLE_EQ(e.semivariances[1], 2.0);
  EXPECT_EQ(e.pair_counts, (std::vector<long>{2, 1}));
}

TEST(Empirical, LagsStrictlyIncreasing) {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto e = empirical_semivariogram(random_samples(rng, 12, 32, 32));
    for (std::size_t i = 1; i < e.lag_centers.size(); ++i) EXPECT_GT(e.lag_centers[i], e.lag_centers[i - 1]);
    EXPECT_EQ(e.lag_centers.size(), e.semivariances.size());
    EXPECT_EQ(e.lag_centers.size(), e.pair_counts.size());
  }
}

TEST(FitSpherical, RecoversForwardGeneratedModel) {
  const VariogramParams truth{1.0, 10.0, 0.1};
  EmpiricalVariogram e;
  for (int i = 1; i <= 8; ++i) {
    const double h = 2.0 * i;
    e.lag_centers.push_back(h);
    e.semivariances.push_back(spherical_gamma(h, truth));
    e.pair_counts.push_back(10 + i);
  }
  const auto f = fit_spherical(e);
  EXPECT_NEAR(f.partial_sill, 1.0, 1e-3);
  EXPECT_NEAR(f.range, 10.0, 1e-3);
  EXPECT_NEAR(f.nugget, 0.1, 1e-3);
}

TEST(FitSpherical, FlatFieldZeroSillAndNugget) {
  EmpiricalVariogram e{{1, 2, 3}, {0, 0, 0}, {3, 2, 1}};
  const auto f = fit_spherical(e);
  EXPECT_EQ(f.partial_sill, 0.0);
  EXPECT_EQ(f.nugget, 0.0);
  EXPECT_GT(f.range, 0.0);
}

TEST(FitSpherical, SingleBinFallback) {
  EmpiricalVariogram e{{4.0}, {0.5}, {1}};
  const auto f = fit_spherical(e);
  EXPECT_EQ(f.partial_sill, 0.5);
  EXPECT_EQ(f.range, 4.0);
  EXPECT_EQ(f.nugget, 0.0);
}

TEST(FitSpherical, ParamsRespectInvariants) {
  Rng rng(8);
  for (int k = 0; k < 30; ++k) {
    const auto f = fit_variogram(random_samples(rng, 3 + k % 10, 16, 16));
    EXPECT_GE(f.partial_sill, 0.0);
    EXPECT_GE(f.nugget, 0.0);
    EXPECT_GT(f.range, 0.0);
  }
}

TEST(OkWeights, SingleSampleWeightOne) {
  SampleSet s;
  s.add({2, 2}, 0.7);
  const auto w = solve_ok_weights(s, {9, 1}, {1.0, 5.0, 0.0});
  ASSERT_EQ(w.weights.size(), 1u);
  EXPECT_NEAR(w.weights[0], 1.0, 1e-12);
  EXPECT_NEAR(predict_point(s, {9, 1}, {1.0, 5.0, 0.0}).mean, 0.7, 1e-12);
}

TEST(OkWeights, SymmetricPairIsHalfHalf) {
  SampleSet s;
  s.add({5, 2}, 0.0);
  s.add({5, 8}, 1.0);
  for (const VariogramParams v : {VariogramParams{1, 4, 0}, VariogramParams{0.3, 20, 0.2}}) {
    const auto w = solve_ok_weights(s, {3, 5}, v);
    EXPECT_NEAR(w.weights[0], 0.5, 1e-12);
    EXPECT_NEAR(w.weights[1], 0.5, 1e-12);
  }
}

TEST(OkWeights, MatchesGaussianEliminationOracle) {
  Rng rng(2024);
  for (int k = 0; k < 60; ++k) {
    const int t = 1 + k % 5;
    const auto s = random_samples(rng, t, 20, 20);
    const auto v = random_params(rng);
    const Cell target{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
    const auto got = solve_ok_weights(s, target, v);
    const auto ref = oracle::ordinary_kriging(s.points(), s.values(), {double(target.row), double(target.col)},
                                              v.partial_sill, v.range, v.nugget);
    for (int i = 0; i < t; ++i) EXPECT_NEAR(got.weights[i], ref.weights[i], 1e-8);
    EXPECT_NEAR(got.lagrange, ref.lagrange, 1e-8);
    EXPECT_NEAR(std::accumulate(got.weights.begin(), got.weights.end(), 0.0), 1.0, 1e-8);
    const auto p = predict_point(s, target, v);
    EXPECT_NEAR(p.mean, ref.mean, 1e-8);
    EXPECT_NEAR(p.raw_kv, ref.kv, 1e-8);
  }
}

TEST(OkWeights, WeightsSumToOneUpToFifteenSamples) {
  Rng rng(77);
  for (int t = 1; t <= 15; ++t) {
    for (int k = 0; k < 5; ++k) {
      const auto s = random_samples(rng, t, 32, 32);
      const auto w = solve_ok_weights(s, {static_cast<int>(rng() % 32), 7}, random_params(rng));
      EXPECT_NEAR(std::accumulate(w.weights.begin(), w.weights.end(), 0.0), 1.0, 1e-8);
    }
  }
}

TEST(Predict, ExactAtSamples) {
  Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    const auto s = random_samples(rng, 2 + k % 12, 16, 16);
    const auto v = random_params(rng);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto p = predict_point(s, s.locations()[i], v);
      EXPECT_NEAR(p.mean, s.values()[i], 1e-8);
      EXPECT_LE(p.kv, 1e-8);
    }
  }
}

TEST(Predict, PermutationInvariant) {
  Rng rng(12);
  for (int k = 0; k < 10; ++k) {
    const auto s = random_samples(rng, 6, 16, 16);
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    SampleSet p;
    for (auto i : idx) p.add(s.locations()[i], s.values()[i]);
    const auto v = random_params(rng);
    const auto a = predict_point(s, {4, 11}, v);
    const auto b = predict_point(p, {4, 11}, v);
    EXPECT_NEAR(a.mean, b.mean, 1e-10);
    EXPECT_NEAR(a.kv, b.kv, 1e-10);
  }
}

TEST(Predict, ScaleCovariantUnderRefit) {
  Rng rng(4);
  const auto s = random_samples(rng, 9, 16, 16);
  SampleSet scaled;
  for (std::size_t i = 0; i < s.size(); ++i) scaled.add(s.locations()[i], 3.0 * s.values()[i]);
  const auto v = fit_variogram(s);
  const auto vs = fit_variogram(scaled);
  EXPECT_NEAR(vs.partial_sill, 9.0 * v.partial_sill, 1e-6 * std::max(1.0, vs.partial_sill));
  EXPECT_NEAR(vs.range, v.range, 1e-6 * v.range);
  const auto a = predict_point(s, {8, 8}, v);
  const auto b = predict_point(scaled, {8, 8}, vs);
  EXPECT_NEAR(b.mean, 3.0 * a.mean, 1e-8);
}

TEST(PredictMap, SingleSampleVarianceGrowsThenPlateaus) {
  SampleSet s;
  s.add({0, 0}, 0.5);
  const VariogramParams v{1.0, 6.0, 0.0};
  const auto m = predict_map(s, 1, 12, v);
  for (int c = 1; c < 12; ++c) {
    EXPECT_NEAR(m.variance(0, c), 2.0 * spherical_gamma(c, v), 1e-10);
    if (c < 6) EXPECT_GT(m.variance(0, c), m.variance(0, c - 1));
    if (c > 6) EXPECT_NEAR(m.variance(0, c), m.variance(0, c - 1), 1e-12);
    EXPECT_NEAR(m.mean(0, c), 0.5, 1e-12);
  }
  EXPECT_NEAR(m.variance(0, 0), 0.0, 1e-12);
}

TEST(PredictMap, FlatSamplesFlatMean) {
  SampleSet s;
  for (int i = 0; i < 5; ++i) s.add({i, 2 * i}, 0.3);
  const auto m = predict_map(s, 10, 10, fit_variogram(s));
  for (double v : m.mean.values()) EXPECT_NEAR(v, 0.3, 1e-10);
}

TEST(PredictMap, ParallelMatchesSerial) {
  Rng rng(6);
  const auto s = random_samples(rng, 8, 20, 20);
  const auto v = random_params(rng);
  const auto a = predict_map(s, 20, 20, v, 1);
  const auto b = predict_map(s, 20, 20, v, 4);
  EXPECT_EQ(a.mean.values(), b.mean.values());
  EXPECT_EQ(a.variance.values(), b.variance.values());
}

TEST(PredictMap, VarianceNonNegative) {
  Rng rng(13);
  for (int k = 0; k < 10; ++k) {
    const auto s = random_samples(rng, 4 + k, 16, 16);
    const auto m = predict_map(s, 16, 16, fit_variogram(s));
    for (double v : m.variance.values()) EXPECT_GE(v, 0.0);
  }
}

TEST(SampleSetTest, DuplicateRejected) {
  SampleSet s;
  s.add({1, 1}, 0.0);
  EXPECT_THROW(s.add({1, 1}, 1.0), Error);
}

TEST(NoisyKv, SmallDeterministicAndCentered) {
  GridField v(32, 32, 0.5);
  Rng a(1), b(1);
  const auto na = noisy_kv(v, a);
  const auto nb = noisy_kv(v, b);
  EXPECT_EQ(na.values(), nb.values());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LT(std::fabs(na.values()[i] - 0.5), 1e-5);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto n = noisy_kv(v, rng);
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m += n.values()[i] - 0.5;
    m /= static_cast<double>(v.size());
    inside += std::fabs(m) <= 3.0 * 1e-6 / 32.0;
  }
  EXPECT_GE(inside, 97);
}
