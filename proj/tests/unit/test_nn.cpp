#include <gtest/gtest.h>

#include <cmath>

#include "ipp/nn.hpp"
#include "oracles.hpp"

using namespace ipp;
using namespace ipp::nn;

namespace {

QNetArch tiny_arch() {
  QNetArch a;
  a.input_size = 8;
  a.conv_channels = {2, 2, 2, 2};
  a.hidden_units = 6;
  a.num_actions = 2;
  return a;
}

std::vector<double> random_input(const QNetArch& a, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(a.in_channels * a.input_size * a.input_size));
  for (double& v : x) v = u(rng);
  return x;
}

// Random biases too, so no unit sits exactly at the LeakyReLU kink.
QNetworkParams random_params(const QNetArch& a, std::uint64_t seed) {
  auto p = QNetworkParams::initialize(a, seed);
  Rng rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& g : p.groups())
    if (g.name.find("bias") != std::string::npos)
      for (double& v : g.values) v = u(rng);
  return p;
}

}  // namespace

TEST(LeakyRelu, Examples) {
  EXPECT_EQ(leaky_relu(5.0), 5.0);
  EXPECT_DOUBLE_EQ(leaky_relu(-1.0, 0.01), -0.01);
  EXPECT_EQ(leaky_relu(0.0), 0.0);
}

TEST(Arch, PaperFlattenIs1024) {
  const auto a = QNetArch::paper(2);
  EXPECT_EQ(a.final_side(), 2);
  EXPECT_EQ(a.flatten_size(), 1024);
  EXPECT_EQ(a.head_input_size(), 1032);
  const QNetworkParams p(a);
  EXPECT_EQ(p.hidden.in, 1032);
  EXPECT_EQ(p.hidden.out, 1024);
  EXPECT_EQ(p.output.in, 1024);
  EXPECT_EQ(p.output.out, 2);
  EXPECT_EQ(p.scalar.in, 1);
  EXPECT_EQ(p.scalar.out, 8);
}

TEST(Arch, DeskFlattenIsLastChannels) {
  const auto a = QNetArch::desk(3);
  EXPECT_EQ(a.flatten_size(), 32);
  EXPECT_EQ(QNetworkParams(a).output.out, 3);
}

TEST(Arch, FingerprintTracksLayout) {
  EXPECT_EQ(QNetArch::paper(2).fingerprint(), QNetArch::paper(2).fingerprint());
  EXPECT_NE(QNetArch::paper(2).fingerprint(), QNetArch::paper(3).fingerprint());
  EXPECT_NE(QNetArch::paper(2).fingerprint(), QNetArch::desk(2, 32).fingerprint());
}

TEST(Forward, ZeroInputZeroBiasGivesZero) {
  const auto a = QNetArch::desk(2);
  auto p = QNetworkParams::initialize(a, 3);
  const std::vector<double> x(static_cast<std::size_t>(3 * 16 * 16), 0.0);
  for (double q : forward(p, x, 0.0)) EXPECT_EQ(q, 0.0);
}

TEST(Forward, MatchesNaiveLoops) {
  for (const auto& a : {tiny_arch(), QNetArch::desk(3)}) {
    const auto p = random_params(a, 42);
    const auto x = random_input(a, 7);
    const auto got = forward(p, x, 0.6);
    const auto ref = oracle::naive_forward(p, x, 0.6);
    ASSERT_EQ(got.size(), ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], ref[i], 1e-12);
  }
}

TEST(Forward, RejectsWrongInputSize) {
  const auto p = QNetworkParams::initialize(QNetArch::desk(2), 1);
  EXPECT_THROW(forward(p, std::vector<double>(10, 0.0), 0.5), Error);
}

TEST(Forward, DoesNotMutateParams) {
  const auto a = tiny_arch();
  const auto p = random_params(a, 5);
  const auto before = params_to_json(p).dump();
  ForwardCache cache;
  forward(p, random_input(a, 1), 0.3, &cache);
  EXPECT_EQ(params_to_json(p).dump(), before);
}

TEST(Backward, FiniteDifferenceCheckAllGroups) {
  const auto a = tiny_arch();
  auto p = random_params(a, 11);
  const auto x = random_input(a, 12);
  const double tn = 0.4;
  const std::vector<double> upstream{0.7, -1.3};
  auto loss = [&](const QNetworkParams& q) {
    const auto out = forward(q, x, tn);
    return upstream[0] * out[0] + upstream[1] * out[1];
  };
  ForwardCache cache;
  forward(p, x, tn, &cache);
  Gradients g(a);
  backward(p, cache, upstream, g);

  const double h = 1e-5;
  auto pg = p.groups();
  auto gg = g.groups();
  for (std::size_t k = 0; k < pg.size(); ++k) {
    double max_rel = 0.0;
    for (std::size_t i = 0; i < pg[k].values.size(); ++i) {
      const double orig = pg[k].values[i];
      pg[k].values[i] = orig + h;
      const double up = loss(p);
      pg[k].values[i] = orig - h;
      const double down = loss(p);
      pg[k].values[i] = orig;
      const double fd = (up - down) / (2 * h);
      const double an = gg[k].values[i];
      max_rel = std::max(max_rel, std::fabs(fd - an) / std::max(1e-6, std::fabs(fd) + std::fabs(an)));
    }
    EXPECT_LT(max_rel, 1e-4) << pg[k].name;
  }
}

TEST(Backward, ZeroUpstreamZeroGrads) {
  const auto a = tiny_arch();
  const auto p = random_params(a, 2);
  ForwardCache cache;
  forward(p, random_input(a, 3), 0.5, &cache);
  Gradients g(a);
  backward(p, cache, std::vector<double>{0.0, 0.0}, g);
  for (const auto& grp : std::as_const(g).groups())
    for (double v : grp) EXPECT_EQ(v, 0.0);
}

TEST(Backward, OutputLayerClosedForm) {
  // dQ_k/dW_out[k][j] = hidden_out[j], dQ_k/db_out[k] = 1.
  const auto a = tiny_arch();
  const auto p = random_params(a, 9);
  ForwardCache cache;
  forward(p, random_input(a, 10), 0.9, &cache);
  Gradients g(a);
  backward(p, cache, std::vector<double>{1.0, 0.0}, g);
  for (int j = 0; j < a.hidden_units; ++j) {
    EXPECT_DOUBLE_EQ(g.output.weight[j], cache.hidden_out[j]);
    EXPECT_EQ(g.output.weight[a.hidden_units + j], 0.0);
  }
  EXPECT_EQ(g.output.bias[0], 1.0);
  EXPECT_EQ(g.output.bias[1], 0.0);
}

TEST(Init, DeterministicHeUniform) {
  const auto a = QNetArch::desk(2);
  const auto p = QNetworkParams::initialize(a, 5);
  EXPECT_EQ(params_to_json(p).dump(), params_to_json(QNetworkParams::initialize(a, 5)).dump());
  const double bound = std::sqrt(6.0 / (3 * 9));
  for (double w : p.conv[0].weight) EXPECT_LE(std::fabs(w), bound);
  for (double b : p.conv[0].bias) EXPECT_EQ(b, 0.0);
}

TEST(AdamTest, ZeroGradientsLeaveParams) {
  const auto a = tiny_arch();
  auto p = random_params(a, 1);
  const auto before = params_to_json(p).dump();
  Adam opt(p, {0.1});
  Gradients g(a);
  opt.step(p, g);
  EXPECT_EQ(params_to_json(p).dump(), before);
}

TEST(AdamTest, FirstStepIsLearningRate) {
  const auto a = tiny_arch();
  auto p = random_params(a, 1);
  const double w0 = p.output.bias[0];
  Adam opt(p, {0.1});
  Gradients g(a);
  g.output.bias[0] = 1.0;
  opt.step(p, g);
  EXPECT_NEAR(p.output.bias[0] - w0, -0.1, 1e-7);
}

TEST(AdamTest, QuadraticLossDecreases) {
  const auto a = tiny_arch();
  auto p = random_params(a, 1);
  p.output.bias[0] = 3.0;
  Adam opt(p, {0.05});
  double prev = INFINITY;
  for (int it = 0; it < 40; ++it) {
    const double w = p.output.bias[0];
    const double loss = w * w;
    if (it > 2) EXPECT_LT(loss, prev);
    prev = loss;
    Gradients g(a);
    g.output.bias[0] = 2 * w;
    opt.step(p, g);
  }
}

TEST(AdamTest, NonFiniteGradientSkipped) {
  const auto a = tiny_arch();
  auto p = random_params(a, 1);
  const auto before = params_to_json(p).dump();
  Adam opt(p);
  Gradients g(a);
  g.hidden.weight[3] = NAN;
  EXPECT_FALSE(opt.step(p, g));
  EXPECT_EQ(opt.skipped(), 1);
  EXPECT_EQ(params_to_json(p).dump(), before);
}

TEST(ParamsJson, RoundTripAndFingerprintCheck) {
  const auto a = tiny_arch();
  const auto p = random_params(a, 4);
  auto j = params_to_json(p);
  const auto back = params_from_json(j);
  EXPECT_EQ(back.hidden.weight, p.hidden.weight);
  EXPECT_EQ(back.conv[2].weight, p.conv[2].weight);
  j["fingerprint"] = "0000000000000000";
  EXPECT_THROW(params_from_json(j), Error);
}
