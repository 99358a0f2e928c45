// Copyright 2026 The modalnode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "modalnode/neural.hpp"
#include "support/oracles.hpp"

namespace modalnode {
namespace {

Vector random_vector(std::size_t n, double scale, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

MlpNetwork random_net(std::size_t m, std::size_t h, std::size_t w, std::uint64_t seed) {
  auto net = mlp_init(m, h, w, 0.01, seed);
  std::mt19937_64 gen(seed + 1);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (std::size_t l = 0; l < net.layers(); ++l)
    for (double& b : net.bias(l)) b = u(gen);
  return net;
}

TEST(MlpInit, ParameterCountAndDeterminism) {
  const auto a = mlp_init(100, 5, 100, 0.01, 3);
  EXPECT_EQ(a.parameter_count(), 60600u);
  const auto b = mlp_init(100, 5, 100, 0.01, 3);
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  const auto c = mlp_init(100, 5, 100, 0.01, 4);
  EXPECT_FALSE(std::equal(a.params().begin(), a.params().end(), c.params().begin()));
  for (std::size_t l = 0; l < a.layers(); ++l)
    for (double v : a.bias(l)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(mlp_init(4, 0, 8, 0.01, 0), InvalidArgument);
  EXPECT_THROW(mlp_init(4, 2, 0, 0.01, 0), InvalidArgument);
}

TEST(MlpInit, KaimingVariance) {
  for (double alpha : {0.01, 0.2}) {
    const auto net = mlp_init(100, 5, 100, alpha, 17);
    for (std::size_t l = 0; l < net.layers(); ++l) {
      const auto w = net.weight(l);
      double mean = 0.0, sq = 0.0;
      for (double v : w) mean += v;
      mean /= w.size();
      for (double v : w) sq += (v - mean) * (v - mean);
      const double var = sq / (w.size() - 1);
      const double target = 2.0 / ((1 + alpha * alpha) * net.dims()[l]);
      EXPECT_NEAR(var / target, 1.0, 0.2) << l;
    }
  }
}

TEST(MlpForward, ZeroNetworkAndAffineCase) {
  MlpNetwork zero(mlp_dims(3, 2, 5), 0.01);
  MlpTape tape;
  for (double v : mlp_forward(zero, Vector{1, -2, 3}, tape)) EXPECT_EQ(v, 0.0);

  // One hidden layer with alpha = 1 collapses to W2 (W1 q + b1) + b2.
  MlpNetwork affine(std::vector<std::size_t>{2, 2, 2}, 1.0);
  const double w1[4] = {1, 0, 0, 1}, b1[2] = {0.5, -0.5};
  const double w2[4] = {2, 1, -1, 3}, b2[2] = {0.25, 0};
  std::copy(w1, w1 + 4, affine.weight(0).begin());
  std::copy(b1, b1 + 2, affine.bias(0).begin());
  std::copy(w2, w2 + 4, affine.weight(1).begin());
  std::copy(b2, b2 + 2, affine.bias(1).begin());
  const Vector q{-3.0, 1.5};
  const double h0 = q[0] + 0.5, h1 = q[1] - 0.5;
  const auto out = mlp_forward(affine, q, tape);
  EXPECT_DOUBLE_EQ(out[0], 2 * h0 + h1 + 0.25);
  EXPECT_DOUBLE_EQ(out[1], -h0 + 3 * h1);
}

TEST(MlpForward, MatchesNaiveImplementation) {
  std::mt19937_64 gen(5);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto net = random_net(1 + s % 6, 1 + s % 3, 4 + s, s);
    const auto q = random_vector(net.inputs(), 1.0, gen);
    MlpTape tape;
    const auto f = mlp_forward(net, q, tape);
    const auto g = oracle::mlp_forward_naive(net, q);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], g[i], 1e-12);
    Vector e(net.outputs());
    net.evaluate(q, e);
    EXPECT_EQ(e, f);
  }
  MlpTape tape;
  EXPECT_THROW(mlp_forward(random_net(3, 1, 4, 0), Vector(2), tape), InvalidArgument);
}

TEST(MlpBackward, ZeroUpstreamAndAffineChain) {
  const auto net = random_net(3, 2, 6, 8);
  MlpTape tape;
  mlp_forward(net, Vector{0.1, 0.2, 0.3}, tape);
  const auto g = mlp_backward(net, tape, Vector(3, 0.0));
  for (double v : g.params) EXPECT_EQ(v, 0.0);
  for (double v : g.input) EXPECT_EQ(v, 0.0);

  auto lin = random_net(2, 1, 3, 9);
  MlpNetwork affine(std::vector<std::size_t>{2, 3, 2}, 1.0);
  std::copy(lin.params().begin(), lin.params().end(), affine.params().begin());
  mlp_forward(affine, Vector{0.4, -0.7}, tape);
  const Vector go{1.5, -2.0};
  const auto ga = mlp_backward(affine, tape, go);
  // grad_input = W1^T W2^T go
  const auto w1 = affine.weight(0), w2 = affine.weight(1);
  Vector mid(3, 0.0);
  for (std::size_t h = 0; h < 3; ++h) mid[h] = w2[0 * 3 + h] * go[0] + w2[1 * 3 + h] * go[1];
  for (std::size_t i = 0; i < 2; ++i) {
    double expect = 0.0;
    for (std::size_t h = 0; h < 3; ++h) expect += w1[h * 2 + i] * mid[h];
    EXPECT_NEAR(ga.input[i], expect, 1e-14);
  }
}

TEST(MlpBackward, FiniteDifferencesRandomNets) {
  std::mt19937_64 gen(2024);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + gen() % 8, h = 1 + gen() % 3, w = 2 + gen() % 15;
    auto net = random_net(m, h, w, 100 + trial);
    auto q = random_vector(m, 1.0, gen);
    const auto go = random_vector(m, 1.0, gen);
    MlpTape tape;
    mlp_forward(net, q, tape);
    const auto g = mlp_backward(net, tape, go);
    const auto fd = oracle::mlp_fd_gradient(net, q, go);
    for (std::size_t i = 0; i < g.params.size(); ++i) {
      EXPECT_LT(oracle::rel_err(g.params[i], fd.params[i], 1e-300), 1e-6)
          << trial << " p" << i << " g=" << g.params[i] << " fd=" << fd.params[i];
    }
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_LT(oracle::rel_err(g.input[i], fd.input[i], 1e-300), 1e-6) << trial << " q" << i;
    }
  }
}

TEST(Activation, ContinuityAndSubgradient) {
  const MlpNetwork net(std::vector<std::size_t>{1, 1}, 0.1);
  EXPECT_EQ(net.activate(0.0), 0.0);
  EXPECT_NEAR(net.activate(-1e-300), 0.0, 1e-300);
  EXPECT_EQ(net.activation_slope(0.0), 1.0);
  EXPECT_EQ(net.activation_slope(-1e-9), 0.1);
}

TEST(Adam, ZeroGradientAndErrors) {
  AdamState s(3);
  Vector p{1, 2, 3};
  adam_step(s, p, Vector(3, 0.0));
  EXPECT_EQ(p, (Vector{1, 2, 3}));
  EXPECT_EQ(s.step, 1u);
  EXPECT_THROW(adam_step(s, p, Vector{0, NAN, 0}), InvalidArgument);
  EXPECT_THROW(adam_step(s, p, Vector(2)), InvalidArgument);
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  AdamState s(2);
  Vector p{0, 0};
  Vector prev = p;
  for (int t = 0; t < 5000; ++t) {
    prev = p;
    adam_step(s, p, Vector{0.3, 3.0});
  }
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(std::abs(p[i] - prev[i]), 1e-3, 1e-6);
  }
  // scale invariance: both coordinates moved the same total amount
  EXPECT_NEAR(p[0], p[1], 1e-6 * std::abs(p[1]));
}

TEST(OpCount, Conventions) {
  EXPECT_EQ(count_mlp_ops(mlp_dims(100, 5, 100)), 121000u);
  EXPECT_EQ(count_mlp_ops(std::vector<std::size_t>{1, 1}), 2u);
  // M=2, H=1, W=3 by hand:
  //   layer 1: 6 multiplies + 3 accumulating adds + 3 bias adds = 12
  //   3 Leaky ReLU units at 2 ops each = 6
  //   layer 2: 6 multiplies + 4 accumulating adds + 2 bias adds = 12
  EXPECT_EQ(count_mlp_ops(mlp_dims(2, 1, 3)), 30u);
}

TEST(ModelFile, RoundTripAndValidation) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto net = random_net(4, 2, 7, 12);
  save_model(net, dir / "modalnode_model_rt.bin");
  const auto back = load_model(dir / "modalnode_model_rt.bin");
  EXPECT_TRUE(std::equal(back.dims().begin(), back.dims().end(), net.dims().begin()));
  EXPECT_EQ(back.alpha(), net.alpha());
  EXPECT_TRUE(std::equal(back.params().begin(), back.params().end(), net.params().begin()));
  std::filesystem::resize_file(dir / "modalnode_model_rt.bin",
                               std::filesystem::file_size(dir / "modalnode_model_rt.bin") - 8);
  EXPECT_THROW(load_model(dir / "modalnode_model_rt.bin"), FormatError);

  AdamState s(net.parameter_count());
  Vector p(net.params().begin(), net.params().end());
  adam_step(s, p, Vector(p.size(), 0.5));
  save_adam(s, dir / "modalnode_adam_rt.bin", {{"epoch", 3}});
  nlohmann::json extra;
  const auto s2 = load_adam(dir / "modalnode_adam_rt.bin", &extra);
  EXPECT_EQ(s2.step, 1u);
  EXPECT_EQ(s2.m, s.m);
  EXPECT_EQ(s2.v, s.v);
  EXPECT_EQ(extra.at("epoch"), 3);
  std::filesystem::remove(dir / "modalnode_model_rt.bin");
  std::filesystem::remove(dir / "modalnode_adam_rt.bin");
}

}  // namespace
}  // namespace modalnode
