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
#include <random>

#include "modalnode/dataset.hpp"
#include "modalnode/evaluation.hpp"
#include "modalnode/neural.hpp"

namespace modalnode {
namespace {

Vector random_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  Vector v(n);
  for (double& x : v) x = d(gen);
  return v;
}

TEST(RelMse, ClosedFormCases) {
  const auto w = random_series(500, 1);
  EXPECT_EQ(rel_mse_output(w, w, w.size()), 0.0);
  const Vector zero(w.size(), 0.0);
  EXPECT_DOUBLE_EQ(rel_mse_output(zero, w, w.size()), 1.0);
  Vector neg = w;
  for (double& x : neg) x = -x;
  EXPECT_DOUBLE_EQ(rel_mse_output(neg, w, w.size()), 4.0);
  const double eps = 1e-3;
  Vector scaled = w;
  for (double& x : scaled) x *= 1.0 + eps;
  EXPECT_NEAR(rel_mse_output(scaled, w, w.size()), eps * eps, 1e-12);
  EXPECT_THROW(rel_mse_output(w, zero, w.size()), InvalidArgument);
  EXPECT_THROW(rel_mse_output(w, w, w.size() + 1), InvalidArgument);
  EXPECT_DOUBLE_EQ(rel_mse_output(zero, w, 10), 1.0);
}

TEST(RelMse, DisplacementUsesHorizonPrefix) {
  Trajectory target(3, 20), pred(3, 20);
  target.q = random_series(60, 2);
  pred.q = target.q;
  for (std::size_t i = 30; i < 60; ++i) pred.q[i] += 1.0;
  EXPECT_EQ(rel_mse_displacement(pred, target, 10), 0.0);
  double e = 0.0;
  for (double x : target.q) e += x * x;
  EXPECT_NEAR(rel_mse_displacement(pred, target, 20), 30.0 / e, 1e-14);
}

TEST(PerMode, InjectedErrorStaysInItsMode) {
  Trajectory target(4, 50), pred(4, 50);
  target.q = random_series(200, 3);
  target.p = random_series(200, 4);
  pred = target;
  for (std::size_t n = 0; n < 50; ++n) pred.q[n * 4 + 2] += 0.5;
  const auto pm = per_mode_mse(pred, target, 50);
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_NEAR(pm.q[m], m == 2 ? 0.25 : 0.0, 1e-15);
    EXPECT_EQ(pm.p[m], 0.0);
  }
  EXPECT_THROW(per_mode_mse(pred, target, 0), InvalidArgument);
  EXPECT_THROW(per_mode_mse(pred, target, 51), InvalidArgument);
}

TEST(Horizons, Parsing) {
  const auto h = parse_horizons("100ms,full,0.5s,2");
  ASSERT_EQ(h.size(), 4u);
  EXPECT_DOUBLE_EQ(*h[0].seconds, 0.1);
  EXPECT_FALSE(h[1].seconds);
  EXPECT_DOUBLE_EQ(*h[2].seconds, 0.5);
  EXPECT_DOUBLE_EQ(*h[3].seconds, 2.0);
  const SimulationGrid g{88200.0, 176400};
  EXPECT_EQ(h[0].steps(g), 8820u);
  EXPECT_EQ(h[1].steps(g), 176400u);
  EXPECT_EQ(parse_horizons("10s")[0].steps(g), 176400u);
  EXPECT_THROW(parse_horizons("abc"), InvalidArgument);
  EXPECT_THROW(parse_horizons("-1ms"), InvalidArgument);
  EXPECT_THROW(parse_horizons(""), InvalidArgument);
}

class Evaluate : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto spec = dataset_profile("desk-test");
    spec.modes = 6;
    spec.ranges.duration = 0.05;
    spec.ranges.trajectories = 3;
    data_ = new std::vector<TrajectoryBundle>(generate_bundles(spec));
  }
  static void TearDownTestSuite() { delete data_; }
  static std::vector<TrajectoryBundle>* data_;
};
std::vector<TrajectoryBundle>* Evaluate::data_ = nullptr;

TEST_F(Evaluate, ExactTensorScoresZero) {
  const auto r = evaluate_model(build_tensor(6), *data_, parse_horizons("10ms,full"));
  ASSERT_EQ(r.aggregate.size(), 2u);
  for (const auto& a : r.aggregate) {
    EXPECT_LT(a.displacement, 1e-20);
    EXPECT_LT(a.output, 1e-20);
    EXPECT_GT(a.baseline_displacement, 0.0);
  }
  EXPECT_EQ(r.diverged, 0u);
}

TEST_F(Evaluate, ZeroModelEqualsBaseline) {
  const auto r = evaluate_model(ZeroNonlinearity{}, *data_, parse_horizons("full"), 2);
  const auto& a = r.aggregate[0];
  EXPECT_EQ(a.displacement, a.baseline_displacement);
  EXPECT_EQ(a.output, a.baseline_output);
  for (std::size_t m = 0; m < 6; ++m) EXPECT_EQ(a.per_mode.q[m], a.baseline_per_mode.q[m]);
}

TEST_F(Evaluate, BaselineIndependentOfModel) {
  const auto h = parse_horizons("20ms");
  const auto a = evaluate_model(build_tensor(6), *data_, h);
  const auto b = evaluate_model(ZeroNonlinearity{}, *data_, h);
  EXPECT_EQ(a.aggregate[0].baseline_displacement, b.aggregate[0].baseline_displacement);
  // Independent linear rollout.
  const auto& d = (*data_)[1];
  const auto ctx = make_context(d);
  const auto lin = linear_baseline(ctx.system, d.forcing, ctx.phi_e, d.grid);
  const std::size_t n = h[0].steps(d.grid);
  EXPECT_EQ(a.trajectories[1].horizons[0].baseline_displacement.residual,
            displacement_terms(lin, d.states, n).residual);
}

TEST_F(Evaluate, AggregationIsRatioOfSums) {
  MlpNetwork net = mlp_init(6, 1, 8, 0.01, 4);
  for (double& v : net.params()) v *= 1e-3;
  const auto r = evaluate_model(net, *data_, parse_horizons("30ms"));
  double num = 0.0, den = 0.0, mean = 0.0;
  for (const auto& t : r.trajectories) {
    num += t.horizons[0].output.residual;
    den += t.horizons[0].output.energy;
    mean += t.horizons[0].output.ratio();
  }
  EXPECT_NEAR(r.aggregate[0].output, num / den, 1e-12 * num / den);
  EXPECT_NEAR(r.aggregate[0].mean_output, mean / 3, 1e-12 * mean);
  const auto j = report_to_json(r);
  EXPECT_EQ(j["horizons"].size(), 1u);
  EXPECT_EQ(j["diverged_trajectories"], 0);
}

TEST_F(Evaluate, DivergenceIsCountedNotAggregated) {
  MlpNetwork net = mlp_init(6, 1, 4, 0.01, 4);
  for (double& b : net.bias(1)) b = 1e307;
  const auto r = evaluate_model(net, *data_, parse_horizons("full"));
  EXPECT_EQ(r.diverged, 3u);
  EXPECT_TRUE(r.trajectories[0].diverged);
  EXPECT_FALSE(r.trajectories[0].error.empty());
}

}  // namespace
}  // namespace modalnode
