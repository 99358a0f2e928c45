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

#include <algorithm>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "modalnode/excitation.hpp"

namespace modalnode {
namespace {

TEST(Pluck, ClosedFormPoints) {
  const PluckParams p{2.5e4, 1e-3, 0.3};
  EXPECT_EQ(pluck_value(p, 0.0), 0.0);
  EXPECT_NEAR(pluck_value(p, 1e-3), 2.5e4, 1e-9);
  EXPECT_NEAR(pluck_value(p, 0.5e-3), 1.25e4, 1e-9);
  EXPECT_EQ(pluck_value(p, 1.0000001e-3), 0.0);
  EXPECT_EQ(pluck_value(p, -1e-6), 0.0);
  EXPECT_EQ(pluck_value(p, 0.3), 0.0);
}

TEST(Pluck, Validate) {
  EXPECT_NO_THROW((PluckParams{1.0, 1e-3, 0.5}).validate());
  EXPECT_THROW((PluckParams{0.0, 1e-3, 0.5}).validate(), InvalidArgument);
  EXPECT_THROW((PluckParams{1.0, 0.0, 0.5}).validate(), InvalidArgument);
  EXPECT_THROW((PluckParams{1.0, 1e-3, 1.0}).validate(), InvalidArgument);
}

TEST(PluckSequence, SupportLength) {
  const PluckParams p{2e4, 1e-3, 0.5};
  const double fs = 88200.0;
  const auto seq = sample_pluck_sequence(p, fs, 400);
  std::size_t expected = 0;
  for (std::size_t n = 1; n < 400; ++n) {
    if (static_cast<double>(n) / fs <= 1e-3) ++expected;
  }
  EXPECT_EQ(expected, 88u);
  EXPECT_EQ(seq[0], 0.0);
  for (std::size_t n = 1; n <= expected; ++n) EXPECT_GT(seq[n], 0.0) << n;
  for (std::size_t n = expected + 1; n < 400; ++n) EXPECT_EQ(seq[n], 0.0) << n;
  EXPECT_LE(*std::max_element(seq.begin(), seq.end()), p.amplitude);
}

TEST(PluckSequence, SingleStepAndRateDoubling) {
  const PluckParams p{3e4, 0.7e-3, 0.5};
  EXPECT_EQ(sample_pluck_sequence(p, 44100.0, 1), Vector{0.0});
  const auto coarse = sample_pluck_sequence(p, 44100.0, 100);
  const auto fine = sample_pluck_sequence(p, 88200.0, 200);
  for (std::size_t n = 0; n < 100; ++n) EXPECT_EQ(fine[2 * n], coarse[n]) << n;
  EXPECT_THROW(sample_pluck_sequence(p, 0.0, 10), InvalidArgument);
  EXPECT_THROW(sample_pluck_sequence(p, 1.0, 0), InvalidArgument);
}

TEST(Draw, DegenerateIntervalsAndRanges) {
  ParameterRanges r;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto d = draw_trajectory_params(r, i);
    EXPECT_EQ(d.scaled.gamma, 123.4);
    EXPECT_EQ(d.scaled.kappa, 1.01);
    EXPECT_EQ(d.scaled.sigma0, 3.0);
    EXPECT_EQ(d.scaled.sigma1, 2e-4);
    EXPECT_TRUE(r.x_e.contains(d.pluck.position));
    EXPECT_TRUE(r.x_o.contains(d.x_o));
    EXPECT_TRUE(r.f_amp.contains(d.pluck.amplitude));
    EXPECT_TRUE(r.t_e.contains(d.pluck.duration));
  }
}

TEST(Draw, DeterministicAndStreamsDiffer) {
  ParameterRanges r;
  r.seed = 42;
  const auto a = draw_trajectory_params(r, 3);
  const auto b = draw_trajectory_params(r, 3);
  const auto c = draw_trajectory_params(r, 4);
  EXPECT_EQ(a.pluck.position, b.pluck.position);
  EXPECT_EQ(a.pluck.amplitude, b.pluck.amplitude);
  EXPECT_NE(a.pluck.position, c.pluck.position);
  r.seed = 43;
  EXPECT_NE(draw_trajectory_params(r, 3).pluck.amplitude, a.pluck.amplitude);
}

TEST(Draw, PositionUniformKolmogorovSmirnov) {
  ParameterRanges r;
  r.seed = 9;
  Rng rng(stream_seed(r.seed, 0));
  std::vector<double> x(10000);
  for (auto& v : x) v = draw_trajectory_params(r, rng).pluck.position;
  std::sort(x.begin(), x.end());
  double d = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = (x[i] - 0.1) / 0.8;
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  // Asymptotic critical value at significance 0.01.
  EXPECT_LT(d, 1.6276 / std::sqrt(n));
}

TEST(Rng, UniformEdges) {
  Rng rng(1);
  EXPECT_EQ(rng.uniform(2.0, 2.0), 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(stream_seed(0, 0), stream_seed(0, 1));
  EXPECT_NE(stream_seed(0, 1), stream_seed(1, 0));
}

TEST(Ranges, JsonRoundTripAndValidation) {
  ParameterRanges r;
  r.gamma = {130.0, 246.0};
  r.seed = 77;
  r.duration = 0.5;
  const nlohmann::json j = r;
  const auto back = j.get<ParameterRanges>();
  EXPECT_EQ(back.gamma.lo, 130.0);
  EXPECT_EQ(back.gamma.hi, 246.0);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.duration, 0.5);
  EXPECT_EQ(back.f_amp.hi, 3e4);

  auto k = j;
  k["kappa"] = 1.05;
  EXPECT_EQ(k.get<ParameterRanges>().kappa.lo, 1.05);
  EXPECT_EQ(k.get<ParameterRanges>().kappa.hi, 1.05);

  ParameterRanges bad;
  bad.x_e = {0.9, 0.1};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = {};
  bad.gamma = {0.0, 1.0};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_EQ(ParameterRanges{}.steps(), 176400u);
}

}  // namespace
}  // namespace modalnode
