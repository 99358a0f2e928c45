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

#ifndef MODALNODE_EXCITATION_HPP_
#define MODALNODE_EXCITATION_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "json.hpp"
#include "modalnode/error.hpp"
#include "modalnode/modal_core.hpp"

namespace modalnode {

// Raised-cosine pluck starting at t = 0.
struct PluckParams {
  double amplitude;  // f_amp, scaled force units
  double duration;   // T_e [s]
  double position;   // x_e in (0, 1)

  void validate() const {
    require(amplitude > 0.0, "pluck amplitude must be positive");
    require(duration > 0.0, "pluck duration must be positive");
    require(position > 0.0 && position < 1.0,
            "pluck position must lie in (0, 1)");
  }
};

// Peaks at f_amp exactly at t = T_e and is zero afterwards.
inline double pluck_value(const PluckParams& pluck, double t) {
  if (t < 0.0 || t > pluck.duration) return 0.0;
  return 0.5 * pluck.amplitude *
         (1.0 - std::cos(std::numbers::pi * t / pluck.duration));
}

inline Vector sample_pluck_sequence(const PluckParams& pluck,
                                    double sample_rate, std::size_t steps) {
  require(sample_rate > 0.0, "sample rate must be positive");
  require(steps >= 1, "step count must be at least 1");
  Vector out(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    out[n] = pluck_value(pluck, static_cast<double>(n) / sample_rate);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random draws. std::mt19937_64 is bit-specified by the standard; the
// uniform mapping below is done by hand because std::uniform_real_distribution
// is not portable across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent stream seed for item `index` under master `seed`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    if (lo == hi) return lo;
    return lo + (hi - lo) * uniform01();
  }

  std::mt19937_64& engine() { return engine_; }
  const std::mt19937_64& engine() const { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  static Interval point(double v) { return {v, v}; }
};

struct ParameterRanges {
  Interval gamma{123.4, 123.4};
  Interval kappa{1.01, 1.01};
  double sigma0 = 3.0;
  double sigma1 = 2e-4;
  Interval x_e{0.1, 0.9};
  Interval x_o{0.1, 0.9};
  Interval f_amp{2e4, 3e4};
  Interval t_e{0.5e-3, 1.5e-3};
  double sample_rate = 88200.0;
  double duration = 2.0;
  std::size_t trajectories = 60;
  std::uint64_t seed = 0;

  std::size_t steps() const {
    return static_cast<std::size_t>(std::llround(duration * sample_rate));
  }

  void validate() const {
    auto ordered = [](const Interval& i, const char* name) {
      require(std::isfinite(i.lo) && std::isfinite(i.hi) && i.lo <= i.hi,
              std::string("interval ") + name + " must satisfy lo <= hi");
    };
    ordered(gamma, "gamma");
    ordered(kappa, "kappa");
    ordered(x_e, "x_e");
    ordered(x_o, "x_o");
    ordered(f_amp, "f_amp");
    ordered(t_e, "t_e");
    require(gamma.lo > 0.0, "gamma must be positive");
    require(kappa.lo >= 0.0, "kappa must be non-negative");
    require(sigma0 >= 0.0 && sigma1 >= 0.0, "losses must be non-negative");
    require(x_e.lo > 0.0 && x_e.hi < 1.0, "x_e must lie in (0, 1)");
    require(x_o.lo >= 0.0 && x_o.hi <= 1.0, "x_o must lie in [0, 1]");
    require(f_amp.lo > 0.0, "f_amp must be positive");
    require(t_e.lo > 0.0, "t_e must be positive");
    require(sample_rate > 0.0, "sample rate must be positive");
    require(duration > 0.0, "duration must be positive");
    require(trajectories >= 1, "trajectory count must be at least 1");
  }
};

struct TrajectoryDraw {
  ScaledStringParams scaled;
  PluckParams pluck;
  double x_o;
};

// Consumes exactly six uniforms in a fixed order so that draws stay aligned
// across configurations with degenerate intervals.
inline TrajectoryDraw draw_trajectory_params(const ParameterRanges& ranges,
                                             Rng& rng) {
  TrajectoryDraw d{};
  d.scaled.gamma = rng.uniform(ranges.gamma.lo, ranges.gamma.hi);
  d.scaled.kappa = rng.uniform(ranges.kappa.lo, ranges.kappa.hi);
  d.scaled.sigma0 = ranges.sigma0;
  d.scaled.sigma1 = ranges.sigma1;
  d.pluck.position = rng.uniform(ranges.x_e.lo, ranges.x_e.hi);
  d.x_o = rng.uniform(ranges.x_o.lo, ranges.x_o.hi);
  d.pluck.amplitude = rng.uniform(ranges.f_amp.lo, ranges.f_amp.hi);
  d.pluck.duration = rng.uniform(ranges.t_e.lo, ranges.t_e.hi);
  return d;
}

inline TrajectoryDraw draw_trajectory_params(const ParameterRanges& ranges,
                                             std::uint64_t trajectory_index) {
  Rng rng(stream_seed(ranges.seed, trajectory_index));
  return draw_trajectory_params(ranges, rng);
}

// ---------------------------------------------------------------------------
// JSON: intervals are [lo, hi] arrays (a bare number means a point value),
// all quantities in SI units (t_e in seconds, sample_rate in Hz).

inline void to_json(nlohmann::json& j, const Interval& i) {
  j = nlohmann::json::array({i.lo, i.hi});
}

inline void from_json(const nlohmann::json& j, Interval& i) {
  if (j.is_number()) {
    i = Interval::point(j.get<double>());
  } else {
    require(j.is_array() && j.size() == 2, "interval must be [lo, hi]");
    i = {j[0].get<double>(), j[1].get<double>()};
  }
}

inline void to_json(nlohmann::json& j, const ParameterRanges& r) {
  j = {{"gamma", r.gamma},         {"kappa", r.kappa},
       {"sigma0", r.sigma0},       {"sigma1", r.sigma1},
       {"x_e", r.x_e},             {"x_o", r.x_o},
       {"f_amp", r.f_amp},         {"t_e", r.t_e},
       {"sample_rate", r.sample_rate}, {"duration", r.duration},
       {"trajectories", r.trajectories}, {"seed", r.seed}};
}

inline void from_json(const nlohmann::json& j, ParameterRanges& r) {
  ParameterRanges d;
  r.gamma = j.value("gamma", d.gamma);
  r.kappa = j.value("kappa", d.kappa);
  r.sigma0 = j.value("sigma0", d.sigma0);
  r.sigma1 = j.value("sigma1", d.sigma1);
  r.x_e = j.value("x_e", d.x_e);
  r.x_o = j.value("x_o", d.x_o);
  r.f_amp = j.value("f_amp", d.f_amp);
  r.t_e = j.value("t_e", d.t_e);
  r.sample_rate = j.value("sample_rate", d.sample_rate);
  r.duration = j.value("duration", d.duration);
  r.trajectories = j.value("trajectories", d.trajectories);
  r.seed = j.value("seed", d.seed);
  r.validate();
}

}  // namespace modalnode

#endif  // MODALNODE_EXCITATION_HPP_
