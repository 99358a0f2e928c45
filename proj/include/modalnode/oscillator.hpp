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

#ifndef MODALNODE_OSCILLATOR_HPP_
#define MODALNODE_OSCILLATOR_HPP_

// Lumped nonlinear oscillator
//
//   q'' + omega0^2 q = gamma^2 f(q) + fe(t)
//
// run through the same one-mode pipeline as the string.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modalnode/dataset.hpp"
#include "modalnode/error.hpp"
#include "modalnode/modal_core.hpp"
#include "modalnode/nonlinearity.hpp"

namespace modalnode {

enum class OscillatorNonlinearity { kCubic, kSinh, kNeural };

inline std::string to_string(OscillatorNonlinearity kind) {
  switch (kind) {
    case OscillatorNonlinearity::kCubic: return "cubic";
    case OscillatorNonlinearity::kSinh: return "sinh";
    case OscillatorNonlinearity::kNeural: return "neural";
  }
  return "unknown";
}

inline OscillatorNonlinearity oscillator_nonlinearity_from_string(
    const std::string& name) {
  if (name == "neural") return OscillatorNonlinearity::kNeural;
  return lumped_kind_from_string(name) == LumpedKind::kCubic
             ? OscillatorNonlinearity::kCubic
             : OscillatorNonlinearity::kSinh;
}

struct OscillatorConfig {
  double omega0 = 400.0;
  double gamma = 110.0;
  OscillatorNonlinearity kind = OscillatorNonlinearity::kCubic;
  // Excitation ranges, sample rate, duration and trajectory count. The
  // gamma entry is ignored in favour of the scalar above.
  ParameterRanges ranges = oscillator_ranges();

  void validate() const {
    require(omega0 > 0.0 && std::isfinite(omega0), "omega0 must be positive");
    require(gamma >= 0.0 && std::isfinite(gamma), "gamma must be non-negative");
    ranges.validate();
  }
};

inline ModalSystem make_oscillator_system(const OscillatorConfig& config) {
  config.validate();
  SystemSpec spec;
  spec.kind = SystemKind::kOscillator;
  spec.modes = 1;
  spec.omega0 = config.omega0;
  spec.scaled.gamma = config.gamma;
  return make_system(spec);
}

// Closed-form ground truth; the neural kind has none.
inline LumpedNonlinearity oscillator_ground_truth(const OscillatorConfig& config) {
  require(config.kind != OscillatorNonlinearity::kNeural,
          "a neural oscillator has no closed-form nonlinearity");
  return {config.kind == OscillatorNonlinearity::kCubic ? LumpedKind::kCubic
                                                        : LumpedKind::kSinh};
}

inline DatasetSpec oscillator_dataset_spec(const OscillatorConfig& config,
                                           std::string name) {
  config.validate();
  DatasetSpec s;
  s.name = std::move(name);
  s.kind = SystemKind::kOscillator;
  s.modes = 1;
  s.omega0 = config.omega0;
  s.ranges = config.ranges;
  s.ranges.gamma = Interval::point(config.gamma);
  s.lumped = oscillator_ground_truth(config).kind;
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Tabulation of a scalar nonlinearity.

struct NonlinearityTable {
  Vector q;
  Vector f;
};

// Uniform grid of `points` samples over [q_min, q_max], endpoints included.
template <ModalNonlinearity N>
NonlinearityTable sample_learned_nonlinearity(const N& nl, double q_min,
                                              double q_max, std::size_t points) {
  require(points >= 2, "need at least two grid points");
  require(std::isfinite(q_min) && std::isfinite(q_max) && q_min < q_max,
          "invalid displacement range");
  NonlinearityTable t;
  t.q.resize(points);
  t.f.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(points - 1);
    t.q[i] = i + 1 == points ? q_max : q_min + s * (q_max - q_min);
    const double q[1] = {t.q[i]};
    double f[1] = {0.0};
    nl.evaluate(q, f);
    t.f[i] = f[0];
  }
  return t;
}

// Minimum and maximum displacement over all bundles (mode 1).
inline std::pair<double, double> observed_range(
    std::span<const TrajectoryBundle> bundles) {
  require(!bundles.empty(), "no trajectories");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& b : bundles) {
    for (std::size_t n = 0; n < b.steps(); ++n) {
      const double q = b.states.q_at(n)[0];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
  }
  return {lo, hi};
}

// ||f_table - g||_2 / ||g||_2 on the table's grid.
template <typename Fn>
double relative_l2_error(const NonlinearityTable& t, Fn&& reference) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < t.q.size(); ++i) {
    const double g = reference(t.q[i]);
    num += (t.f[i] - g) * (t.f[i] - g);
    den += g * g;
  }
  require(den > 0.0, "reference nonlinearity vanishes on the grid");
  return std::sqrt(num / den);
}

// q,f_learned,f_cubic,f_sinh
inline void write_nonlinearity_csv(const std::filesystem::path& path,
                                   const NonlinearityTable& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "q,f_learned,f_cubic,f_sinh\n";
  const LumpedNonlinearity cubic{LumpedKind::kCubic};
  const LumpedNonlinearity sinh{LumpedKind::kSinh};
  for (std::size_t i = 0; i < t.q.size(); ++i) {
    out << t.q[i] << ',' << t.f[i] << ',' << cubic(t.q[i]) << ',' << sinh(t.q[i])
        << '\n';
  }
}

}  // namespace modalnode

#endif  // MODALNODE_OSCILLATOR_HPP_
