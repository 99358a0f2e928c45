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

#ifndef MODALNODE_EVALUATION_HPP_
#define MODALNODE_EVALUATION_HPP_

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modalnode/dataset.hpp"
#include "modalnode/error.hpp"
#include "modalnode/integrator.hpp"
#include "modalnode/parallel.hpp"

namespace modalnode {

// Numerator and denominator of a relative MSE, kept apart for aggregation.
struct RelMseTerms {
  double residual = 0.0;  // sum |pred - target|^2
  double energy = 0.0;    // sum |target|^2

  double ratio() const {
    if (energy == 0.0) throw InvalidArgument("relative MSE of an all-zero target");
    return residual / energy;
  }
};

inline RelMseTerms rel_mse_terms(std::span<const double> pred,
                                 std::span<const double> target) {
  require(pred.size() == target.size(), "relative MSE: length mismatch");
  RelMseTerms t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    t.residual += d * d;
    t.energy += target[i] * target[i];
  }
  return t;
}

inline RelMseTerms displacement_terms(const Trajectory& pred,
                                      const Trajectory& target,
                                      std::size_t horizon) {
  require(pred.modes == target.modes, "relative MSE: mode count mismatch");
  require(horizon <= pred.steps && horizon <= target.steps,
          "relative MSE: horizon exceeds trajectory length");
  const std::size_t n = horizon * target.modes;
  return rel_mse_terms(std::span<const double>(pred.q).first(n),
                       std::span<const double>(target.q).first(n));
}

inline double rel_mse_displacement(const Trajectory& pred,
                                   const Trajectory& target,
                                   std::size_t horizon) {
  return displacement_terms(pred, target, horizon).ratio();
}

inline double rel_mse_output(std::span<const double> pred_w,
                             std::span<const double> target_w,
                             std::size_t horizon) {
  require(horizon <= pred_w.size() && horizon <= target_w.size(),
          "relative MSE: horizon exceeds series length");
  return rel_mse_terms(pred_w.first(horizon), target_w.first(horizon)).ratio();
}

struct PerModeMse {
  Vector q;
  Vector p;
};

inline PerModeMse per_mode_mse(const Trajectory& pred, const Trajectory& target,
                               std::size_t horizon) {
  require(pred.modes == target.modes, "per-mode MSE: mode count mismatch");
  require(horizon >= 1 && horizon <= pred.steps && horizon <= target.steps,
          "per-mode MSE: invalid horizon");
  const std::size_t modes = target.modes;
  PerModeMse out{Vector(modes, 0.0), Vector(modes, 0.0)};
  for (std::size_t n = 0; n < horizon; ++n) {
    const auto pq = pred.q_at(n), tq = target.q_at(n);
    const auto pp = pred.p_at(n), tp = target.p_at(n);
    for (std::size_t m = 0; m < modes; ++m) {
      out.q[m] += (pq[m] - tq[m]) * (pq[m] - tq[m]);
      out.p[m] += (pp[m] - tp[m]) * (pp[m] - tp[m]);
    }
  }
  for (std::size_t m = 0; m < modes; ++m) {
    out.q[m] /= static_cast<double>(horizon);
    out.p[m] /= static_cast<double>(horizon);
  }
  return out;
}

// Same solver and excitation with the gamma^2 f term removed.
inline Trajectory linear_baseline(const ModalSystem& system,
                                  std::span<const double> forcing,
                                  std::span<const double> phi_e,
                                  const SimulationGrid& grid) {
  return rollout(State(system.modes()), system, ZeroNonlinearity{}, forcing, phi_e,
                 grid);
}

// ---------------------------------------------------------------------------

// A reporting horizon: a duration in seconds, or the full trajectory.
struct Horizon {
  std::string label;
  std::optional<double> seconds;

  std::size_t steps(const SimulationGrid& grid) const {
    if (!seconds) return grid.steps;
    const auto n = static_cast<std::size_t>(std::llround(*seconds * grid.sample_rate));
    return std::clamp<std::size_t>(n, 1, grid.steps);
  }
};

// Parses "100ms,full,0.5s".
inline std::vector<Horizon> parse_horizons(const std::string& text) {
  std::vector<Horizon> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "full") {
      out.push_back({item, std::nullopt});
      continue;
    }
    double scale = 1.0;
    std::string number = item;
    if (item.size() > 2 && item.substr(item.size() - 2) == "ms") {
      scale = 1e-3;
      number = item.substr(0, item.size() - 2);
    } else if (item.back() == 's') {
      number = item.substr(0, item.size() - 1);
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == number.size() && value > 0.0, "bad horizon: " + item);
    out.push_back({item, value * scale});
  }
  require(!out.empty(), "no horizons given");
  return out;
}

struct HorizonMetrics {
  std::size_t steps = 0;
  RelMseTerms displacement;
  RelMseTerms output;
  RelMseTerms baseline_displacement;
  RelMseTerms baseline_output;
};

struct TrajectoryEval {
  std::size_t index = 0;
  bool diverged = false;
  std::string error;
  std::vector<HorizonMetrics> horizons;
  std::vector<PerModeMse> per_mode;           // per horizon
  std::vector<PerModeMse> baseline_per_mode;  // per horizon
};

struct AggregateMetrics {
  std::string label;
  // ratio of summed numerators to summed denominators (headline)
  double displacement = 0.0;
  double output = 0.0;
  double baseline_displacement = 0.0;
  double baseline_output = 0.0;
  // mean of per-trajectory ratios
  double mean_displacement = 0.0;
  double mean_output = 0.0;
  double mean_baseline_displacement = 0.0;
  double mean_baseline_output = 0.0;
  // mean over trajectories of the per-mode MSE
  PerModeMse per_mode;
  PerModeMse baseline_per_mode;
};

struct EvalReport {
  std::string model_id;
  std::string dataset_id;
  std::vector<Horizon> horizons;
  std::vector<TrajectoryEval> trajectories;
  std::vector<AggregateMetrics> aggregate;  // one per horizon
  std::size_t diverged = 0;
};

inline std::vector<AggregateMetrics> aggregate_metrics(
    const std::vector<Horizon>& horizons,
    const std::vector<TrajectoryEval>& trajectories) {
  std::vector<AggregateMetrics> out(horizons.size());
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    auto& a = out[h];
    a.label = horizons[h].label;
    RelMseTerms dq, dw, bq, bw;
    std::size_t used = 0;
    for (const auto& t : trajectories) {
      if (t.diverged) continue;
      const auto& m = t.horizons[h];
      dq.residual += m.displacement.residual;
      dq.energy += m.displacement.energy;
      dw.residual += m.output.residual;
      dw.energy += m.output.energy;
      bq.residual += m.baseline_displacement.residual;
      bq.energy += m.baseline_displacement.energy;
      bw.residual += m.baseline_output.residual;
      bw.energy += m.baseline_output.energy;
      a.mean_displacement += m.displacement.ratio();
      a.mean_output += m.output.ratio();
      a.mean_baseline_displacement += m.baseline_displacement.ratio();
      a.mean_baseline_output += m.baseline_output.ratio();
      const auto& pm = t.per_mode[h];
      const auto& bm = t.baseline_per_mode[h];
      if (a.per_mode.q.empty()) {
        a.per_mode = {Vector(pm.q.size()), Vector(pm.q.size())};
        a.baseline_per_mode = a.per_mode;
      }
      for (std::size_t m2 = 0; m2 < pm.q.size(); ++m2) {
        a.per_mode.q[m2] += pm.q[m2];
        a.per_mode.p[m2] += pm.p[m2];
        a.baseline_per_mode.q[m2] += bm.q[m2];
        a.baseline_per_mode.p[m2] += bm.p[m2];
      }
      ++used;
    }
    if (used == 0) continue;
    const double inv = 1.0 / static_cast<double>(used);
    a.displacement = dq.ratio();
    a.output = dw.ratio();
    a.baseline_displacement = bq.ratio();
    a.baseline_output = bw.ratio();
    a.mean_displacement *= inv;
    a.mean_output *= inv;
    a.mean_baseline_displacement *= inv;
    a.mean_baseline_output *= inv;
    for (auto* v : {&a.per_mode.q, &a.per_mode.p, &a.baseline_per_mode.q,
                    &a.baseline_per_mode.p}) {
      for (double& x : *v) x *= inv;
    }
  }
  return out;
}

// Free-running rollout from rest for every trajectory, compared with the
// stored target and with the linear baseline.
template <ModalNonlinearity N>
EvalReport evaluate_model(const N& model, std::span<const TrajectoryBundle> data,
                          const std::vector<Horizon>& horizons,
                          std::size_t threads = 1, std::string model_id = "",
                          std::string dataset_id = "") {
  require(!horizons.empty(), "evaluate_model: no horizons");
  EvalReport report;
  report.model_id = std::move(model_id);
  report.dataset_id = std::move(dataset_id);
  report.horizons = horizons;
  report.trajectories.resize(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto& b = data[i];
    auto& out = report.trajectories[i];
    out.index = i;
    const auto ctx = make_context(b);
    const auto baseline = linear_baseline(ctx.system, b.forcing, ctx.phi_e, b.grid);
    const auto baseline_w = output_series(baseline, ctx.phi_o);
    Trajectory pred;
    try {
      pred = rollout(State(b.modes()), ctx.system, model, b.forcing, ctx.phi_e,
                     b.grid);
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.error = e.what();
      return;
    }
    const auto pred_w = output_series(pred, ctx.phi_o);
    for (const auto& h : horizons) {
      const std::size_t n = h.steps(b.grid);
      HorizonMetrics m;
      m.steps = n;
      m.displacement = displacement_terms(pred, b.states, n);
      m.output = rel_mse_terms(std::span<const double>(pred_w).first(n),
                               std::span<const double>(b.output).first(n));
      m.baseline_displacement = displacement_terms(baseline, b.states, n);
      m.baseline_output =
          rel_mse_terms(std::span<const double>(baseline_w).first(n),
                        std::span<const double>(b.output).first(n));
      out.horizons.push_back(m);
      out.per_mode.push_back(per_mode_mse(pred, b.states, n));
      out.baseline_per_mode.push_back(per_mode_mse(baseline, b.states, n));
    }
  });
  for (const auto& t : report.trajectories) report.diverged += t.diverged ? 1 : 0;
  report.aggregate = aggregate_metrics(horizons, report.trajectories);
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["model"] = r.model_id;
  j["dataset"] = r.dataset_id;
  j["aggregation"] = "ratio of summed numerators to summed denominators";
  j["diverged_trajectories"] = r.diverged;
  j["horizons"] = nlohmann::json::array();
  for (const auto& a : r.aggregate) {
    j["horizons"].push_back(
        {{"label", a.label},
         {"rel_mse_displacement", a.displacement},
         {"rel_mse_output", a.output},
         {"baseline_rel_mse_displacement", a.baseline_displacement},
         {"baseline_rel_mse_output", a.baseline_output},
         {"mean_of_ratios",
          {{"rel_mse_displacement", a.mean_displacement},
           {"rel_mse_output", a.mean_output},
           {"baseline_rel_mse_displacement", a.mean_baseline_displacement},
           {"baseline_rel_mse_output", a.mean_baseline_output}}},
         {"per_mode_mse_q", a.per_mode.q},
         {"per_mode_mse_p", a.per_mode.p},
         {"baseline_per_mode_mse_q", a.baseline_per_mode.q},
         {"baseline_per_mode_mse_p", a.baseline_per_mode.p}});
  }
  j["trajectories"] = nlohmann::json::array();
  for (const auto& t : r.trajectories) {
    nlohmann::json tj = {{"index", t.index}, {"diverged", t.diverged}};
    if (t.diverged) tj["error"] = t.error;
    tj["horizons"] = nlohmann::json::array();
    for (std::size_t h = 0; h < t.horizons.size(); ++h) {
      const auto& m = t.horizons[h];
      tj["horizons"].push_back(
          {{"label", r.horizons[h].label},
           {"steps", m.steps},
           {"displacement", {m.displacement.residual, m.displacement.energy}},
           {"output", {m.output.residual, m.output.energy}},
           {"baseline_displacement",
            {m.baseline_displacement.residual, m.baseline_displacement.energy}},
           {"baseline_output",
            {m.baseline_output.residual, m.baseline_output.energy}}});
    }
    j["trajectories"].push_back(std::move(tj));
  }
  return j;
}

}  // namespace modalnode

#endif  // MODALNODE_EVALUATION_HPP_
