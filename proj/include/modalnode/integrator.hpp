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

#ifndef MODALNODE_INTEGRATOR_HPP_
#define MODALNODE_INTEGRATOR_HPP_

// Explicit Stormer-Verlet update for the modal system
//
//   p^{n+1/2} = p^n + k/2 [-2 S p^n - Omega^2 q^n + gamma^2 f(q^n) + Phi_e fe^n]
//   q^{n+1}   = q^n + k p^{n+1/2}
//   p^{n+1}   = (I + k S)^{-1} [p^{n+1/2}
//                 + k/2 (-Omega^2 q^{n+1} + gamma^2 f(q^{n+1}) + Phi_e fe^{n+1})]
//
// f(q^{n+1}) is handed back to the caller and reused as f(q^n) of the next
// step, so a rollout costs one nonlinearity evaluation per step.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "modalnode/error.hpp"
#include "modalnode/modal_core.hpp"
#include "modalnode/nonlinearity.hpp"

namespace modalnode {

struct SimulationGrid {
  double sample_rate = 44100.0;  // fs = 1/k [Hz]
  std::size_t steps = 1;         // N, number of stored states

  double step() const { return 1.0 / sample_rate; }

  void validate() const {
    require(std::isfinite(sample_rate) && sample_rate > 0.0,
            "sample rate must be positive");
    require(steps >= 1, "step count must be at least 1");
  }
};

struct StabilityReport {
  bool stable;
  double margin;  // k * Omega_max / 2; stable iff < 1
};

inline StabilityReport check_stability(const ModalSystem& system, double k) {
  const double margin = 0.5 * k * system.max_omega();
  return {margin < 1.0, margin};
}

// Type-erased view of a nonlinearity. Holds a reference: the wrapped object
// must outlive the handle.
class NonlinearityHandle {
 public:
  template <ModalNonlinearity N>
  NonlinearityHandle(const N& nl)  // NOLINT(google-explicit-constructor)
      : fn_([&nl](std::span<const double> q, std::span<double> f) {
          nl.evaluate(q, f);
        }) {}

  void evaluate(std::span<const double> q, std::span<double> f) const {
    if (counter_ != nullptr) ++*counter_;
    fn_(q, f);
  }

  // Instrumentation hook: every evaluation increments *counter.
  void set_counter(std::size_t* counter) { counter_ = counter; }

 private:
  std::function<void(std::span<const double>, std::span<double>)> fn_;
  std::size_t* counter_ = nullptr;
};

namespace detail {

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// In-place step: (q, p, f = f(q^n)) -> (q^{n+1}, p^{n+1}, f(q^{n+1})).
template <ModalNonlinearity N>
void verlet_advance(std::span<double> q, std::span<double> p,
                    std::span<double> f, const ModalSystem& system,
                    const N& nl, double fe_n, double fe_n1,
                    std::span<const double> phi_e, double k) {
  const std::size_t modes = q.size();
  const double g2 = system.gamma * system.gamma;
  const double half_k = 0.5 * k;
  for (std::size_t m = 0; m < modes; ++m) {
    const double w2 = system.omega[m] * system.omega[m];
    p[m] += half_k * (-2.0 * system.damping[m] * p[m] - w2 * q[m] +
                      g2 * f[m] + phi_e[m] * fe_n);
    q[m] += k * p[m];
  }
  nl.evaluate(q, f);
  for (std::size_t m = 0; m < modes; ++m) {
    const double w2 = system.omega[m] * system.omega[m];
    p[m] = (p[m] + half_k * (-w2 * q[m] + g2 * f[m] + phi_e[m] * fe_n1)) /
           (1.0 + k * system.damping[m]);
  }
}

}  // namespace detail

struct StepResult {
  State next;
  Vector f_next;  // f(q^{n+1}), reusable as the next step's cached_f
};

template <ModalNonlinearity N>
StepResult verlet_step(const State& state, const ModalSystem& system,
                       const N& nl, double fe_n, double fe_n1,
                       std::span<const double> phi_e, double k,
                       std::optional<std::span<const double>> cached_f = {},
                       std::size_t step_index = 0) {
  const std::size_t modes = system.modes();
  require(state.q.size() == modes && state.p.size() == modes,
          "verlet_step: state dimension mismatch");
  require(phi_e.size() == modes, "verlet_step: excitation shape mismatch");
  StepResult r{state, Vector(modes)};
  if (cached_f) {
    require(cached_f->size() == modes, "verlet_step: cached f mismatch");
    std::copy(cached_f->begin(), cached_f->end(), r.f_next.begin());
  } else {
    nl.evaluate(state.q, r.f_next);
  }
  detail::verlet_advance(std::span<double>(r.next.q), std::span<double>(r.next.p),
                         std::span<double>(r.f_next), system, nl, fe_n, fe_n1,
                         phi_e, k);
  if (!detail::all_finite(r.next.q) || !detail::all_finite(r.next.p)) {
    throw DivergenceError(step_index + 1, "non-finite modal state");
  }
  return r;
}

// State series on the integer time grid, row-major (step x mode).
struct Trajectory {
  std::size_t modes = 0;
  std::size_t steps = 0;
  Vector q;
  Vector p;

  Trajectory() = default;
  Trajectory(std::size_t modes_in, std::size_t steps_in)
      : modes(modes_in),
        steps(steps_in),
        q(modes_in * steps_in, 0.0),
        p(modes_in * steps_in, 0.0) {}

  std::span<const double> q_at(std::size_t n) const {
    return std::span<const double>(q).subspan(n * modes, modes);
  }
  std::span<const double> p_at(std::size_t n) const {
    return std::span<const double>(p).subspan(n * modes, modes);
  }
  std::span<double> q_at(std::size_t n) {
    return std::span<double>(q).subspan(n * modes, modes);
  }
  std::span<double> p_at(std::size_t n) {
    return std::span<double>(p).subspan(n * modes, modes);
  }
  State state_at(std::size_t n) const {
    auto qs = q_at(n);
    auto ps = p_at(n);
    return State(Vector(qs.begin(), qs.end()), Vector(ps.begin(), ps.end()));
  }
};

struct RolloutOptions {
  bool force = false;        // run even if the linear stability bound fails
  std::size_t step_offset = 0;  // absolute index of the initial state
};

// N states starting with `initial`; forcing[n] is fe at absolute step
// options.step_offset + n and must cover all N states.
template <ModalNonlinearity N>
Trajectory rollout(const State& initial, const ModalSystem& system,
                   const N& nl, std::span<const double> forcing,
                   std::span<const double> phi_e, const SimulationGrid& grid,
                   RolloutOptions options = {}) {
  grid.validate();
  const std::size_t modes = system.modes();
  require(initial.q.size() == modes && initial.p.size() == modes,
          "rollout: initial state dimension mismatch");
  require(phi_e.size() == modes, "rollout: excitation shape mismatch");
  require(forcing.size() >= grid.steps, "rollout: forcing sequence too short");
  const double k = grid.step();
  if (const auto report = check_stability(system, k);
      !report.stable && !options.force) {
    throw StabilityError("linear Verlet bound violated: k*Omega_max/2 = " +
                         std::to_string(report.margin));
  }

  Trajectory traj(modes, grid.steps);
  Vector q = initial.q;
  Vector p = initial.p;
  Vector f(modes);
  nl.evaluate(q, f);
  std::copy(q.begin(), q.end(), traj.q_at(0).begin());
  std::copy(p.begin(), p.end(), traj.p_at(0).begin());
  for (std::size_t n = 0; n + 1 < grid.steps; ++n) {
    detail::verlet_advance(std::span<double>(q), std::span<double>(p),
                           std::span<double>(f), system, nl, forcing[n],
                           forcing[n + 1], phi_e, k);
    if (!detail::all_finite(q) || !detail::all_finite(p)) {
      throw DivergenceError(options.step_offset + n + 1,
                            "non-finite modal state");
    }
    std::copy(q.begin(), q.end(), traj.q_at(n + 1).begin());
    std::copy(p.begin(), p.end(), traj.p_at(n + 1).begin());
  }
  return traj;
}

// H = |p|^2/2 + sum (Omega_m q_m)^2 / 2 + gamma^2 V(q).
inline double modal_energy(const ModalSystem& system, std::span<const double> q,
                           std::span<const double> p, double potential) {
  double h = 0.0;
  for (std::size_t m = 0; m < q.size(); ++m) {
    const double wq = system.omega[m] * q[m];
    h += 0.5 * (p[m] * p[m] + wq * wq);
  }
  return h + system.gamma * system.gamma * potential;
}

}  // namespace modalnode

#endif  // MODALNODE_INTEGRATOR_HPP_
