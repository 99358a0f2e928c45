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

#ifndef MODALNODE_MODAL_CORE_HPP_
#define MODALNODE_MODAL_CORE_HPP_

// String parameters, scaling, and the linear modal skeleton
//
//   q'' + 2 S q' + Omega^2 q = gamma^2 f(q) + Phi(x_e) f_e(t)
//
// on the unit interval with simply supported ends.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "modalnode/error.hpp"

namespace modalnode {

using Vector = std::vector<double>;

struct PhysicalStringParams {
  double length;         // L [m]
  double density;        // rho [kg m^-3]
  double radius;         // r [m]
  double tension;        // T [N]
  double youngs_modulus; // E [N m^-2]
  double sigma0 = 0.0;   // [s^-1]
  double sigma1 = 0.0;   // [m^2 s^-1]

  double area() const { return std::numbers::pi * radius * radius; }
  double moment_of_inertia() const {
    return 0.25 * std::numbers::pi * radius * radius * radius * radius;
  }
};

struct ScaledStringParams {
  double gamma;         // [s^-1]
  double kappa = 0.0;   // [s^-1]
  double sigma0 = 0.0;  // [s^-1]
  double sigma1 = 0.0;  // sigma1 / L^2 [s^-1]
  double u0 = 1.0;      // displacement scale
  double force_scale = 1.0;  // u0 / (rho A L), applied to physical forcing

  void validate() const {
    require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
    require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be non-negative");
    require(std::isfinite(sigma0) && sigma0 >= 0.0,
            "sigma0 must be non-negative");
    require(std::isfinite(sigma1) && sigma1 >= 0.0,
            "sigma1 must be non-negative");
    require(std::isfinite(u0) && u0 > 0.0, "u0 must be positive");
  }
};

// Diagonal linear part of the modal system. Index m = 0..M-1 holds mode m+1.
struct ModalSystem {
  Vector omega;    // angular frequency per mode [rad s^-1]
  Vector damping;  // S_m [s^-1]
  double gamma = 0.0;

  std::size_t modes() const { return omega.size(); }
  double max_omega() const { return omega.empty() ? 0.0 : omega.back(); }
};

struct State {
  Vector q;  // modal displacements
  Vector p;  // modal velocities [s^-1]

  State() = default;
  explicit State(std::size_t modes) : q(modes, 0.0), p(modes, 0.0) {}
  State(Vector q_in, Vector p_in) : q(std::move(q_in)), p(std::move(p_in)) {}

  std::size_t modes() const { return q.size(); }
};

inline double wavenumber(std::size_t mode_index) {
  return static_cast<double>(mode_index + 1) * std::numbers::pi;
}

inline ScaledStringParams scale_physical(const PhysicalStringParams& phys) {
  require(phys.length > 0.0, "length must be positive");
  require(phys.density > 0.0, "density must be positive");
  require(phys.radius > 0.0, "radius must be positive");
  require(phys.tension > 0.0, "tension must be positive");
  require(phys.youngs_modulus > 0.0, "Young's modulus must be positive");
  require(phys.sigma0 >= 0.0 && phys.sigma1 >= 0.0,
          "loss parameters must be non-negative");

  const double area = phys.area();
  const double stiffness = phys.youngs_modulus * area;
  require(stiffness >= phys.tension,
          "non-conservative nonlinearity: E*A < T");
  require(stiffness > phys.tension,
          "degenerate string: E*A == T makes the nonlinearity vanish");

  const double mass_per_length = phys.density * area;
  const double len = phys.length;
  ScaledStringParams s;
  s.gamma = std::sqrt(phys.tension / mass_per_length) / len;
  s.kappa = std::sqrt(phys.youngs_modulus * phys.moment_of_inertia() /
                      mass_per_length) /
            (len * len);
  s.sigma0 = phys.sigma0;
  s.sigma1 = phys.sigma1 / (len * len);
  s.u0 = std::sqrt(0.5 * (stiffness / phys.tension - 1.0)) / len;
  s.force_scale = s.u0 / (mass_per_length * len);
  return s;
}

inline ModalSystem build_modal_system(const ScaledStringParams& scaled,
                                      std::size_t modes) {
  require(modes >= 1, "mode count must be at least 1");
  ModalSystem sys;
  sys.gamma = scaled.gamma;
  sys.omega.resize(modes);
  sys.damping.resize(modes);
  const double g2 = scaled.gamma * scaled.gamma;
  const double k2 = scaled.kappa * scaled.kappa;
  for (std::size_t m = 0; m < modes; ++m) {
    const double beta2 = wavenumber(m) * wavenumber(m);
    sys.omega[m] = std::sqrt(g2 * beta2 + k2 * beta2 * beta2);
    sys.damping[m] = scaled.sigma0 + scaled.sigma1 * beta2;
  }
  return sys;
}

// Phi_m(x) = sqrt(2) sin(m pi x) for m = 1..M.
inline Vector mode_shape_vector(double x, std::size_t modes) {
  require(x >= 0.0 && x <= 1.0, "position must lie in [0, 1]");
  Vector phi(modes);
  for (std::size_t m = 0; m < modes; ++m) {
    phi[m] = std::numbers::sqrt2 * std::sin(wavenumber(m) * x);
  }
  return phi;
}

inline double readout(std::span<const double> q, std::span<const double> phi) {
  require(q.size() == phi.size(), "readout: length mismatch");
  double w = 0.0;
  for (std::size_t m = 0; m < q.size(); ++m) w += phi[m] * q[m];
  return w;
}

}  // namespace modalnode

#endif  // MODALNODE_MODAL_CORE_HPP_
