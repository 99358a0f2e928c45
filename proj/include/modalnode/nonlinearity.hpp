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

#ifndef MODALNODE_NONLINEARITY_HPP_
#define MODALNODE_NONLINEARITY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "modalnode/binary_io.hpp"
#include "modalnode/error.hpp"
#include "modalnode/modal_core.hpp"

namespace modalnode {

// Anything that maps modal displacements q to a force vector f(q) of equal
// length. The integrator, training and evaluation code accept any model of
// this concept.
template <typename N>
concept ModalNonlinearity =
    requires(const N& nl, std::span<const double> q, std::span<double> f) {
      { nl.evaluate(q, f) } -> std::same_as<void>;
    };

struct ZeroNonlinearity {
  void evaluate(std::span<const double>, std::span<double> f) const {
    std::fill(f.begin(), f.end(), 0.0);
  }
};

// ---------------------------------------------------------------------------
// Exact cubic coupling tensor of the simply supported string.

struct TensorEntry {
  std::uint32_t m;   // 1-based output mode
  std::uint32_t i1;  // 1-based, i1 <= i2 <= i3
  std::uint32_t i2;
  std::uint32_t i3;
  double value;      // symmetric A^m_{i1,i2,i3}
};

// Number of distinct orderings of a sorted triple.
inline int multiplicity(std::uint32_t i1, std::uint32_t i2, std::uint32_t i3) {
  if (i1 == i2 && i2 == i3) return 1;
  if (i1 == i2 || i2 == i3) return 3;
  return 6;
}

namespace detail {

inline double kronecker(long a, long b) { return a == b ? 1.0 : 0.0; }

// B^{k,m}_{i,j} with its eight Kronecker terms.
inline double coupling_b(long k, long m, long i, long j) {
  const double deltas =
      kronecker(k + i, m + j) - kronecker(k + i, -(m + j)) +
      kronecker(k + i, m - j) - kronecker(k + i, -(m - j)) +
      kronecker(k - i, m + j) - kronecker(k - i, -(m + j)) +
      kronecker(k - i, m - j) - kronecker(k - i, -(m - j));
  return static_cast<double>(i * j * k * k) * deltas;
}

// Unsymmetrised A^m_{a,b,c}, divided by pi^4/2.
inline double coupling_a_unscaled(long m, long a, long b, long c) {
  return coupling_b(a, m, b, c) + coupling_b(b, m, c, a) +
         coupling_b(c, m, a, b);
}

}  // namespace detail

// Symmetrised tensor value A^m_{a,b,c}: mean of the closed form over the six
// orderings of the lower indices.
inline double coupling_coefficient(long m, long a, long b, long c) {
  const double sum = detail::coupling_a_unscaled(m, a, b, c) +
                     detail::coupling_a_unscaled(m, a, c, b) +
                     detail::coupling_a_unscaled(m, b, a, c) +
                     detail::coupling_a_unscaled(m, b, c, a) +
                     detail::coupling_a_unscaled(m, c, a, b) +
                     detail::coupling_a_unscaled(m, c, b, a);
  constexpr double half_pi4 = 0.5 * std::numbers::pi * std::numbers::pi *
                              std::numbers::pi * std::numbers::pi;
  return half_pi4 * sum / 6.0;
}

enum class CountConvention {
  kCanonical,   // unique sorted (m, i1 <= i2 <= i3) entries
  kOrdered,     // all (m, i1, i2, i3) reachable by permuting lower indices
  kOrderedDistinctLeadingPair,  // ordered entries with i1 != i2
};

class CouplingTensor {
 public:
  CouplingTensor() = default;
  CouplingTensor(std::size_t modes, std::vector<TensorEntry> entries)
      : modes_(modes), entries_(std::move(entries)) {
    weighted_.reserve(entries_.size());
    for (const auto& e : entries_) {
      require(e.m >= 1 && e.m <= modes_ && e.i1 >= 1 && e.i1 <= e.i2 &&
                  e.i2 <= e.i3 && e.i3 <= modes_,
              "tensor entry out of canonical range");
      weighted_.push_back(multiplicity(e.i1, e.i2, e.i3) * e.value);
    }
  }

  std::size_t modes() const { return modes_; }
  std::span<const TensorEntry> entries() const { return entries_; }

  // f_m = -sum A^m q q q over the full index range.
  void evaluate(std::span<const double> q, std::span<double> f) const {
    require(q.size() == modes_ && f.size() == modes_,
            "coupling tensor: length mismatch");
    std::fill(f.begin(), f.end(), 0.0);
    const double* qd = q.data();
    for (std::size_t n = 0; n < entries_.size(); ++n) {
      const auto& e = entries_[n];
      f[e.m - 1] -= weighted_[n] * qd[e.i1 - 1] * qd[e.i2 - 1] * qd[e.i3 - 1];
    }
  }

  // Scalar potential V with -grad V = f; V = -q.f(q)/4 by cubic homogeneity.
  double potential(std::span<const double> q) const {
    Vector f(modes_);
    evaluate(q, f);
    double v = 0.0;
    for (std::size_t m = 0; m < modes_; ++m) v -= 0.25 * q[m] * f[m];
    return v;
  }

  std::size_t count_nonzeros(CountConvention convention) const {
    std::size_t count = 0;
    for (const auto& e : entries_) {
      switch (convention) {
        case CountConvention::kCanonical:
          count += 1;
          break;
        case CountConvention::kOrdered:
          count += static_cast<std::size_t>(multiplicity(e.i1, e.i2, e.i3));
          break;
        case CountConvention::kOrderedDistinctLeadingPair: {
          const int mult = multiplicity(e.i1, e.i2, e.i3);
          // (a,a,a) -> 0 orderings with i1 != i2; (a,a,b) -> 2; distinct -> 6
          count += mult == 1 ? 0u : mult == 3 ? 2u : 6u;
          break;
        }
      }
    }
    return count;
  }

 private:
  std::size_t modes_ = 0;
  std::vector<TensorEntry> entries_;
  Vector weighted_;
};

// For each (m, i1, i2) the Kronecker deltas only fire when the remaining
// index equals |m +- i1 +- i2|, so the build is O(M^3).
inline CouplingTensor build_tensor(std::size_t modes) {
  require(modes >= 1, "mode count must be at least 1");
  const long M = static_cast<long>(modes);
  std::vector<TensorEntry> entries;
  for (long m = 1; m <= M; ++m) {
    for (long i1 = 1; i1 <= M; ++i1) {
      for (long i2 = i1; i2 <= M; ++i2) {
        std::array<long, 4> cand = {std::abs(m + i1 + i2),
                                    std::abs(m + i1 - i2),
                                    std::abs(m - i1 + i2),
                                    std::abs(m - i1 - i2)};
        std::sort(cand.begin(), cand.end());
        const auto last = std::unique(cand.begin(), cand.end());
        for (auto it = cand.begin(); it != last; ++it) {
          const long i3 = *it;
          if (i3 < i2 || i3 > M) continue;
          const double value = coupling_coefficient(m, i1, i2, i3);
          if (value == 0.0) continue;
          entries.push_back({static_cast<std::uint32_t>(m),
                             static_cast<std::uint32_t>(i1),
                             static_cast<std::uint32_t>(i2),
                             static_cast<std::uint32_t>(i3), value});
        }
      }
    }
  }
  return CouplingTensor(modes, std::move(entries));
}

inline Vector eval_tensor(const CouplingTensor& tensor,
                          std::span<const double> q) {
  require(q.size() == tensor.modes(), "eval_tensor: length mismatch");
  Vector f(q.size());
  tensor.evaluate(q, f);
  return f;
}

// Independent route to f(q): synthesise xi = d/dx u on a grid, cube it, and
// project d/dx(xi^3) onto Phi_m after integrating by parts,
//   f_m = -int_0^1 xi^3 Phi_m' dx,
// with the composite trapezoid rule on n_points nodes.
inline Vector quadrature_oracle(std::size_t modes, std::span<const double> q,
                                std::size_t n_points) {
  require(n_points >= 1024, "quadrature oracle needs at least 1024 points");
  require(q.size() == modes, "quadrature oracle: length mismatch");
  const double pi = std::numbers::pi;
  const double h = 1.0 / static_cast<double>(n_points - 1);
  Vector xi_cubed(n_points);
  for (std::size_t j = 0; j < n_points; ++j) {
    const double x = static_cast<double>(j) * h;
    double xi = 0.0;
    for (std::size_t i = 0; i < modes; ++i) {
      const double n = static_cast<double>(i + 1);
      xi += n * std::cos(n * pi * x) * q[i];
    }
    xi *= std::numbers::sqrt2 * pi;
    xi_cubed[j] = xi * xi * xi;
  }
  Vector f(modes);
  for (std::size_t m = 0; m < modes; ++m) {
    const double n = static_cast<double>(m + 1);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_points; ++j) {
      const double w = (j == 0 || j + 1 == n_points) ? 0.5 : 1.0;
      acc += w * xi_cubed[j] * std::cos(n * pi * static_cast<double>(j) * h);
    }
    f[m] = -std::numbers::sqrt2 * n * pi * acc * h;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Closed-form one-dimensional nonlinearities for the oscillator.

enum class LumpedKind { kCubic, kSinh };

inline std::string to_string(LumpedKind kind) {
  return kind == LumpedKind::kCubic ? "cubic" : "sinh";
}

inline LumpedKind lumped_kind_from_string(const std::string& name) {
  if (name == "cubic") return LumpedKind::kCubic;
  if (name == "sinh" || name == "hyperbolic-sine") return LumpedKind::kSinh;
  throw InvalidArgument("unknown lumped nonlinearity: " + name);
}

struct LumpedNonlinearity {
  LumpedKind kind = LumpedKind::kCubic;

  double operator()(double q) const {
    return kind == LumpedKind::kCubic ? -q * q * q : -std::sinh(q);
  }

  // Applied componentwise.
  void evaluate(std::span<const double> q, std::span<double> f) const {
    require(q.size() == f.size(), "lumped nonlinearity: length mismatch");
    for (std::size_t i = 0; i < q.size(); ++i) f[i] = (*this)(q[i]);
  }
};

inline double eval_lumped(const LumpedNonlinearity& nl, double q) {
  return nl(q);
}

// ---------------------------------------------------------------------------
// Tensor dump: header {M, entry_count, convention}, then per entry four
// uint32 indices (m, i1, i2, i3; 1-based) and one float64 value.

inline constexpr const char* kTensorMagic = "MNTENSOR";
inline constexpr const char* kTensorConvention =
    "canonical-sorted-lower-indices/1-based/symmetric-value";

inline void save_tensor(const CouplingTensor& tensor,
                        const std::filesystem::path& path) {
  io::Bytes body;
  body.reserve(tensor.entries().size() * 24);
  for (const auto& e : tensor.entries()) {
    io::put_u32(body, e.m);
    io::put_u32(body, e.i1);
    io::put_u32(body, e.i2);
    io::put_u32(body, e.i3);
    io::put_f64(body, e.value);
  }
  nlohmann::json header = {{"M", tensor.modes()},
                           {"entry_count", tensor.entries().size()},
                           {"convention", kTensorConvention}};
  io::write_framed(path, kTensorMagic, header, body);
}

inline CouplingTensor load_tensor(const std::filesystem::path& path) {
  const auto framed = io::read_framed(path, kTensorMagic);
  const auto modes = framed.header.at("M").get<std::size_t>();
  const auto count = framed.header.at("entry_count").get<std::size_t>();
  if (framed.header.at("convention").get<std::string>() != kTensorConvention) {
    throw FormatError("unsupported tensor convention");
  }
  if (framed.body.size() != count * 24) throw FormatError("tensor body size");
  std::vector<TensorEntry> entries(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t off = n * 24;
    entries[n] = {io::get_u32(framed.body, off), io::get_u32(framed.body, off + 4),
                  io::get_u32(framed.body, off + 8),
                  io::get_u32(framed.body, off + 12),
                  io::get_f64(framed.body, off + 16)};
  }
  return CouplingTensor(modes, std::move(entries));
}

}  // namespace modalnode

#endif  // MODALNODE_NONLINEARITY_HPP_
