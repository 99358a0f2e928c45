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

#ifndef MODALNODE_NEURAL_HPP_
#define MODALNODE_NEURAL_HPP_

// Multilayer perceptron f_theta : R^M -> R^M with Leaky ReLU hidden layers,
// a linear output layer, hand-written reverse mode, and Adam.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "modalnode/binary_io.hpp"
#include "modalnode/error.hpp"
#include "modalnode/excitation.hpp"
#include "modalnode/modal_core.hpp"

namespace modalnode {

inline constexpr double kDefaultLeakySlope = 0.01;

// Parameters are stored flat, layer by layer: weight matrix (out x in,
// row-major) followed by the bias vector.
class MlpNetwork {
 public:
  MlpNetwork() = default;

  MlpNetwork(std::vector<std::size_t> dims, double alpha, std::uint64_t seed = 0)
      : dims_(std::move(dims)), alpha_(alpha), seed_(seed) {
    require(dims_.size() >= 2, "network needs at least one layer");
    for (auto d : dims_) require(d >= 1, "layer dimensions must be positive");
    require(std::isfinite(alpha_), "leaky slope must be finite");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      offsets_.push_back(offset);
      offset += dims_[l] * dims_[l + 1] + dims_[l + 1];
    }
    params_.assign(offset, 0.0);
  }

  std::size_t layers() const { return dims_.size() - 1; }
  std::size_t inputs() const { return dims_.front(); }
  std::size_t outputs() const { return dims_.back(); }
  std::size_t hidden_layers() const { return dims_.size() - 2; }
  std::size_t width() const { return dims_.size() > 2 ? dims_[1] : 0; }
  std::span<const std::size_t> dims() const { return dims_; }
  double alpha() const { return alpha_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }

  std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
  std::size_t bias_offset(std::size_t l) const {
    return offsets_[l] + dims_[l] * dims_[l + 1];
  }
  std::span<const double> weight(std::size_t l) const {
    return params().subspan(weight_offset(l), dims_[l] * dims_[l + 1]);
  }
  std::span<double> weight(std::size_t l) {
    return params().subspan(weight_offset(l), dims_[l] * dims_[l + 1]);
  }
  std::span<const double> bias(std::size_t l) const {
    return params().subspan(bias_offset(l), dims_[l + 1]);
  }
  std::span<double> bias(std::size_t l) {
    return params().subspan(bias_offset(l), dims_[l + 1]);
  }

  double activate(double z) const { return z >= 0.0 ? z : alpha_ * z; }
  // Subgradient at exactly zero is 1.
  double activation_slope(double z) const { return z >= 0.0 ? 1.0 : alpha_; }

  void evaluate(std::span<const double> q, std::span<double> f) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  double alpha_ = kDefaultLeakySlope;
  std::uint64_t seed_ = 0;
  Vector params_;
};

// Square stack: M -> W (x H) -> M.
inline std::vector<std::size_t> mlp_dims(std::size_t modes, std::size_t hidden,
                                         std::size_t width) {
  std::vector<std::size_t> dims{modes};
  for (std::size_t h = 0; h < hidden; ++h) dims.push_back(width);
  dims.push_back(modes);
  return dims;
}

// Kaiming (fan-in) uniform weights for Leaky ReLU, zero biases.
inline MlpNetwork mlp_init(std::size_t modes, std::size_t hidden,
                           std::size_t width, double alpha, std::uint64_t seed) {
  require(modes >= 1, "mode count must be at least 1");
  require(hidden >= 1 && width >= 1, "need H >= 1 hidden layers of width >= 1");
  MlpNetwork net(mlp_dims(modes, hidden, width), alpha, seed);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const double fan_in = static_cast<double>(net.dims()[l]);
    const double bound = std::sqrt(6.0 / ((1.0 + alpha * alpha) * fan_in));
    for (double& w : net.weight(l)) w = rng.uniform(-bound, bound);
  }
  return net;
}

// Per-layer inputs (after activation) and hidden pre-activations.
struct MlpTape {
  std::vector<Vector> inputs;
  std::vector<Vector> pre;
};

namespace detail {

inline void affine(std::span<const double> weight, std::span<const double> bias,
                   std::span<const double> in, std::span<double> out) {
  const std::size_t n_in = in.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    const double* row = weight.data() + o * n_in;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[o] = acc + bias[o];
  }
}

}  // namespace detail

inline void MlpNetwork::evaluate(std::span<const double> q,
                                 std::span<double> f) const {
  require(q.size() == inputs() && f.size() == outputs(),
          "mlp: dimension mismatch");
  Vector a(q.begin(), q.end());
  Vector z;
  for (std::size_t l = 0; l < layers(); ++l) {
    z.resize(dims_[l + 1]);
    detail::affine(weight(l), bias(l), a, z);
    if (l + 1 < layers()) {
      for (double& v : z) v = activate(v);
    }
    a.swap(z);
  }
  std::copy(a.begin(), a.end(), f.begin());
}

inline Vector mlp_forward(const MlpNetwork& net, std::span<const double> q,
                          MlpTape& tape) {
  require(q.size() == net.inputs(), "mlp_forward: dimension mismatch");
  const std::size_t layers = net.layers();
  tape.inputs.resize(layers);
  tape.pre.resize(layers - 1);
  tape.inputs[0].assign(q.begin(), q.end());
  Vector out(net.outputs());
  for (std::size_t l = 0; l < layers; ++l) {
    if (l + 1 < layers) {
      auto& z = tape.pre[l];
      z.resize(net.dims()[l + 1]);
      detail::affine(net.weight(l), net.bias(l), tape.inputs[l], z);
      auto& next = tape.inputs[l + 1];
      next.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) next[i] = net.activate(z[i]);
    } else {
      detail::affine(net.weight(l), net.bias(l), tape.inputs[l], out);
    }
  }
  return out;
}

// Adds d<grad_out, f(q)>/d(theta) into grad_params and writes d/dq into
// grad_input (may be empty to skip it).
inline void mlp_backward_accumulate(const MlpNetwork& net, const MlpTape& tape,
                                    std::span<const double> grad_out,
                                    std::span<double> grad_params,
                                    std::span<double> grad_input) {
  const std::size_t layers = net.layers();
  require(tape.inputs.size() == layers && tape.pre.size() + 1 == layers,
          "mlp_backward: tape does not match network");
  require(grad_out.size() == net.outputs(), "mlp_backward: grad_out size");
  require(grad_params.size() == net.parameter_count(),
          "mlp_backward: grad_params size");
  Vector delta(grad_out.begin(), grad_out.end());
  Vector upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const auto& in = tape.inputs[l];
    const std::size_t n_in = in.size();
    const std::size_t n_out = delta.size();
    require(n_in == net.dims()[l], "mlp_backward: tape shape mismatch");
    const auto w = net.weight(l);
    double* gw = grad_params.data() + net.weight_offset(l);
    double* gb = grad_params.data() + net.bias_offset(l);
    const bool need_upstream = l > 0 || !grad_input.empty();
    upstream.assign(need_upstream ? n_in : 0, 0.0);
    for (std::size_t o = 0; o < n_out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* gw_row = gw + o * n_in;
      const double* w_row = w.data() + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) gw_row[i] += d * in[i];
      if (need_upstream) {
        for (std::size_t i = 0; i < n_in; ++i) upstream[i] += w_row[i] * d;
      }
    }
    if (l > 0) {
      const auto& z = tape.pre[l - 1];
      for (std::size_t i = 0; i < n_in; ++i) {
        upstream[i] *= net.activation_slope(z[i]);
      }
      delta.swap(upstream);
    } else if (!grad_input.empty()) {
      require(grad_input.size() == n_in, "mlp_backward: grad_input size");
      std::copy(upstream.begin(), upstream.end(), grad_input.begin());
    }
  }
}

struct MlpGradients {
  Vector params;
  Vector input;
};

inline MlpGradients mlp_backward(const MlpNetwork& net, const MlpTape& tape,
                                 std::span<const double> grad_out) {
  MlpGradients g{Vector(net.parameter_count(), 0.0), Vector(net.inputs(), 0.0)};
  mlp_backward_accumulate(net, tape, grad_out, g.params, g.input);
  return g;
}

// Multiplications plus additions for one forward pass with naive
// matrix-vector products: each output of a layer costs `in` multiplies,
// `in - 1` accumulating adds and one bias add (2 * in * out per layer), and
// each hidden Leaky ReLU unit costs one comparison and one multiply.
inline std::size_t count_mlp_ops(std::span<const std::size_t> dims) {
  require(dims.size() >= 2, "need at least one layer");
  std::size_t ops = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    ops += 2 * dims[l] * dims[l + 1];
    if (l + 2 < dims.size()) ops += 2 * dims[l + 1];
  }
  return ops;
}

inline std::size_t count_mlp_ops(const MlpNetwork& net) {
  return count_mlp_ops(net.dims());
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  Vector m;
  Vector v;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(std::size_t size, AdamConfig cfg = {})
      : config(cfg), m(size, 0.0), v(size, 0.0) {}
};

inline void adam_step(AdamState& state, std::span<double> params,
                      std::span<const double> grads) {
  require(params.size() == state.m.size() && grads.size() == params.size(),
          "adam_step: shape mismatch");
  for (double g : grads) {
    if (!std::isfinite(g)) throw InvalidArgument("adam_step: non-finite gradient");
  }
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

// ---------------------------------------------------------------------------
// Model file: header {version, M, H, W, alpha, seed, dims, layout}, body is
// every parameter as float64 little-endian in the flat layer order above.

inline constexpr const char* kModelMagic = "MNMODEL";
inline constexpr int kModelVersion = 1;

inline void save_model(const MlpNetwork& net, const std::filesystem::path& path) {
  nlohmann::json header = {
      {"version", kModelVersion},
      {"M", net.inputs()},
      {"H", net.hidden_layers()},
      {"W", net.width()},
      {"alpha", net.alpha()},
      {"seed", net.seed()},
      {"dims", std::vector<std::size_t>(net.dims().begin(), net.dims().end())},
      {"parameter_count", net.parameter_count()},
      {"layout", "per layer: weight (out x in, row-major), then bias"}};
  io::Bytes body;
  io::put_f64s(body, net.params());
  io::write_framed(path, kModelMagic, header, body);
}

inline MlpNetwork load_model(const std::filesystem::path& path) {
  const auto framed = io::read_framed(path, kModelMagic);
  const auto& h = framed.header;
  if (h.at("version").get<int>() != kModelVersion) {
    throw FormatError("unsupported model version");
  }
  const auto dims = h.at("dims").get<std::vector<std::size_t>>();
  const auto modes = h.at("M").get<std::size_t>();
  const auto hidden = h.at("H").get<std::size_t>();
  const auto width = h.at("W").get<std::size_t>();
  if (dims.size() != hidden + 2 || dims.front() != modes ||
      dims.back() != modes) {
    throw FormatError("model dimension chain is inconsistent");
  }
  for (std::size_t l = 1; l + 1 < dims.size(); ++l) {
    if (dims[l] != width) throw FormatError("model hidden width mismatch");
  }
  MlpNetwork net(dims, h.at("alpha").get<double>(),
                 h.at("seed").get<std::uint64_t>());
  if (framed.body.size() != net.parameter_count() * sizeof(double)) {
    throw FormatError("model body size does not match dimensions");
  }
  const auto values = io::get_f64s(framed.body, 0, net.parameter_count());
  std::copy(values.begin(), values.end(), net.params().begin());
  return net;
}

inline constexpr const char* kAdamMagic = "MNADAM";

inline void save_adam(const AdamState& state, const std::filesystem::path& path,
                      const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json header = {{"version", 1},
                           {"size", state.m.size()},
                           {"step", state.step},
                           {"learning_rate", state.config.learning_rate},
                           {"beta1", state.config.beta1},
                           {"beta2", state.config.beta2},
                           {"epsilon", state.config.epsilon},
                           {"extra", extra}};
  io::Bytes body;
  io::put_f64s(body, state.m);
  io::put_f64s(body, state.v);
  io::write_framed(path, kAdamMagic, header, body);
}

inline AdamState load_adam(const std::filesystem::path& path,
                           nlohmann::json* extra = nullptr) {
  const auto framed = io::read_framed(path, kAdamMagic);
  const auto& h = framed.header;
  const auto size = h.at("size").get<std::size_t>();
  AdamConfig cfg{h.at("learning_rate").get<double>(), h.at("beta1").get<double>(),
                 h.at("beta2").get<double>(), h.at("epsilon").get<double>()};
  AdamState state(size, cfg);
  state.step = h.at("step").get<std::uint64_t>();
  if (framed.body.size() != 2 * size * sizeof(double)) {
    throw FormatError("optimiser state body size mismatch");
  }
  state.m = io::get_f64s(framed.body, 0, size);
  state.v = io::get_f64s(framed.body, size * sizeof(double), size);
  if (extra != nullptr) *extra = h.value("extra", nlohmann::json::object());
  return state;
}

}  // namespace modalnode

#endif  // MODALNODE_NEURAL_HPP_
