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

#ifndef MODALNODE_TRAINING_HPP_
#define MODALNODE_TRAINING_HPP_

// Teacher-forced training of f_theta by backpropagating through the
// Stormer-Verlet update ("discretise-then-optimise").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modalnode/dataset.hpp"
#include "modalnode/error.hpp"
#include "modalnode/excitation.hpp"
#include "modalnode/integrator.hpp"
#include "modalnode/neural.hpp"
#include "modalnode/parallel.hpp"

namespace modalnode {

// Loss reported for a segment whose rollout went non-finite.
inline constexpr double kDivergedLoss = 1e30;

// Steps [start, start + length] of trajectory `trajectory`: the state at
// `start` is the given initial condition, the following `length` states are
// targets. Excitation is indexed by absolute step.
struct Segment {
  std::size_t trajectory = 0;
  std::size_t start = 0;
  std::size_t length = 0;
};

inline std::size_t segment_samples(double segment_ms, double sample_rate) {
  return static_cast<std::size_t>(std::floor(segment_ms * sample_rate / 1000.0));
}

// Non-overlapping consecutive segments; the final one may be shorter.
inline std::vector<Segment> segment_dataset(
    std::span<const TrajectoryBundle> bundles, double segment_ms,
    double sample_rate) {
  require(!bundles.empty(), "segment_dataset: no trajectories");
  const std::size_t len = segment_samples(segment_ms, sample_rate);
  require(len >= 2, "segment length must be at least 2 samples");
  std::vector<Segment> out;
  for (std::size_t t = 0; t < bundles.size(); ++t) {
    const std::size_t last = bundles[t].steps() - 1;
    for (std::size_t start = 0; start < last; start += len) {
      out.push_back({t, start, std::min(len, last - start)});
    }
  }
  return out;
}

struct SegmentLoss {
  double loss = 0.0;
  bool diverged = false;
};

// Free rollout over one segment from its true initial state;
// loss = sum_n |y~^n - y^n|^2 / (2 M len) over the target steps.
template <ModalNonlinearity N>
SegmentLoss segment_loss(const N& nl, const Segment& seg,
                         const TrajectoryBundle& data,
                         const TrajectoryContext& ctx) {
  require(seg.length >= 1, "segment_loss: empty prediction horizon");
  require(seg.start + seg.length < data.steps(), "segment_loss: out of range");
  const std::size_t modes = data.modes();
  const auto& target = data.states;
  Vector q(target.q_at(seg.start).begin(), target.q_at(seg.start).end());
  Vector p(target.p_at(seg.start).begin(), target.p_at(seg.start).end());
  Vector f(modes);
  nl.evaluate(q, f);
  double sum = 0.0;
  for (std::size_t i = 0; i < seg.length; ++i) {
    const std::size_t n = seg.start + i;
    detail::verlet_advance(std::span<double>(q), std::span<double>(p),
                           std::span<double>(f), ctx.system, nl, data.forcing[n],
                           data.forcing[n + 1], ctx.phi_e, ctx.k);
    if (!detail::all_finite(q) || !detail::all_finite(p)) {
      return {kDivergedLoss, true};
    }
    const auto tq = target.q_at(n + 1);
    const auto tp = target.p_at(n + 1);
    for (std::size_t m = 0; m < modes; ++m) {
      const double dq = q[m] - tq[m];
      const double dp = p[m] - tp[m];
      sum += dq * dq + dp * dp;
    }
  }
  const double loss = sum / (2.0 * static_cast<double>(modes * seg.length));
  if (!std::isfinite(loss)) return {kDivergedLoss, true};
  return {loss, false};
}

// Reverse-mode gradient of scale * segment_loss with respect to the network
// parameters, added into grad (size = parameter count). Each f_theta call of
// the cached rollout is one backward site.
inline SegmentLoss segment_grad_accumulate(const MlpNetwork& net,
                                           const Segment& seg,
                                           const TrajectoryBundle& data,
                                           const TrajectoryContext& ctx,
                                           double scale, std::span<double> grad) {
  require(seg.length >= 1, "segment_grad: empty prediction horizon");
  require(seg.start + seg.length < data.steps(), "segment_grad: out of range");
  require(grad.size() == net.parameter_count(), "segment_grad: gradient size");
  const std::size_t modes = data.modes();
  const std::size_t len = seg.length;
  const auto& sys = ctx.system;
  const double k = ctx.k;
  const double half_k = 0.5 * k;
  const double g2 = sys.gamma * sys.gamma;
  const auto& target = data.states;

  // Forward, keeping q^n for n = 0..len and one tape per f_theta call.
  std::vector<MlpTape> tapes(len + 1);
  Vector qs((len + 1) * modes);
  Vector ps((len + 1) * modes);
  Vector q(target.q_at(seg.start).begin(), target.q_at(seg.start).end());
  Vector p(target.p_at(seg.start).begin(), target.p_at(seg.start).end());
  Vector f = mlp_forward(net, q, tapes[0]);
  std::copy(q.begin(), q.end(), qs.begin());
  double sum = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t n = seg.start + i;
    const double fe_n = data.forcing[n];
    const double fe_n1 = data.forcing[n + 1];
    for (std::size_t m = 0; m < modes; ++m) {
      const double w2 = sys.omega[m] * sys.omega[m];
      p[m] += half_k * (-2.0 * sys.damping[m] * p[m] - w2 * q[m] + g2 * f[m] +
                        ctx.phi_e[m] * fe_n);
      q[m] += k * p[m];
    }
    f = mlp_forward(net, q, tapes[i + 1]);
    for (std::size_t m = 0; m < modes; ++m) {
      const double w2 = sys.omega[m] * sys.omega[m];
      p[m] = (p[m] + half_k * (-w2 * q[m] + g2 * f[m] + ctx.phi_e[m] * fe_n1)) /
             (1.0 + k * sys.damping[m]);
    }
    if (!detail::all_finite(q) || !detail::all_finite(p)) {
      return {kDivergedLoss, true};
    }
    std::copy(q.begin(), q.end(), qs.begin() + (i + 1) * modes);
    std::copy(p.begin(), p.end(), ps.begin() + (i + 1) * modes);
    const auto tq = target.q_at(n + 1);
    const auto tp = target.p_at(n + 1);
    for (std::size_t m = 0; m < modes; ++m) {
      const double dq = q[m] - tq[m];
      const double dp = p[m] - tp[m];
      sum += dq * dq + dp * dp;
    }
  }
  const double norm = 1.0 / (2.0 * static_cast<double>(modes * len));
  const double loss = sum * norm;
  if (!std::isfinite(loss)) return {kDivergedLoss, true};

  // Backward. gq/gp/gf are adjoints of q^{n+1}, p^{n+1}, f(q^{n+1}).
  const double c = 2.0 * norm * scale;
  Vector gq(modes), gp(modes), gf(modes, 0.0), gph(modes), gin(modes);
  auto add_loss_terms = [&](std::size_t i) {  // state index i within segment
    const auto tq = target.q_at(seg.start + i);
    const auto tp = target.p_at(seg.start + i);
    for (std::size_t m = 0; m < modes; ++m) {
      gq[m] += c * (qs[i * modes + m] - tq[m]);
      gp[m] += c * (ps[i * modes + m] - tp[m]);
    }
  };
  std::fill(gq.begin(), gq.end(), 0.0);
  std::fill(gp.begin(), gp.end(), 0.0);
  add_loss_terms(len);
  for (std::size_t i = len; i-- > 0;) {
    // p^{i+1} = D [ph + k/2 (-Omega^2 q^{i+1} + g2 f^{i+1} + phi fe)]
    for (std::size_t m = 0; m < modes; ++m) {
      const double t = gp[m] / (1.0 + k * sys.damping[m]);
      gph[m] = t;
      gq[m] -= half_k * sys.omega[m] * sys.omega[m] * t;
      gf[m] += half_k * g2 * t;
    }
    // f^{i+1} has received all of its uses; push through the network.
    mlp_backward_accumulate(net, tapes[i + 1], gf, grad, gin);
    for (std::size_t m = 0; m < modes; ++m) gq[m] += gin[m];
    // q^{i+1} = q^i + k ph;  ph = (1 - kS) p^i + k/2 (-Omega^2 q^i + g2 f^i + ..)
    for (std::size_t m = 0; m < modes; ++m) {
      gph[m] += k * gq[m];
      gp[m] = (1.0 - k * sys.damping[m]) * gph[m];
      gq[m] -= half_k * sys.omega[m] * sys.omega[m] * gph[m];
      gf[m] = half_k * g2 * gph[m];
    }
    if (i > 0) add_loss_terms(i);
  }
  mlp_backward_accumulate(net, tapes[0], gf, grad, {});
  return {loss, false};
}

struct SegmentGradient {
  double loss = 0.0;
  bool diverged = false;
  Vector grad;
};

inline SegmentGradient segment_grad(const MlpNetwork& net, const Segment& seg,
                                    const TrajectoryBundle& data,
                                    const TrajectoryContext& ctx,
                                    double scale = 1.0) {
  SegmentGradient out{0.0, false, Vector(net.parameter_count(), 0.0)};
  const auto r = segment_grad_accumulate(net, seg, data, ctx, scale, out.grad);
  out.loss = r.loss;
  out.diverged = r.diverged;
  if (r.diverged) std::fill(out.grad.begin(), out.grad.end(), 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Epoch loop

struct TrainingConfig {
  double segment_ms = 1.0;
  std::size_t epochs = 5000;
  double learning_rate = 1e-3;
  double final_learning_rate = 0.0;  // 0 keeps learning_rate constant
  std::size_t batch_size = 32;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0 disables checkpoints
  std::filesystem::path checkpoint_dir;
  double divergence_tolerance = 0.5;  // abort if a larger fraction diverges
  std::size_t threads = 1;

  void validate() const {
    require(segment_ms > 0.0, "segment duration must be positive");
    require(epochs >= 1, "epochs must be at least 1");
    require(learning_rate > 0.0, "learning rate must be positive");
    require(final_learning_rate >= 0.0, "final learning rate must be non-negative");
    require(batch_size >= 1, "batch size must be at least 1");
    require(validation_fraction > 0.0 && validation_fraction < 1.0,
            "validation fraction must lie in (0, 1)");
    require(divergence_tolerance >= 0.0 && divergence_tolerance <= 1.0,
            "divergence tolerance must lie in [0, 1]");
    require(checkpoint_every == 0 || !checkpoint_dir.empty(),
            "checkpointing needs a directory");
  }
};

inline void to_json(nlohmann::json& j, const TrainingConfig& c) {
  j = {{"segment_ms", c.segment_ms},
       {"epochs", c.epochs},
       {"learning_rate", c.learning_rate},
       {"final_learning_rate", c.final_learning_rate},
       {"batch_size", c.batch_size},
       {"validation_fraction", c.validation_fraction},
       {"seed", c.seed},
       {"checkpoint_every", c.checkpoint_every},
       {"checkpoint_dir", c.checkpoint_dir.string()},
       {"divergence_tolerance", c.divergence_tolerance},
       {"threads", c.threads}};
}

inline void from_json(const nlohmann::json& j, TrainingConfig& c) {
  TrainingConfig d;
  c.segment_ms = j.value("segment_ms", d.segment_ms);
  c.epochs = j.value("epochs", d.epochs);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.final_learning_rate = j.value("final_learning_rate", d.final_learning_rate);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.validation_fraction = j.value("validation_fraction", d.validation_fraction);
  c.seed = j.value("seed", d.seed);
  c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
  c.checkpoint_dir = j.value("checkpoint_dir", std::string());
  c.divergence_tolerance = j.value("divergence_tolerance", d.divergence_tolerance);
  c.threads = j.value("threads", d.threads);
}

// Step size used during epoch `epoch` (1-based): geometric interpolation from
// learning_rate at the first epoch to final_learning_rate at the last.
inline double learning_rate_at(const TrainingConfig& c, std::size_t epoch) {
  if (c.final_learning_rate <= 0.0 || c.epochs <= 1) return c.learning_rate;
  const double t = static_cast<double>(std::clamp<std::size_t>(epoch, 1, c.epochs) - 1) /
                   static_cast<double>(c.epochs - 1);
  return c.learning_rate * std::pow(c.final_learning_rate / c.learning_rate, t);
}

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Trajectory-level split by seeded shuffle; both sides non-empty.
inline DataSplit split_trajectories(std::size_t count, double validation_fraction,
                                    std::uint64_t seed) {
  require(count >= 2, "need at least two trajectories to split");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(stream_seed(seed, 0x5e11));
  for (std::size_t i = count; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next() % i);
    std::swap(order[i - 1], order[j]);
  }
  auto n_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(count)));
  n_val = std::clamp<std::size_t>(n_val, 1, count - 1);
  DataSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_time = 0.0;  // seconds since training start
  std::size_t skipped_segments = 0;
};

inline void to_json(nlohmann::json& j, const EpochRecord& r) {
  j = {{"epoch", r.epoch},
       {"train_loss", r.train_loss},
       {"val_loss", r.val_loss},
       {"wall_time", r.wall_time},
       {"skipped_segments", r.skipped_segments}};
}

struct TrainingResult {
  MlpNetwork best;
  MlpNetwork last;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> log;
  DataSplit split;
  AdamState optimizer;
};

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct LossSummary {
  double mean = 0.0;
  std::size_t diverged = 0;
};

inline LossSummary mean_segment_loss(const MlpNetwork& net,
                                     std::span<const Segment> segments,
                                     std::span<const TrajectoryBundle> data,
                                     std::span<const TrajectoryContext> ctx,
                                     std::size_t threads) {
  std::vector<SegmentLoss> losses(segments.size());
  parallel_for(segments.size(), threads, [&](std::size_t i) {
    const auto& s = segments[i];
    losses[i] = segment_loss(net, s, data[s.trajectory], ctx[s.trajectory]);
  });
  LossSummary out;
  double sum = 0.0;
  for (const auto& l : losses) {
    sum += l.loss;
    out.diverged += l.diverged ? 1 : 0;
  }
  out.mean = segments.empty() ? 0.0 : sum / static_cast<double>(segments.size());
  return out;
}

}  // namespace detail

using EpochCallback = std::function<void(const EpochRecord&)>;

// Optimiser and shuffling state saved by checkpoints.
struct ResumeState {
  MlpNetwork net;
  MlpNetwork best;
  AdamState adam;
  std::string rng_state;
  std::size_t epoch = 0;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
};

inline ResumeState load_checkpoint(const std::filesystem::path& dir) {
  ResumeState s;
  nlohmann::json extra;
  s.net = load_model(dir / "checkpoint_model.bin");
  s.best = load_model(dir / "best_model.bin");
  s.adam = load_adam(dir / "checkpoint_adam.bin", &extra);
  s.epoch = extra.at("epoch").get<std::size_t>();
  s.rng_state = extra.at("rng_state").get<std::string>();
  s.best_epoch = extra.at("best_epoch").get<std::size_t>();
  s.best_val_loss = extra.at("best_val_loss").get<double>();
  return s;
}

// Epoch 0 records the losses of the initial network; epochs 1..E each make
// one pass of mini-batch Adam steps over the shuffled training segments.
// The returned `best` network minimises the validation loss over all logged
// epochs.
inline TrainingResult train(const TrainingConfig& config,
                            std::span<const TrajectoryBundle> data,
                            MlpNetwork net, const EpochCallback& on_epoch = {},
                            const ResumeState* resume = nullptr) {
  config.validate();
  require(data.size() >= 2, "training needs at least two trajectories");
  for (const auto& b : data) {
    require(b.modes() == net.inputs() && b.modes() == net.outputs(),
            "network dimension does not match dataset modes");
  }
  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_time)
        .count();
  };

  std::vector<TrajectoryContext> ctx;
  ctx.reserve(data.size());
  for (const auto& b : data) ctx.push_back(make_context(b));

  TrainingResult result;
  result.split = split_trajectories(data.size(), config.validation_fraction,
                                    config.seed);
  auto segments_of = [&](const std::vector<std::size_t>& ids) {
    std::vector<Segment> out;
    for (auto id : ids) {
      const auto segs = segment_dataset(data.subspan(id, 1), config.segment_ms,
                                        data[id].grid.sample_rate);
      for (auto s : segs) {
        s.trajectory = id;
        out.push_back(s);
      }
    }
    return out;
  };
  const auto train_segments = segments_of(result.split.train);
  const auto val_segments = segments_of(result.split.validation);

  AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  AdamState adam(net.parameter_count(), adam_cfg);
  Rng rng(stream_seed(config.seed, 0xba7c4));

  auto record_epoch = [&](EpochRecord rec) {
    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = rec.epoch;
      result.best = net;
    }
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
  };

  std::size_t first_epoch = 1;
  if (resume != nullptr) {
    require(resume->net.parameter_count() == net.parameter_count(),
            "checkpoint does not match the network shape");
    net = resume->net;
    adam = resume->adam;
    adam.config.learning_rate = config.learning_rate;
    std::istringstream(resume->rng_state) >> rng.engine();
    result.best = resume->best;
    result.best_epoch = resume->best_epoch;
    result.best_val_loss = resume->best_val_loss;
    first_epoch = resume->epoch + 1;
  } else {
    const auto tr = detail::mean_segment_loss(net, train_segments, data, ctx,
                                              config.threads);
    const auto va =
        detail::mean_segment_loss(net, val_segments, data, ctx, config.threads);
    record_epoch({0, tr.mean, va.mean, elapsed(), tr.diverged + va.diverged});
  }

  const std::size_t params = net.parameter_count();
  std::vector<std::size_t> order(train_segments.size());
  std::vector<SegmentGradient> batch_grads;
  Vector grad(params);

  for (std::size_t epoch = first_epoch; epoch <= config.epochs; ++epoch) {
    adam.config.learning_rate = learning_rate_at(config, epoch);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next() % i);
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    std::size_t skipped = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += config.batch_size) {
      const std::size_t b1 = std::min(order.size(), b0 + config.batch_size);
      batch_grads.resize(b1 - b0);
      parallel_for(b1 - b0, config.threads, [&](std::size_t i) {
        const auto& s = train_segments[order[b0 + i]];
        auto& g = batch_grads[i];
        g.grad.assign(params, 0.0);
        const auto r = segment_grad_accumulate(net, s, data[s.trajectory],
                                               ctx[s.trajectory], 1.0, g.grad);
        g.loss = r.loss;
        g.diverged = r.diverged;
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      std::size_t used = 0;
      for (const auto& g : batch_grads) {  // fixed reduction order
        if (g.diverged) {
          ++skipped;
          continue;
        }
        ++used;
        loss_sum += g.loss;
        for (std::size_t i = 0; i < params; ++i) grad[i] += g.grad[i];
      }
      if (used == 0) continue;
      const double inv = 1.0 / static_cast<double>(used);
      for (double& g : grad) g *= inv;
      loss_count += used;
      adam_step(adam, net.params(), grad);
    }
    if (static_cast<double>(skipped) >
        config.divergence_tolerance * static_cast<double>(order.size())) {
      std::ostringstream os;
      os << "training aborted at epoch " << epoch << ": " << skipped << " of "
         << order.size() << " segments diverged";
      throw TrainingAborted(os.str());
    }
    const auto va =
        detail::mean_segment_loss(net, val_segments, data, ctx, config.threads);
    const double train_loss =
        loss_count ? loss_sum / static_cast<double>(loss_count) : kDivergedLoss;
    record_epoch({epoch, train_loss, va.mean, elapsed(), skipped + va.diverged});

    if (config.checkpoint_every != 0 && epoch % config.checkpoint_every == 0) {
      std::filesystem::create_directories(config.checkpoint_dir);
      std::ostringstream rng_state;
      rng_state << rng.engine();
      save_model(net, config.checkpoint_dir / "checkpoint_model.bin");
      save_adam(adam, config.checkpoint_dir / "checkpoint_adam.bin",
                {{"epoch", epoch},
                 {"rng_state", rng_state.str()},
                 {"best_epoch", result.best_epoch},
                 {"best_val_loss", result.best_val_loss}});
      save_model(result.best, config.checkpoint_dir / "best_model.bin");
    }
  }
  result.last = std::move(net);
  result.optimizer = std::move(adam);
  return result;
}

}  // namespace modalnode

#endif  // MODALNODE_TRAINING_HPP_
