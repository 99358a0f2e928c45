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

#ifndef MODALNODE_DATASET_HPP_
#define MODALNODE_DATASET_HPP_

// Ground-truth trajectory generation and the on-disk dataset layout:
//
//   <dir>/manifest.json
//   <dir>/traj_0000.bin, traj_0001.bin, ...
//
// Each bundle file is a framed container (see binary_io.hpp) whose header
// holds every parameter, the array shapes and byte offsets, and a CRC-32 of
// the body. The body is float64 little-endian: q (steps x modes, row-major),
// p (same shape), w (steps), forcing (steps).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modalnode/binary_io.hpp"
#include "modalnode/error.hpp"
#include "modalnode/excitation.hpp"
#include "modalnode/integrator.hpp"
#include "modalnode/modal_core.hpp"
#include "modalnode/nonlinearity.hpp"
#include "modalnode/parallel.hpp"

namespace modalnode {

inline constexpr int kBundleVersion = 1;
inline constexpr int kManifestVersion = 1;
inline constexpr const char* kBundleMagic = "MNBUNDLE";

enum class SystemKind { kString, kOscillator };

inline std::string to_string(SystemKind kind) {
  return kind == SystemKind::kString ? "string" : "oscillator";
}

inline SystemKind system_kind_from_string(const std::string& name) {
  if (name == "string") return SystemKind::kString;
  if (name == "oscillator") return SystemKind::kOscillator;
  throw InvalidArgument("unknown system kind: " + name);
}

// Continuous-time description of one simulated system. For the oscillator
// the single mode has Omega = omega0, no damping, and forcing/readout enter
// without a mode-shape factor.
struct SystemSpec {
  SystemKind kind = SystemKind::kString;
  std::size_t modes = 1;
  ScaledStringParams scaled{1.0};
  double omega0 = 0.0;
};

inline ModalSystem make_system(const SystemSpec& spec) {
  if (spec.kind == SystemKind::kOscillator) {
    require(spec.omega0 > 0.0, "oscillator omega0 must be positive");
    ModalSystem sys;
    sys.omega = {spec.omega0};
    sys.damping = {0.0};
    sys.gamma = spec.scaled.gamma;
    return sys;
  }
  return build_modal_system(spec.scaled, spec.modes);
}

inline Vector excitation_shape(const SystemSpec& spec, double x_e) {
  if (spec.kind == SystemKind::kOscillator) return Vector{1.0};
  return mode_shape_vector(x_e, spec.modes);
}

inline Vector output_shape(const SystemSpec& spec, double x_o) {
  if (spec.kind == SystemKind::kOscillator) return Vector{1.0};
  return mode_shape_vector(x_o, spec.modes);
}

struct BundleMetadata {
  std::string dataset;
  std::string nonlinearity;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  int convention_version = kBundleVersion;
};

struct TrajectoryBundle {
  SystemSpec system;
  PluckParams pluck{1.0, 1e-3, 0.5};
  double x_o = 0.5;
  SimulationGrid grid;
  Trajectory states;
  Vector output;   // w[n] = Phi(x_o) . q[n]
  Vector forcing;  // fe[n] = pluck(n / fs)
  BundleMetadata meta;

  std::size_t modes() const { return states.modes; }
  std::size_t steps() const { return states.steps; }
};

// Everything a rollout needs besides the nonlinearity.
struct TrajectoryContext {
  ModalSystem system;
  Vector phi_e;
  Vector phi_o;
  double k = 0.0;
};

inline TrajectoryContext make_context(const TrajectoryBundle& b) {
  return {make_system(b.system), excitation_shape(b.system, b.pluck.position),
          output_shape(b.system, b.x_o), b.grid.step()};
}

inline Vector output_series(const Trajectory& traj, std::span<const double> phi_o) {
  Vector w(traj.steps);
  for (std::size_t n = 0; n < traj.steps; ++n) w[n] = readout(traj.q_at(n), phi_o);
  return w;
}

// Rolls out from rest with the given nonlinearity.
template <ModalNonlinearity N>
TrajectoryBundle simulate_bundle(const SystemSpec& spec, const PluckParams& pluck,
                                 double x_o, const SimulationGrid& grid,
                                 const N& nl, BundleMetadata meta = {},
                                 RolloutOptions options = {}) {
  TrajectoryBundle b;
  b.system = spec;
  b.pluck = pluck;
  b.x_o = x_o;
  b.grid = grid;
  b.meta = std::move(meta);
  const auto ctx = make_context(b);
  b.forcing = sample_pluck_sequence(pluck, grid.sample_rate, grid.steps);
  b.states = rollout(State(spec.modes), ctx.system, nl, b.forcing, ctx.phi_e,
                     grid, options);
  b.output = output_series(b.states, ctx.phi_o);
  return b;
}

// ---------------------------------------------------------------------------
// Bundle persistence

namespace detail {

inline nlohmann::json system_to_json(const SystemSpec& s) {
  return {{"kind", to_string(s.kind)},   {"modes", s.modes},
          {"gamma", s.scaled.gamma},     {"kappa", s.scaled.kappa},
          {"sigma0", s.scaled.sigma0},   {"sigma1", s.scaled.sigma1},
          {"omega0", s.omega0}};
}

inline SystemSpec system_from_json(const nlohmann::json& j) {
  SystemSpec s;
  s.kind = system_kind_from_string(j.at("kind").get<std::string>());
  s.modes = j.at("modes").get<std::size_t>();
  s.scaled.gamma = j.at("gamma").get<double>();
  s.scaled.kappa = j.at("kappa").get<double>();
  s.scaled.sigma0 = j.at("sigma0").get<double>();
  s.scaled.sigma1 = j.at("sigma1").get<double>();
  s.omega0 = j.at("omega0").get<double>();
  return s;
}

}  // namespace detail

inline void save_bundle(const TrajectoryBundle& b,
                        const std::filesystem::path& path) {
  const std::size_t steps = b.steps();
  const std::size_t modes = b.modes();
  require(b.states.q.size() == steps * modes && b.states.p.size() == steps * modes &&
              b.output.size() == steps && b.forcing.size() == steps,
          "save_bundle: inconsistent array sizes");
  io::Bytes body;
  body.reserve((2 * steps * modes + 2 * steps) * sizeof(double));
  io::put_f64s(body, b.states.q);
  io::put_f64s(body, b.states.p);
  io::put_f64s(body, b.output);
  io::put_f64s(body, b.forcing);
  const std::size_t state_bytes = steps * modes * sizeof(double);
  const std::size_t series_bytes = steps * sizeof(double);
  nlohmann::json header = {
      {"version", kBundleVersion},
      {"system", detail::system_to_json(b.system)},
      {"pluck",
       {{"f_amp", b.pluck.amplitude},
        {"t_e", b.pluck.duration},
        {"x_e", b.pluck.position}}},
      {"x_o", b.x_o},
      {"sample_rate", b.grid.sample_rate},
      {"steps", steps},
      {"modes", modes},
      {"layout",
       {{"q", {{"offset", 0}, {"shape", {steps, modes}}}},
        {"p", {{"offset", state_bytes}, {"shape", {steps, modes}}}},
        {"w", {{"offset", 2 * state_bytes}, {"shape", {steps}}}},
        {"forcing",
         {{"offset", 2 * state_bytes + series_bytes}, {"shape", {steps}}}}}},
      {"body_bytes", body.size()},
      {"crc32", io::crc32(body)},
      {"meta",
       {{"dataset", b.meta.dataset},
        {"nonlinearity", b.meta.nonlinearity},
        {"seed", b.meta.seed},
        {"index", b.meta.index},
        {"convention_version", b.meta.convention_version}}}};
  io::write_framed(path, kBundleMagic, header, body);
}

inline TrajectoryBundle load_bundle(const std::filesystem::path& path) {
  const auto framed = io::read_framed(path, kBundleMagic);
  const auto& h = framed.header;
  try {
    if (h.at("version").get<int>() != kBundleVersion) {
      throw FormatError("bundle version mismatch in " + path.string());
    }
    if (framed.body.size() != h.at("body_bytes").get<std::size_t>()) {
      throw FormatError("bundle body length mismatch (truncated?) in " +
                        path.string());
    }
    if (io::crc32(framed.body) != h.at("crc32").get<std::uint32_t>()) {
      throw FormatError("bundle checksum mismatch in " + path.string());
    }
    TrajectoryBundle b;
    b.system = detail::system_from_json(h.at("system"));
    const auto& pl = h.at("pluck");
    b.pluck = {pl.at("f_amp").get<double>(), pl.at("t_e").get<double>(),
               pl.at("x_e").get<double>()};
    b.x_o = h.at("x_o").get<double>();
    const auto steps = h.at("steps").get<std::size_t>();
    const auto modes = h.at("modes").get<std::size_t>();
    if (modes != b.system.modes) throw FormatError("bundle mode count mismatch");
    b.grid = {h.at("sample_rate").get<double>(), steps};
    const auto& layout = h.at("layout");
    b.states.modes = modes;
    b.states.steps = steps;
    b.states.q = io::get_f64s(framed.body,
                              layout.at("q").at("offset").get<std::size_t>(),
                              steps * modes);
    b.states.p = io::get_f64s(framed.body,
                              layout.at("p").at("offset").get<std::size_t>(),
                              steps * modes);
    b.output = io::get_f64s(framed.body,
                            layout.at("w").at("offset").get<std::size_t>(), steps);
    b.forcing = io::get_f64s(
        framed.body, layout.at("forcing").at("offset").get<std::size_t>(), steps);
    const auto& m = h.at("meta");
    b.meta = {m.at("dataset").get<std::string>(),
              m.at("nonlinearity").get<std::string>(),
              m.at("seed").get<std::uint64_t>(), m.at("index").get<std::uint64_t>(),
              m.at("convention_version").get<int>()};
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed bundle header: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Dataset specifications and named profiles

struct DatasetSpec {
  std::string name = "custom";
  SystemKind kind = SystemKind::kString;
  std::size_t modes = 100;
  ParameterRanges ranges;
  double omega0 = 0.0;                    // oscillator only
  LumpedKind lumped = LumpedKind::kCubic;  // oscillator only

  std::string nonlinearity_name() const {
    return kind == SystemKind::kString ? "tensor" : to_string(lumped);
  }

  void validate() const {
    ranges.validate();
    if (kind == SystemKind::kString) {
      require(modes >= 1, "mode count must be at least 1");
    } else {
      require(modes == 1, "oscillator datasets have exactly one mode");
      require(omega0 > 0.0, "oscillator omega0 must be positive");
    }
  }

  // Largest Omega the ranges can produce.
  double max_omega() const {
    if (kind == SystemKind::kOscillator) return omega0;
    ScaledStringParams s{ranges.gamma.hi, ranges.kappa.hi, ranges.sigma0,
                         ranges.sigma1};
    return build_modal_system(s, modes).max_omega();
  }

  SystemSpec system_for(const TrajectoryDraw& d) const {
    SystemSpec s;
    s.kind = kind;
    s.modes = modes;
    s.scaled = d.scaled;
    s.omega0 = omega0;
    return s;
  }
};

inline void to_json(nlohmann::json& j, const DatasetSpec& s) {
  j = {{"name", s.name},
       {"system", to_string(s.kind)},
       {"modes", s.modes},
       {"ranges", s.ranges},
       {"omega0", s.omega0},
       {"nonlinearity", s.nonlinearity_name()}};
}

inline void from_json(const nlohmann::json& j, DatasetSpec& s) {
  s.name = j.value("name", std::string("custom"));
  s.kind = system_kind_from_string(j.value("system", std::string("string")));
  s.modes = j.value("modes", s.kind == SystemKind::kString ? 100 : 1);
  s.ranges = j.value("ranges", ParameterRanges{});
  s.omega0 = j.value("omega0", 0.0);
  const auto nl = j.value("nonlinearity", std::string("tensor"));
  if (s.kind == SystemKind::kOscillator) s.lumped = lumped_kind_from_string(nl);
  s.validate();
}

inline std::vector<std::string> profile_names() {
  return {"paper-train",       "paper-test",         "desk-train",
          "desk-test",         "desk-test-96k",      "oscillator-cubic",
          "oscillator-sinh",   "oscillator-desk-cubic", "oscillator-desk-sinh"};
}

// Oscillator excitation: the raised-cosine family with amplitudes large
// enough to drive |q| well past 1, where -q^3 and -sinh(q) separate.
inline ParameterRanges oscillator_ranges() {
  ParameterRanges r;
  r.gamma = Interval::point(110.0);
  r.kappa = Interval::point(0.0);
  r.sigma0 = 0.0;
  r.sigma1 = 0.0;
  r.x_e = Interval::point(0.5);
  r.x_o = Interval::point(0.5);
  r.f_amp = {1.0e6, 2.5e6};
  r.t_e = {0.5e-3, 1.5e-3};
  r.sample_rate = 44100.0;
  r.duration = 1.0;
  r.trajectories = 60;
  return r;
}

inline DatasetSpec dataset_profile(const std::string& name) {
  DatasetSpec s;
  s.name = name;
  if (name == "paper-train") {
    s.modes = 100;  // ranges default to the training column
  } else if (name == "paper-test") {
    s.modes = 100;
    s.ranges.gamma = {130.0, 246.0};
    s.ranges.kappa = {1.01, 1.1};
    s.ranges.sigma0 = 2.0;
    s.ranges.sample_rate = 96000.0;
    s.ranges.duration = 3.0;
    s.ranges.seed = 1;
  } else if (name == "desk-train" || name == "desk-test" ||
             name == "desk-test-96k") {
    s.modes = 16;
    s.ranges.duration = 0.25;
    s.ranges.trajectories = 8;
    if (name != "desk-train") {
      s.ranges.trajectories = 4;
      s.ranges.seed = 1001;
    }
    if (name == "desk-test-96k") s.ranges.sample_rate = 96000.0;
  } else if (name.rfind("oscillator-", 0) == 0) {
    s.kind = SystemKind::kOscillator;
    s.modes = 1;
    s.omega0 = 400.0;
    s.ranges = oscillator_ranges();
    const bool desk = name.find("-desk-") != std::string::npos;
    if (desk) {
      s.ranges.duration = 0.25;
      s.ranges.trajectories = 12;
    }
    const std::string tail = name.substr(name.rfind('-') + 1);
    s.lumped = lumped_kind_from_string(tail);
    require((desk && (name == "oscillator-desk-cubic" ||
                      name == "oscillator-desk-sinh")) ||
                (!desk && (name == "oscillator-cubic" || name == "oscillator-sinh")),
            "unknown profile: " + name);
  } else {
    throw InvalidArgument("unknown profile: " + name);
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Generation

// Ground-truth nonlinearity of a dataset spec, type-erased over the two kinds.
class GroundTruth {
 public:
  explicit GroundTruth(const DatasetSpec& spec) {
    if (spec.kind == SystemKind::kString) {
      tensor_.emplace(build_tensor(spec.modes));
    } else {
      lumped_ = LumpedNonlinearity{spec.lumped};
    }
  }
  void evaluate(std::span<const double> q, std::span<double> f) const {
    if (tensor_) {
      tensor_->evaluate(q, f);
    } else {
      lumped_.evaluate(q, f);
    }
  }

 private:
  std::optional<CouplingTensor> tensor_;
  LumpedNonlinearity lumped_;
};

template <ModalNonlinearity N>
TrajectoryBundle generate_bundle(const DatasetSpec& spec, std::uint64_t index,
                                 const N& nl, const std::string& nl_name) {
  const auto draw = draw_trajectory_params(spec.ranges, index);
  const SimulationGrid grid{spec.ranges.sample_rate, spec.ranges.steps()};
  BundleMetadata meta{spec.name, nl_name, spec.ranges.seed, index, kBundleVersion};
  return simulate_bundle(spec.system_for(draw), draw.pluck, draw.x_o, grid, nl,
                         std::move(meta));
}

inline void check_dataset_stability(const DatasetSpec& spec) {
  ModalSystem worst;
  worst.omega = {spec.max_omega()};
  const auto report = check_stability(worst, 1.0 / spec.ranges.sample_rate);
  if (!report.stable) {
    throw StabilityError("dataset '" + spec.name +
                         "' violates the Verlet bound: k*Omega_max/2 = " +
                         std::to_string(report.margin));
  }
}

// All trajectories in memory, in index order. Divergent trajectories raise.
template <ModalNonlinearity N>
std::vector<TrajectoryBundle> generate_bundles(const DatasetSpec& spec, const N& nl,
                                               const std::string& nl_name,
                                               std::size_t threads = 1) {
  spec.validate();
  check_dataset_stability(spec);
  std::vector<TrajectoryBundle> out(spec.ranges.trajectories);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = generate_bundle(spec, i, nl, nl_name);
  });
  return out;
}

inline std::vector<TrajectoryBundle> generate_bundles(const DatasetSpec& spec,
                                                      std::size_t threads = 1) {
  const GroundTruth truth(spec);
  return generate_bundles(spec, truth, spec.nonlinearity_name(), threads);
}

inline std::string trajectory_file_name(std::size_t index) {
  std::ostringstream os;
  os << "traj_" << std::setw(4) << std::setfill('0') << index << ".bin";
  return os.str();
}

struct GenerationResult {
  nlohmann::json manifest;
  std::vector<std::string> errors;
};

// Writes manifest.json and one bundle per trajectory. A diverging trajectory
// is logged in the manifest and skipped; the rest are still written.
inline GenerationResult generate_dataset(
    const DatasetSpec& spec, const std::filesystem::path& out_dir,
    std::size_t threads = 1,
    const std::function<void(std::size_t)>& on_done = {}) {
  spec.validate();
  check_dataset_stability(spec);
  std::filesystem::create_directories(out_dir);
  const GroundTruth truth(spec);
  const std::size_t count = spec.ranges.trajectories;
  std::vector<nlohmann::json> entries(count);
  std::vector<std::string> errors(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const auto draw = draw_trajectory_params(spec.ranges, i);
    nlohmann::json entry = {{"index", i},
                            {"stream_seed", stream_seed(spec.ranges.seed, i)},
                            {"gamma", draw.scaled.gamma},
                            {"kappa", draw.scaled.kappa},
                            {"x_e", draw.pluck.position},
                            {"x_o", draw.x_o},
                            {"f_amp", draw.pluck.amplitude},
                            {"t_e", draw.pluck.duration}};
    try {
      const auto bundle = generate_bundle(spec, i, truth, spec.nonlinearity_name());
      const auto file = trajectory_file_name(i);
      save_bundle(bundle, out_dir / file);
      entry["file"] = file;
    } catch (const DivergenceError& e) {
      entry["error"] = e.what();
      errors[i] = e.what();
    }
    entries[i] = std::move(entry);
    if (on_done) on_done(i);
  });
  GenerationResult result;
  result.manifest = {{"format_version", kManifestVersion},
                     {"name", spec.name},
                     {"spec", spec},
                     {"trajectory_count", count},
                     {"trajectories", entries}};
  for (auto& e : errors) {
    if (!e.empty()) result.errors.push_back(e);
  }
  std::ofstream(out_dir / "manifest.json") << result.manifest.dump(2) << "\n";
  return result;
}

struct Dataset {
  DatasetSpec spec;
  nlohmann::json manifest;
  std::vector<TrajectoryBundle> bundles;
};

// Loads and validates a dataset directory: every referenced bundle must
// exist and parse, and every drawn parameter must lie inside its range.
inline Dataset open_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("missing manifest: " + manifest_path.string());
  Dataset ds;
  try {
    ds.manifest = nlohmann::json::parse(in);
    if (ds.manifest.at("format_version").get<int>() != kManifestVersion) {
      throw FormatError("manifest version mismatch");
    }
    ds.spec = ds.manifest.at("spec").get<DatasetSpec>();
    const auto& r = ds.spec.ranges;
    for (const auto& entry : ds.manifest.at("trajectories")) {
      const bool in_range = r.gamma.contains(entry.at("gamma").get<double>()) &&
                            r.kappa.contains(entry.at("kappa").get<double>()) &&
                            r.x_e.contains(entry.at("x_e").get<double>()) &&
                            r.x_o.contains(entry.at("x_o").get<double>()) &&
                            r.f_amp.contains(entry.at("f_amp").get<double>()) &&
                            r.t_e.contains(entry.at("t_e").get<double>());
      if (!in_range) throw FormatError("manifest parameter outside its range");
      if (!entry.contains("file")) continue;  // logged generation failure
      const auto file = dir / entry.at("file").get<std::string>();
      if (!std::filesystem::exists(file)) {
        throw FormatError("manifest references missing file: " + file.string());
      }
      ds.bundles.push_back(load_bundle(file));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return ds;
}

}  // namespace modalnode

#endif  // MODALNODE_DATASET_HPP_
