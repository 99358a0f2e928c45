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

#ifndef MODALNODE_CLI_HPP_
#define MODALNODE_CLI_HPP_

// `modalnode` command-line front end. Every subcommand reads flags and an
// optional JSON config (flags win), writes its outputs, and echoes the
// effective configuration next to them. Failures print one JSON line
// {"error": {...}} on stderr and return non-zero.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modalnode/dataset.hpp"
#include "modalnode/error.hpp"
#include "modalnode/evaluation.hpp"
#include "modalnode/neural.hpp"
#include "modalnode/nonlinearity.hpp"
#include "modalnode/oscillator.hpp"
#include "modalnode/render.hpp"
#include "modalnode/training.hpp"

namespace modalnode {

namespace cli_detail {

namespace fs = std::filesystem;
using nlohmann::json;

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed config " + path.string() + ": " + e.what());
  }
}

inline void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

inline std::string error_type(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const StabilityError*>(&e)) return "stability";
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const FormatError*>(&e)) return "format";
  if (dynamic_cast<const TrainingAborted*>(&e)) return "training_aborted";
  return "runtime";
}

inline void print_error(std::ostream& err, const std::string& command,
                        const std::string& type, const std::string& message) {
  err << json{{"error", {{"command", command}, {"type", type}, {"message", message}}}}
             .dump()
      << "\n";
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string config;
  std::string profile;
  std::size_t index = 0;
  std::string model;
  bool linear = false;
  std::optional<double> duration;
  std::optional<double> sample_rate;
  std::string out;
  std::string wav;
  bool force = false;
};

inline int run_simulate(const SimulateArgs& a, std::ostream& out) {
  SystemSpec system;
  PluckParams pluck;
  double x_o = 0.5;
  double fs = 0.0;
  double duration = 0.0;
  std::string nl_name;
  json effective;
  if (!a.config.empty()) {
    // {"system": {...}, "pluck": {...}, "x_o", "sample_rate", "duration",
    //  "nonlinearity": "tensor" | "cubic" | "sinh" | "linear"}
    const json j = read_json_file(a.config);
    system = modalnode::detail::system_from_json(j.at("system"));
    const auto& p = j.at("pluck");
    pluck = {p.at("amplitude").get<double>(), p.at("duration").get<double>(),
             p.value("position", 0.5)};
    x_o = j.value("x_o", 0.5);
    fs = j.at("sample_rate").get<double>();
    duration = j.at("duration").get<double>();
    nl_name = j.value("nonlinearity",
                      system.kind == SystemKind::kString ? "tensor" : "cubic");
  } else {
    require(!a.profile.empty(), "simulate needs --config or --profile");
    const auto spec = dataset_profile(a.profile);
    require(a.index < spec.ranges.trajectories, "trajectory index out of range");
    const auto draw = draw_trajectory_params(spec.ranges, a.index);
    system = spec.system_for(draw);
    pluck = draw.pluck;
    x_o = draw.x_o;
    fs = spec.ranges.sample_rate;
    duration = spec.ranges.duration;
    nl_name = spec.nonlinearity_name();
  }
  if (a.duration) duration = *a.duration;
  if (a.sample_rate) fs = *a.sample_rate;
  if (a.linear) nl_name = "linear";
  if (!a.model.empty()) nl_name = "model:" + a.model;
  pluck.validate();
  const SimulationGrid grid{fs, static_cast<std::size_t>(std::llround(duration * fs))};
  grid.validate();
  RolloutOptions options;
  options.force = a.force;
  BundleMetadata meta{"simulate", nl_name, 0, a.index, kBundleVersion};

  TrajectoryBundle bundle;
  if (!a.model.empty()) {
    const auto net = load_model(a.model);
    require(net.inputs() == system.modes, "model input size differs from modes");
    bundle = simulate_bundle(system, pluck, x_o, grid, net, meta, options);
  } else if (nl_name == "linear") {
    bundle = simulate_bundle(system, pluck, x_o, grid, ZeroNonlinearity{}, meta,
                             options);
  } else if (nl_name == "tensor") {
    require(system.kind == SystemKind::kString, "tensor needs a string system");
    const auto tensor = build_tensor(system.modes);
    bundle = simulate_bundle(system, pluck, x_o, grid, tensor, meta, options);
  } else {
    const LumpedNonlinearity nl{lumped_kind_from_string(nl_name)};
    bundle = simulate_bundle(system, pluck, x_o, grid, nl, meta, options);
  }

  effective = {{"system", modalnode::detail::system_to_json(system)},
               {"pluck",
                {{"amplitude", pluck.amplitude},
                 {"duration", pluck.duration},
                 {"position", pluck.position}}},
               {"x_o", x_o},
               {"sample_rate", fs},
               {"duration", duration},
               {"nonlinearity", nl_name}};
  if (!a.out.empty()) {
    const fs::path path(a.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_bundle(bundle, path);
    write_json_file(fs::path(a.out + ".config.json"), effective);
  }
  if (!a.wav.empty()) write_wav(a.wav, bundle.output, fs);
  double peak = 0.0;
  for (double w : bundle.output) peak = std::max(peak, std::abs(w));
  out << json{{"steps", grid.steps}, {"modes", system.modes}, {"peak_output", peak},
              {"config", effective}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gen-dataset

struct GenArgs {
  std::string profile;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::optional<double> duration;
  std::optional<double> sample_rate;
  std::string out_dir;
  std::size_t threads = 1;
};

inline int run_gen_dataset(const GenArgs& a, std::ostream& out) {
  DatasetSpec spec;
  if (!a.config.empty()) {
    spec = read_json_file(a.config).get<DatasetSpec>();
  } else {
    require(!a.profile.empty(), "gen-dataset needs --profile or --config");
    spec = dataset_profile(a.profile);
  }
  if (a.seed) spec.ranges.seed = *a.seed;
  if (a.trajectories) spec.ranges.trajectories = *a.trajectories;
  if (a.duration) spec.ranges.duration = *a.duration;
  if (a.sample_rate) spec.ranges.sample_rate = *a.sample_rate;
  spec.validate();
  const fs::path dir(a.out_dir);
  const auto result = generate_dataset(spec, dir, a.threads);
  write_json_file(dir / "config.json", json(spec));
  out << json{{"out_dir", dir.string()},
              {"trajectories", spec.ranges.trajectories},
              {"failed", result.errors.size()}}
             .dump()
      << "\n";
  return result.errors.empty() ? 0 : 3;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string dataset;
  std::string out_dir;
  std::string config;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<double> final_learning_rate;
  std::optional<std::size_t> batch_size;
  std::optional<double> segment_ms;
  std::optional<double> validation_fraction;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> hidden;
  std::optional<std::size_t> width;
  std::optional<double> alpha;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> checkpoint_every;
  bool resume = false;
  bool quiet = false;
};

inline int run_train(const TrainArgs& a, std::ostream& out) {
  const fs::path dir(a.out_dir);
  json file_cfg = a.config.empty() ? json::object() : read_json_file(a.config);
  TrainingConfig cfg = file_cfg.value("training", json::object()).get<TrainingConfig>();
  const json model_cfg = file_cfg.value("model", json::object());
  std::size_t hidden = model_cfg.value("hidden_layers", std::size_t{5});
  std::size_t width = model_cfg.value("width", std::size_t{100});
  double alpha = model_cfg.value("alpha", kDefaultLeakySlope);
  std::uint64_t init_seed = model_cfg.value("seed", std::uint64_t{0});
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.learning_rate) cfg.learning_rate = *a.learning_rate;
  if (a.final_learning_rate) cfg.final_learning_rate = *a.final_learning_rate;
  if (a.batch_size) cfg.batch_size = *a.batch_size;
  if (a.segment_ms) cfg.segment_ms = *a.segment_ms;
  if (a.validation_fraction) cfg.validation_fraction = *a.validation_fraction;
  if (a.seed) {
    cfg.seed = *a.seed;
    init_seed = *a.seed;
  }
  if (a.hidden) hidden = *a.hidden;
  if (a.width) width = *a.width;
  if (a.alpha) alpha = *a.alpha;
  if (a.threads) cfg.threads = *a.threads;
  if (a.checkpoint_every) cfg.checkpoint_every = *a.checkpoint_every;
  if (cfg.checkpoint_every != 0 && cfg.checkpoint_dir.empty()) {
    cfg.checkpoint_dir = dir / "checkpoints";
  }
  cfg.validate();

  const auto ds = open_dataset(a.dataset);
  require(!ds.bundles.empty(), "dataset has no trajectories");
  const std::size_t modes = ds.bundles.front().modes();
  auto net = mlp_init(modes, hidden, width, alpha, init_seed);

  fs::create_directories(dir);
  const json effective = {{"dataset", a.dataset},
                          {"training", cfg},
                          {"model",
                           {{"hidden_layers", hidden},
                            {"width", width},
                            {"alpha", alpha},
                            {"seed", init_seed}}}};
  write_json_file(dir / "config.json", effective);

  std::optional<ResumeState> resume;
  if (a.resume) resume = load_checkpoint(cfg.checkpoint_dir);
  std::ofstream log(dir / "log.jsonl", a.resume ? std::ios::app : std::ios::trunc);
  const auto result = train(
      cfg, ds.bundles, std::move(net),
      [&](const EpochRecord& r) {
        const json line = r;
        log << line.dump() << "\n" << std::flush;
        if (!a.quiet) out << line.dump() << "\n" << std::flush;
      },
      resume ? &*resume : nullptr);
  save_model(result.best, dir / "model.bin");
  save_model(result.last, dir / "last_model.bin");
  out << json{{"model", (dir / "model.bin").string()},
              {"best_epoch", result.best_epoch},
              {"best_val_loss", result.best_val_loss}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model;
  std::string dataset;
  std::string horizons = "100ms,full";
  std::string out;
  std::string per_mode_csv;
  std::size_t threads = 1;
};

inline int run_eval(const EvalArgs& a, std::ostream& out) {
  const auto horizons = parse_horizons(a.horizons);
  const auto ds = open_dataset(a.dataset);
  require(!ds.bundles.empty(), "dataset has no trajectories");
  EvalReport report;
  if (a.model == "tensor") {
    const auto tensor = build_tensor(ds.bundles.front().modes());
    report = evaluate_model(tensor, ds.bundles, horizons, a.threads, a.model,
                            a.dataset);
  } else if (a.model == "zero") {
    report = evaluate_model(ZeroNonlinearity{}, ds.bundles, horizons, a.threads,
                            a.model, a.dataset);
  } else {
    const auto net = load_model(a.model);
    require(net.inputs() == ds.bundles.front().modes(),
            "model input dimension differs from dataset modes");
    report = evaluate_model(net, ds.bundles, horizons, a.threads, a.model, a.dataset);
  }
  const json j = report_to_json(report);
  if (a.out.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_json_file(a.out, j);
  }
  if (!a.per_mode_csv.empty()) {
    // mode,<label>_q,<label>_p,<label>_baseline_q,<label>_baseline_p per horizon
    std::ofstream csv(a.per_mode_csv);
    if (!csv) throw std::runtime_error("cannot open for writing: " + a.per_mode_csv);
    csv << std::setprecision(std::numeric_limits<double>::max_digits10) << "mode";
    for (const auto& agg : report.aggregate) {
      csv << ',' << agg.label << "_q," << agg.label << "_p," << agg.label
          << "_baseline_q," << agg.label << "_baseline_p";
    }
    csv << '\n';
    const std::size_t modes = ds.bundles.front().modes();
    for (std::size_t m = 0; m < modes; ++m) {
      csv << m + 1;
      for (const auto& agg : report.aggregate) {
        if (agg.per_mode.q.empty()) {
          csv << ",,,,";
          continue;
        }
        csv << ',' << agg.per_mode.q[m] << ',' << agg.per_mode.p[m] << ','
            << agg.baseline_per_mode.q[m] << ',' << agg.baseline_per_mode.p[m];
      }
      csv << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// render

struct RenderArgs {
  std::string bundle;
  std::string wav;
  std::string csv;
  std::string state_csv;
  std::string stft;
  RenderOptions options;
};

inline int run_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  a.options.validate();
  require(!a.wav.empty() || !a.csv.empty() || !a.state_csv.empty() ||
              !a.stft.empty(),
          "render needs at least one of --wav, --csv, --state-csv, --stft");
  const auto b = load_bundle(a.bundle);
  const double fs = b.grid.sample_rate;
  json summary = {{"bundle", a.bundle}, {"sample_rate", fs}, {"steps", b.steps()}};
  if (!a.wav.empty()) {
    const auto r = write_wav(a.wav, b.output, fs, a.options);
    if (r.silent) {
      err << json{{"warning", "silent output; wrote an all-zero WAV"}}.dump() << "\n";
    }
    summary["wav"] = {{"path", a.wav}, {"silent", r.silent}, {"peak_code", r.peak_code}};
  }
  if (!a.csv.empty()) write_output_csv(a.csv, b.output, fs);
  if (!a.state_csv.empty()) write_state_csv(a.state_csv, b.states, fs);
  if (!a.stft.empty()) {
    const auto s = stft_magnitudes(b.output, a.options.stft_window, a.options.stft_hop);
    write_stft_csv(a.stft, s, a.options.stft_hop, fs);
    summary["stft"] = {{"frames", s.frames}, {"bins", s.bins}};
  }
  out << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// inspect

inline json inspect_path(const fs::path& path) {
  if (fs::is_directory(path)) {
    const auto ds = open_dataset(path);
    return {{"kind", "dataset"},
            {"spec", ds.spec},
            {"bundles", ds.bundles.size()},
            {"manifest_trajectories", ds.manifest.at("trajectory_count")}};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open: " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  const std::string m(magic, 8);
  if (m == std::string(kBundleMagic, 8)) {
    const auto b = load_bundle(path);
    return {{"kind", "bundle"},
            {"system", modalnode::detail::system_to_json(b.system)},
            {"sample_rate", b.grid.sample_rate},
            {"steps", b.steps()},
            {"nonlinearity", b.meta.nonlinearity},
            {"dataset", b.meta.dataset},
            {"index", b.meta.index}};
  }
  if (m.rfind(kModelMagic, 0) == 0) {
    const auto net = load_model(path);
    return {{"kind", "model"},
            {"dims", std::vector<std::size_t>(net.dims().begin(), net.dims().end())},
            {"alpha", net.alpha()},
            {"parameters", net.parameter_count()},
            {"ops_per_evaluation", count_mlp_ops(net)}};
  }
  if (m == std::string(kTensorMagic, 8)) {
    const auto t = load_tensor(path);
    return {{"kind", "tensor"},
            {"modes", t.modes()},
            {"canonical_entries", t.count_nonzeros(CountConvention::kCanonical)},
            {"ordered_entries", t.count_nonzeros(CountConvention::kOrdered)}};
  }
  throw FormatError("unrecognised file: " + path.string());
}

// ---------------------------------------------------------------------------
// nl-table and tensor

struct NlTableArgs {
  std::string model;
  std::string dataset;
  std::optional<double> q_min;
  std::optional<double> q_max;
  std::size_t points = 201;
  std::string out;
};

inline int run_nl_table(const NlTableArgs& a, std::ostream& out) {
  const auto net = load_model(a.model);
  require(net.inputs() == 1 && net.outputs() == 1, "nl-table needs a one-mode model");
  double lo = a.q_min.value_or(0.0);
  double hi = a.q_max.value_or(0.0);
  if (!a.dataset.empty()) {
    const auto ds = open_dataset(a.dataset);
    const auto [dlo, dhi] = observed_range(ds.bundles);
    lo = a.q_min.value_or(dlo);
    hi = a.q_max.value_or(dhi);
  }
  require(a.q_min.has_value() == a.q_max.has_value() || !a.dataset.empty(),
          "give --dataset or both --q-min and --q-max");
  const auto table = sample_learned_nonlinearity(net, lo, hi, a.points);
  write_nonlinearity_csv(a.out, table);
  out << json{{"q_min", lo},
              {"q_max", hi},
              {"points", a.points},
              {"rel_l2_vs_cubic",
               relative_l2_error(table, LumpedNonlinearity{LumpedKind::kCubic})},
              {"rel_l2_vs_sinh",
               relative_l2_error(table, LumpedNonlinearity{LumpedKind::kSinh})}}
             .dump()
      << "\n";
  return 0;
}

inline int run_tensor(std::size_t modes, const std::string& path, std::ostream& out) {
  const auto t = build_tensor(modes);
  if (!path.empty()) save_tensor(t, path);
  out << json{{"modes", modes},
              {"canonical_entries", t.count_nonzeros(CountConvention::kCanonical)},
              {"ordered_entries", t.count_nonzeros(CountConvention::kOrdered)},
              {"ordered_distinct_leading_pair",
               t.count_nonzeros(CountConvention::kOrderedDistinctLeadingPair)}}
             .dump()
      << "\n";
  return 0;
}

}  // namespace cli_detail

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Modal string simulation and neural ODE training", "modalnode"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "single rollout to a bundle");
  c_sim->add_option("--config", sim.config, "JSON system/pluck/grid description");
  c_sim->add_option("--profile", sim.profile, "dataset profile to draw from");
  c_sim->add_option("--index", sim.index, "trajectory index within the profile");
  c_sim->add_option("--model", sim.model, "use a trained network as nonlinearity");
  c_sim->add_flag("--linear", sim.linear, "drop the nonlinear term");
  c_sim->add_option("--duration", sim.duration, "seconds");
  c_sim->add_option("--sample-rate", sim.sample_rate, "Hz");
  c_sim->add_option("--out", sim.out, "bundle path");
  c_sim->add_option("--wav", sim.wav, "also write the output as WAV");
  c_sim->add_flag("--force", sim.force, "skip the stability gate");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-dataset", "generate a trajectory dataset");
  c_gen->add_option("--profile", gen.profile, "named profile")
      ->check(CLI::IsMember(profile_names()));
  c_gen->add_option("--config", gen.config, "JSON dataset spec");
  c_gen->add_option("--seed", gen.seed);
  c_gen->add_option("--trajectories", gen.trajectories);
  c_gen->add_option("--duration", gen.duration, "seconds");
  c_gen->add_option("--sample-rate", gen.sample_rate, "Hz");
  c_gen->add_option("--out-dir", gen.out_dir)->required();
  c_gen->add_option("--threads", gen.threads);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train a network on a dataset");
  c_train->add_option("--dataset", tr.dataset)->required();
  c_train->add_option("--out-dir", tr.out_dir)->required();
  c_train->add_option("--config", tr.config, "JSON {training:{...}, model:{...}}");
  c_train->add_option("--epochs", tr.epochs);
  c_train->add_option("--lr", tr.learning_rate);
  c_train->add_option("--final-lr", tr.final_learning_rate,
                      "decay geometrically to this step size by the last epoch");
  c_train->add_option("--batch-size", tr.batch_size);
  c_train->add_option("--segment-ms", tr.segment_ms);
  c_train->add_option("--val-fraction", tr.validation_fraction);
  c_train->add_option("--seed", tr.seed);
  c_train->add_option("--hidden-layers", tr.hidden);
  c_train->add_option("--width", tr.width);
  c_train->add_option("--alpha", tr.alpha, "leaky ReLU slope");
  c_train->add_option("--threads", tr.threads);
  c_train->add_option("--checkpoint-every", tr.checkpoint_every);
  c_train->add_flag("--resume", tr.resume, "continue from out-dir/checkpoints");
  c_train->add_flag("--quiet", tr.quiet, "no per-epoch lines on stdout");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "free-running evaluation");
  c_eval->add_option("--model", ev.model, "model file, or 'tensor' / 'zero'")
      ->required();
  c_eval->add_option("--dataset", ev.dataset)->required();
  c_eval->add_option("--horizons", ev.horizons, "e.g. 100ms,full");
  c_eval->add_option("--out", ev.out, "JSON report path (default stdout)");
  c_eval->add_option("--per-mode-csv", ev.per_mode_csv);
  c_eval->add_option("--threads", ev.threads);

  RenderArgs rd;
  auto* c_render = app.add_subcommand("render", "bundle to WAV/CSV/STFT");
  c_render->add_option("--bundle", rd.bundle)->required();
  c_render->add_option("--wav", rd.wav);
  c_render->add_option("--csv", rd.csv, "output series");
  c_render->add_option("--state-csv", rd.state_csv, "modal states");
  c_render->add_option("--stft", rd.stft, "STFT magnitude CSV");
  c_render->add_option("--window", rd.options.stft_window);
  c_render->add_option("--hop", rd.options.stft_hop);
  c_render->add_option("--peak-dbfs", rd.options.peak_dbfs);
  c_render->add_option("--bits", rd.options.bit_depth)->check(CLI::IsMember({16, 24}));

  std::string inspect_target;
  auto* c_inspect = app.add_subcommand("inspect", "summarise a dataset/bundle/model");
  c_inspect->add_option("path", inspect_target)->required();

  NlTableArgs nt;
  auto* c_nl = app.add_subcommand("nl-table", "tabulate a one-mode network");
  c_nl->add_option("--model", nt.model)->required();
  c_nl->add_option("--dataset", nt.dataset, "take the q range from this dataset");
  c_nl->add_option("--q-min", nt.q_min);
  c_nl->add_option("--q-max", nt.q_max);
  c_nl->add_option("--points", nt.points);
  c_nl->add_option("--out", nt.out)->required();

  std::size_t tensor_modes = 0;
  std::string tensor_out;
  auto* c_tensor = app.add_subcommand("tensor", "build the coupling tensor");
  c_tensor->add_option("--modes", tensor_modes)->required()->check(CLI::PositiveNumber);
  c_tensor->add_option("--out", tensor_out);

  std::string command = "modalnode";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    print_error(err, subs.empty() ? command : subs.front()->get_name(), "usage",
                e.what());
    return 2;
  }
  command = app.get_subcommands().front()->get_name();
  try {
    if (*c_sim) return run_simulate(sim, out);
    if (*c_gen) return run_gen_dataset(gen, out);
    if (*c_train) return run_train(tr, out);
    if (*c_eval) return run_eval(ev, out);
    if (*c_render) return run_render(rd, out, err);
    if (*c_inspect) {
      out << inspect_path(inspect_target).dump(2) << "\n";
      return 0;
    }
    if (*c_nl) return run_nl_table(nt, out);
    if (*c_tensor) return run_tensor(tensor_modes, tensor_out, out);
  } catch (const std::exception& e) {
    print_error(err, command, error_type(e), e.what());
    return 1;
  }
  return 1;
}

}  // namespace modalnode

#endif  // MODALNODE_CLI_HPP_
