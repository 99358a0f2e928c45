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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "modalnode/cli.hpp"

namespace modalnode {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "modalnode");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "modalnode_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  const auto r = run({"gen-dataset", "--profile", "nope", "--out-dir", path("x")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("\"error\""), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, RuntimeErrorsAreStructured) {
  const auto r = run({"eval", "--model", "tensor", "--dataset", path("missing")});
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"]["command"], "eval");
}

TEST_F(Cli, GenerateEvaluateRenderInspect) {
  const std::vector<std::string> gen = {"gen-dataset", "--profile", "desk-test",
                                        "--trajectories", "2", "--duration", "0.02"};
  auto args = gen;
  args.insert(args.end(), {"--out-dir", path("ds")});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_TRUE(fs::exists(path("ds/manifest.json")));
  EXPECT_TRUE(fs::exists(path("ds/config.json")));

  args = gen;
  args.insert(args.end(), {"--out-dir", path("ds2"), "--threads", "2"});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(bytes(path("ds/traj_0001.bin")), bytes(path("ds2/traj_0001.bin")));

  ASSERT_EQ(run({"eval", "--model", "tensor", "--dataset", path("ds"), "--horizons",
                 "10ms,full", "--out", path("eval.json"), "--per-mode-csv",
                 path("pm.csv")})
                .code,
            0);
  const auto report = nlohmann::json::parse(std::ifstream(path("eval.json")));
  ASSERT_EQ(report["horizons"].size(), 2u);
  EXPECT_LT(report["horizons"][0]["rel_mse_displacement"].get<double>(), 1e-20);
  EXPECT_TRUE(fs::exists(path("pm.csv")));

  const auto r = run({"render", "--bundle", path("ds/traj_0000.bin"), "--wav",
                      path("a.wav"), "--csv", path("a.csv"), "--stft", path("a_stft.csv"),
                      "--window", "256", "--hop", "128"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto wav = read_wav(path("a.wav"));
  EXPECT_EQ(wav.channels, 1);
  EXPECT_EQ(wav.sample_rate, 88200u);
  EXPECT_EQ(wav.samples.size(), 1764u);
  EXPECT_EQ(run({"render", "--bundle", path("ds/traj_0000.bin"), "--wav", path("b.wav")}).code,
            0);
  EXPECT_EQ(bytes(path("a.wav")), bytes(path("b.wav")));

  const auto ins = run({"inspect", path("ds")});
  ASSERT_EQ(ins.code, 0);
  EXPECT_EQ(nlohmann::json::parse(ins.out)["kind"], "dataset");
  const auto insb = run({"inspect", path("ds/traj_0000.bin")});
  ASSERT_EQ(insb.code, 0);
  EXPECT_EQ(nlohmann::json::parse(insb.out)["kind"], "bundle");
}

TEST_F(Cli, TrainWritesArtefactsAndLog) {
  ASSERT_EQ(run({"gen-dataset", "--profile", "oscillator-desk-cubic", "--trajectories", "3",
                 "--duration", "0.02", "--out-dir", path("osc")})
                .code,
            0);
  const auto r = run({"train", "--dataset", path("osc"), "--out-dir", path("run"),
                      "--epochs", "3", "--width", "8", "--hidden-layers", "2", "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"config.json", "log.jsonl", "model.bin", "last_model.bin"}) {
    EXPECT_TRUE(fs::exists(path(std::string("run/") + f))) << f;
  }
  std::ifstream log(path("run/log.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("epoch"));
    EXPECT_TRUE(j.contains("train_loss"));
    EXPECT_TRUE(j.contains("val_loss"));
    ++lines;
  }
  EXPECT_EQ(lines, 4);
  const auto ins = run({"inspect", path("run/model.bin")});
  ASSERT_EQ(ins.code, 0);
  EXPECT_EQ(nlohmann::json::parse(ins.out)["kind"], "model");
  const auto nl = run({"nl-table", "--model", path("run/model.bin"), "--dataset",
                       path("osc"), "--points", "11", "--out", path("nl.csv")});
  ASSERT_EQ(nl.code, 0) << nl.err;
  EXPECT_TRUE(fs::exists(path("nl.csv")));
  EXPECT_EQ(run({"eval", "--model", path("run/model.bin"), "--dataset", path("osc"),
                 "--out", path("e.json")})
                .code,
            0);
}

TEST_F(Cli, TensorCounts) {
  const auto r = run({"tensor", "--modes", "4", "--out", path("t.bin")});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["canonical_entries"], 31);
  EXPECT_EQ(nlohmann::json::parse(run({"inspect", path("t.bin")}).out)["kind"], "tensor");
}

TEST_F(Cli, SimulateProfileTrajectoryMatchesDataset) {
  ASSERT_EQ(run({"gen-dataset", "--profile", "desk-test", "--trajectories", "2",
                 "--duration", "0.02", "--out-dir", path("ds")})
                .code,
            0);
  const auto r = run({"simulate", "--profile", "desk-test", "--index", "1", "--duration",
                      "0.02", "--out", path("sim.bin")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = load_bundle(path("sim.bin"));
  const auto b = load_bundle(path("ds/traj_0001.bin"));
  EXPECT_EQ(a.states.q, b.states.q);
}

}  // namespace
}  // namespace modalnode
