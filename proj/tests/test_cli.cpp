/* Copyright 2026 The WaveSense Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wavesense/checkpoint.hpp"
#include "wavesense/cli.hpp"

namespace fs = std::filesystem;

namespace wavesense {
namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliDir : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("ws_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST(Cli, NoArgumentsIsUsageError) {
  const Result r = run({});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("inspect"), std::string::npos);
}

TEST(Cli, HelpSucceeds) { EXPECT_EQ(run({"--help"}).code, cli::kExitOk); }

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run({"inspect", "--bogus"}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitInvalid);
}

TEST(Cli, InspectPreset) {
  const Result r = run({"inspect", "--preset", "heysnips"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("temporal memory 150 bins"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("readout.weight"), std::string::npos);
  EXPECT_NE(r.out.find("total 68 vs 24"), std::string::npos) << r.out;
}

TEST(Cli, InvalidValuesAreValidationErrors) {
  EXPECT_EQ(run({"inspect", "--preset", "nope"}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"inspect", "--preset", "heysnips", "--set", "dilations=[]"}).code,
            cli::kExitInvalid);
  EXPECT_EQ(run({"inspect", "--preset", "heysnips", "--set", "no_such_key=1"}).code,
            cli::kExitInvalid);
}

TEST(Cli, GradcheckPasses) {
  const Result r = run({"gradcheck", "--set", "dilations=[2, 4]", "--set", "n_classes=2",
                        "--set", "n_channels_in=6", "--bins", "40"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST_F(CliDir, MissingFilesAreRuntimeFailures) {
  EXPECT_EQ(run({"inspect", "--ckpt", path("absent.wsckpt")}).code, cli::kExitFailure);
  EXPECT_EQ(run({"eval", "--ckpt", path("absent.wsckpt"), "--data", path("none")}).code,
            cli::kExitFailure);
}

TEST_F(CliDir, CorruptCheckpointIsRuntimeFailure) {
  std::ofstream(path("bad.wsckpt")) << "not a checkpoint";
  EXPECT_EQ(run({"inspect", "--ckpt", path("bad.wsckpt")}).code, cli::kExitFailure);
}

TEST_F(CliDir, SynthTrainEvalStream) {
  const std::vector<std::string> spec{"--set", "n_classes=2", "--set", "channels=12",
                                      "--set", "bins=40", "--set", "samples_per_class=30"};
  std::vector<std::string> synth{"synth-data", "--out", path("data"), "--stream-keywords", "6"};
  synth.insert(synth.end(), spec.begin(), spec.end());
  Result r = run(synth);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "data" / "stream.wsras"));

  std::ofstream(path("net.cfg")) << "dilations = [2, 4]\nepochs = 3\nbatch_size = 8\n";
  r = run({"train", "--config", path("net.cfg"), "--data", path("data"), "--out",
           path("m.wsckpt")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("epoch 2 "), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(path("m.wsckpt.metrics.ndjson")));
  {
    std::ifstream log(path("m.wsckpt.metrics.ndjson"));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(log, line)) ++lines;
    EXPECT_EQ(lines, 6u);  // train and val per epoch
  }
  const Checkpoint ck = load_checkpoint(path("m.wsckpt"));
  EXPECT_EQ(ck.config.n_classes, 2u);
  EXPECT_EQ(ck.config.n_channels_in, 12u);
  EXPECT_EQ(ck.state.epoch, 3u);

  r = run({"eval", "--ckpt", path("m.wsckpt"), "--data", path("data")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("test"), std::string::npos);

  r = run({"stream", "--ckpt", path("m.wsckpt"), "--stream", path("data/stream.wsras"),
           "--labels", path("data/stream_labels.tsv"), "--sweep-table", path("sweep.tsv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("operating point"), std::string::npos);
  std::ifstream table(path("sweep.tsv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(table, line)) ++rows;
  EXPECT_EQ(rows, 102u);

  r = run({"inspect", "--ckpt", path("m.wsckpt")});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;

  // A mismatched config on resume is rejected.
  r = run({"train", "--config", path("net.cfg"), "--set", "dilations=[2, 8]", "--data",
           path("data"), "--out", path("m2.wsckpt"), "--resume", path("m.wsckpt")});
  EXPECT_EQ(r.code, cli::kExitFailure);
}

}  // namespace
}  // namespace wavesense
