// Copyright 2026 The TinyCo Authors.
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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tinyco/cli.h"
#include "tinyco/graph.h"
#include "tinyco/serialize.h"
#include "tinyco/tensor.h"

namespace tinyco {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tinyco_cli_" + std::string(::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, AnalyzeBaselineReportsCosts) {
  const CliResult r = Cli({"--quiet", "analyze", "--baseline", "w0.3-r144"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = ParseJson(r.out);
  EXPECT_EQ(j["analysis"]["macs"].get<int64_t>(), 16550160);
  EXPECT_EQ(j["analysis"]["peak_sram_bytes"].get<int64_t>(), 311040);
  EXPECT_EQ(j["analysis"]["flash_bytes"].get<int64_t>(), 620032);
}

TEST_F(CliTest, AnalyzeTablePrintsToStdout) {
  const CliResult r = Cli({"analyze", "--space", "w0.5-r96", "--kernel", "5",
                           "--expand", "4", "--depth", "3", "--out",
                           Path("a.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("DepthwiseConv2d"), std::string::npos);
  const NetworkArch arch = LoadModel(ParseJson(ReadTextFile(Path("a.json"))));
  EXPECT_EQ(arch.input_shape, (Shape{3, 96, 96}));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"frobnicate"}).code, 2);
  EXPECT_EQ(Cli({"search", "--device", "f746"}).code, 2);  // no --space
}

TEST_F(CliTest, MalformedProfileIsParseError) {
  WriteTextFile(Path("bad.json"), "{\"name\": \"x\", \"sram_bytes\": ");
  const CliResult r = Cli({"optimize-space", "--device", Path("bad.json"),
                           "--samples", "5"});
  EXPECT_EQ(r.code, 1);
  const Json e = ParseJson(r.err);
  EXPECT_EQ(e["error"], "parse");
  EXPECT_FALSE(e["message"].get<std::string>().empty());
}

TEST_F(CliTest, UnknownDeviceAndEmptySpace) {
  CliResult r = Cli({"optimize-space", "--device", "nosuchboard", "--samples", "5"});
  EXPECT_EQ(r.code, 1);
  WriteTextFile(Path("tiny.json"),
                "{\"name\": \"tiny\", \"sram_bytes\": 1, \"flash_bytes\": 1}\n");
  r = Cli({"optimize-space", "--device", Path("tiny.json"), "--samples", "5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(ParseJson(r.err)["error"], "empty_space");
}

TEST_F(CliTest, ShippedProfilesLoad) {
  for (const char* name : {"stm32f412.json", "stm32f746.json", "stm32f765.json",
                           "stm32h743.json"}) {
    const DeviceProfile d = DeviceFromJson(ParseJson(ReadTextFile(testing::DevicePath(name))));
    EXPECT_EQ(d.sram_bytes, FindBuiltinDevice(d.name).sram_bytes) << name;
    EXPECT_EQ(d.flash_bytes, FindBuiltinDevice(d.name).flash_bytes) << name;
  }
}

TEST_F(CliTest, JobsDoNotChangeOutput) {
  for (const char* jobs : {"1", "8"}) {
    const std::string tag = jobs;
    ASSERT_EQ(Cli({"--quiet", "--seed", "3", "--jobs", jobs, "--out",
                   Path("space" + tag + ".json"), "optimize-space", "--device",
                   "f412", "--samples", "30"})
                  .code,
              0);
    ASSERT_EQ(Cli({"--quiet", "--seed", "3", "--jobs", jobs, "--out",
                   Path("search" + tag + ".json"), "search", "--space", "w0.6-r128",
                   "--device", "f412", "--iterations", "4"})
                  .code,
              0);
  }
  EXPECT_EQ(ReadTextFile(Path("space1.json")), ReadTextFile(Path("space8.json")));
  EXPECT_EQ(ReadTextFile(Path("search1.json")), ReadTextFile(Path("search8.json")));
}

TEST_F(CliTest, PlanRunAndCodegen) {
  ASSERT_EQ(Cli({"--quiet", "--out", Path("m.json"), "analyze", "--space",
                 "w0.4-r64", "--kernel", "3", "--expand", "6", "--depth", "2"})
                .code,
            0);
  CliResult r = Cli({"--quiet", "--out", Path("p.json"), "plan", "--model",
                     Path("m.json"), "--blocks-csv", Path("blocks.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json plan = ParseJson(ReadTextFile(Path("p.json")));
  EXPECT_GT(plan["peak_sram_bytes"].get<int64_t>(), 0);
  EXPECT_EQ(ReadTextFile(Path("blocks.csv")).rfind("block_index,activation_bytes", 0), 0u);

  const NetworkArch arch = LoadModel(ParseJson(ReadTextFile(Path("m.json"))));
  WriteBinaryFile(Path("in.bin"), EncodeTensorFile(RandomTensor(arch.input_shape, {}, 1)));
  r = Cli({"--quiet", "--out", Path("run.json"), "run", "--model", Path("m.json"),
           "--input", Path("in.bin"), "--output", Path("out.bin"),
           "--weight-seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = ParseJson(ReadTextFile(Path("run.json")));
  EXPECT_TRUE(rep["reference_match"].get<bool>());
  EXPECT_LE(rep["measured_peak_bytes"].get<int64_t>(),
            rep["planned_peak_bytes"].get<int64_t>());
  EXPECT_EQ(rep["planned_peak_bytes"].get<int64_t>(),
            plan["peak_sram_bytes"].get<int64_t>());
  EXPECT_EQ(DecodeTensorFile(ReadBinaryFile(Path("out.bin"))).shape,
            (Shape{kDefaultNumClasses, 1, 1}));

  r = Cli({"--quiet", "--out", Path("code"), "codegen", "--model", Path("m.json"),
           "--plan", Path("p.json"), "--weight-seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"model.c", "model.h", "weights.c", "memory_map.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "code" / f)) << f;
  }
  EXPECT_NE(ReadTextFile(Path("code/model.h")).find("int8_t* invoke(const int8_t* input);"),
            std::string::npos);
}

TEST_F(CliTest, CodesignIsCompositionOfSubcommands) {
  const std::string out = Path("cs");
  CliResult r = Cli({"--quiet", "--seed", "11", "--out", out, "codesign", "--device",
                     testing::DevicePath("stm32f746.json"), "--samples", "100",
                     "--iterations", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream rep(out + "/run_report.jsonl");
  std::string line;
  ASSERT_TRUE(std::getline(rep, line));
  const Json report = ParseJson(line);
  EXPECT_EQ(report["command"], "codesign");
  EXPECT_EQ(report["seed"].get<uint64_t>(), 11u);
  ASSERT_EQ(report["stages"].size(), 4u);
  const Json& st = report["stages"];
  const std::string s_space = std::to_string(st[0]["seed"].get<uint64_t>());
  const std::string s_search = std::to_string(st[1]["seed"].get<uint64_t>());
  const std::string s_weights = std::to_string(st[3]["seed"].get<uint64_t>());
  const std::string device = out + "/device.json";

  ASSERT_EQ(Cli({"--quiet", "--seed", s_space, "--out", Path("space.json"),
                 "optimize-space", "--device", device, "--samples", "100"})
                .code,
            0);
  EXPECT_EQ(ReadTextFile(Path("space.json")), ReadTextFile(out + "/space.json"));
  const std::string best = st[0]["best_space"];
  ASSERT_EQ(Cli({"--quiet", "--seed", s_search, "--out", Path("search.json"),
                 "search", "--space", best, "--device", device, "--iterations", "5"})
                .code,
            0);
  EXPECT_EQ(ReadTextFile(Path("search.json")), ReadTextFile(out + "/search.json"));
  ASSERT_EQ(Cli({"--quiet", "--out", Path("plan.json"), "plan", "--model",
                 Path("search.json")})
                .code,
            0);
  EXPECT_EQ(ReadTextFile(Path("plan.json")), ReadTextFile(out + "/plan.json"));
  ASSERT_EQ(Cli({"--quiet", "--out", Path("code"), "codegen", "--model",
                 Path("search.json"), "--plan", Path("plan.json"), "--weight-seed",
                 s_weights})
                .code,
            0);
  for (const char* f : {"model.c", "model.h", "weights.c", "memory_map.json"}) {
    EXPECT_EQ(ReadTextFile(Path(std::string("code/") + f)),
              ReadTextFile(out + "/code/" + f))
        << f;
  }
}

TEST_F(CliTest, CodesignDeviceLadder) {
  // Both full default runs: m = 1000, 30 iterations.
  ASSERT_EQ(Cli({"--quiet", "--seed", "5", "--out", Path("h743"), "codesign",
                 "--device", "stm32h743"})
                .code,
            0);
  ASSERT_EQ(Cli({"--quiet", "--seed", "5", "--out", Path("f412"), "codesign",
                 "--device", "stm32f412"})
                .code,
            0);
  const Json h = ParseJson(ReadTextFile(Path("h743/search.json")))["best"];
  const Json f = ParseJson(ReadTextFile(Path("f412/search.json")))["best"];
  EXPECT_TRUE(h["feasible"].get<bool>());
  EXPECT_LE(h["peak_sram_bytes"].get<int64_t>(), 512 * 1024);
  EXPECT_LE(h["flash_bytes"].get<int64_t>(), 2048 * 1024);
  EXPECT_LE(f["peak_sram_bytes"].get<int64_t>(), 256 * 1024);
  EXPECT_LE(f["macs"].get<int64_t>(), h["macs"].get<int64_t>());
  EXPECT_EQ(f["macs"].get<int64_t>(), 150019936);
  EXPECT_EQ(h["macs"].get<int64_t>(), 278413936);
}

}  // namespace
}  // namespace tinyco
