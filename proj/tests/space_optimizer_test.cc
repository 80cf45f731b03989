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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "tinyco/error.h"
#include "tinyco/graph.h"
#include "tinyco/planner.h"
#include "tinyco/rng.h"
#include "tinyco/space_optimizer.h"

namespace tinyco {
namespace {

std::vector<SampleMetrics> FakeSamples(std::vector<int64_t> macs) {
  std::vector<SampleMetrics> out;
  for (int64_t m : macs) out.push_back({m, 1, 1});
  return out;
}

TEST(SampleGenesTest, DeterministicAndValid) {
  const SpaceConfig c = SpaceConfig::Make(5, 144);
  for (uint64_t s = 0; s < 100; ++s) {
    const ArchGenes g = SampleGenes(c, s);
    EXPECT_EQ(g, SampleGenes(c, s));
    EXPECT_EQ(g.space, c);
    g.Validate();
  }
}

TEST(SampleGenesTest, KernelChoicesUniform) {
  constexpr int kN = 10000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < kN; ++i) {
    const ArchGenes g = SampleGenes(SpaceConfig(), DeriveSeed(1, "uniform", {uint64_t(i)}));
    const int k = g.stages[0].kernel[0];
    counts[(k - 3) / 2]++;
  }
  const double sigma = std::sqrt(kN * (1.0 / 3) * (2.0 / 3));
  for (int c : counts) EXPECT_LE(std::fabs(c - kN / 3.0), 3 * sigma) << c;
}

TEST(SampleGenesTest, DistinctSeedsDistinctGenes) {
  std::set<std::vector<int>> seen;
  for (uint64_t s = 0; s < 1000; ++s) {
    const ArchGenes g = SampleGenes(SpaceConfig(), s);
    std::vector<int> flat;
    for (int i = 0; i < ArchGenes::kNumGenes; ++i) flat.push_back(g.Gene(i));
    seen.insert(flat);
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(EvaluateSpaceTest, UnlimitedDeviceKeepsEverything) {
  const SpaceStats st = EvaluateSpace(SpaceConfig::Make(10, 224), UnlimitedDevice(), 100, 3);
  EXPECT_EQ(st.sampled, 100);
  EXPECT_EQ(st.satisfying, 100);
  EXPECT_TRUE(st.eligible);
}

TEST(EvaluateSpaceTest, OneByteDeviceKeepsNothing) {
  const DeviceProfile tiny{"tiny", 1, 1};
  const SpaceStats st = EvaluateSpace(SpaceConfig::Make(2, 48), tiny, 100, 3);
  EXPECT_EQ(st.satisfying, 0);
  EXPECT_TRUE(st.empty());
  EXPECT_FALSE(st.eligible);
  EXPECT_EQ(st.mean_flops, 0.0);
}

TEST(EvaluateSpaceTest, RegressionW05R144OnF746) {
  const SpaceConfig c = SpaceConfig::Parse("w0.5-r144");
  const DeviceProfile f746 = FindBuiltinDevice("stm32f746");
  const SpaceStats a = EvaluateSpace(c, f746, 1000, 42);
  const SpaceStats b = EvaluateSpace(c, f746, 1000, 42);
  EXPECT_EQ(a.flops_samples, b.flops_samples);
  EXPECT_EQ(a.mean_flops, b.mean_flops);
  EXPECT_EQ(a.satisfying, 1000);
  EXPECT_EQ(a.flops_sum, int64_t{40015205536});
  EXPECT_DOUBLE_EQ(a.mean_flops,
                   static_cast<double>(a.flops_sum) / a.satisfying);
}

TEST(EvaluateSpaceTest, SatisfyingNetworksReverify) {
  const SpaceConfig c = SpaceConfig::Make(6, 160);
  const DeviceProfile f746 = FindBuiltinDevice("f746");
  const SpaceStats st = EvaluateSpace(c, f746, 300, 9);
  ASSERT_GT(st.satisfying, 0);
  std::vector<int64_t> macs;
  for (int i = 0; i < 300; ++i) {
    const NetworkArch arch = BuildNetwork(SampleGenes(c, SpaceSampleSeed(9, c, i)));
    const MemoryPlan plan = PlanMemory(arch, true);
    if (CheckFit(plan, f746).fits) macs.push_back(CountMacs(arch));
  }
  std::sort(macs.begin(), macs.end());
  EXPECT_EQ(macs, st.flops_samples);
}

TEST(StatsTest, CdfAndPercentile) {
  const SpaceStats st = StatsForDevice(
      SpaceConfig(), FakeSamples({7, 3, 9, 1, 5, 2, 10, 8, 4, 6}), UnlimitedDevice());
  ASSERT_EQ(st.flops_samples.size(), 10u);
  EXPECT_TRUE(std::is_sorted(st.flops_samples.begin(), st.flops_samples.end()));
  EXPECT_EQ(st.flops_samples.back(), 10);
  EXPECT_EQ(st.p80_flops, 8);
  EXPECT_DOUBLE_EQ(st.mean_flops, 5.5);
  // Empirical CDF at the largest sample reaches 1.
  const auto at_max = std::upper_bound(st.flops_samples.begin(),
                                       st.flops_samples.end(), 10) -
                      st.flops_samples.begin();
  EXPECT_EQ(at_max, 10);
}

TEST(StatsTest, MinimumFractionGatesEligibility) {
  std::vector<SampleMetrics> s = FakeSamples({100, 100, 100, 100});
  for (int i = 0; i < 96; ++i) s.push_back({1000, 1 << 30, 1});  // too big
  const DeviceProfile dev{"d", 1 << 20, 1 << 20};
  EXPECT_FALSE(StatsForDevice(SpaceConfig(), s, dev, 0.05).eligible);
  EXPECT_TRUE(StatsForDevice(SpaceConfig(), s, dev, 0.04).eligible);
}

TEST(RankSpacesTest, DominanceAndTieBreaks) {
  const DeviceProfile dev = UnlimitedDevice();
  std::vector<SpaceStats> stats = {
      StatsForDevice(SpaceConfig::Make(5, 96), FakeSamples({5, 15, 25}), dev),
      StatsForDevice(SpaceConfig::Make(4, 96), FakeSamples({10, 20, 30}), dev),
      StatsForDevice(SpaceConfig::Make(3, 128), FakeSamples({10, 20, 30}), dev),
      StatsForDevice(SpaceConfig::Make(9, 128), FakeSamples({10, 20, 30}), dev),
      StatsForDevice(SpaceConfig::Make(10, 224), FakeSamples({}), dev),
  };
  RankSpaces(stats);
  std::vector<std::string> names;
  for (const auto& s : stats) names.push_back(s.config.Name());
  EXPECT_EQ(names, (std::vector<std::string>{"w0.9-r128", "w0.3-r128", "w0.4-r96",
                                             "w0.5-r96", "w1.0-r224"}));
  // Order-independent.
  std::reverse(stats.begin(), stats.end());
  RankSpaces(stats);
  EXPECT_EQ(stats.front().config.Name(), "w0.9-r128");
}

TEST(SpaceOptimizerPropertyTest, MoreSramNeverLosesNetworks) {
  const SpaceConfig c = SpaceConfig::Make(7, 176);
  const auto samples = ProfileSpace(c, 200, 4);
  int prev = -1;
  for (int64_t kib = 64; kib <= 1024; kib += 32) {
    const SpaceStats st =
        StatsForDevice(c, samples, DeviceProfile{"d", kib * 1024, 1 << 30});
    EXPECT_GE(st.satisfying, prev);
    prev = st.satisfying;
  }
  EXPECT_EQ(prev, 200);
}

TEST(SelectBestSpaceTest, UnlimitedPicksLargest) {
  const SpaceSelection sel = SelectBestSpace(UnlimitedDevice(), 20, 1);
  EXPECT_EQ(sel.best.Name(), "w1.0-r224");
  EXPECT_EQ(sel.ranked.size(), 108u);
}

TEST(SelectBestSpaceTest, EmptyDeviceIsAnError) {
  try {
    SelectBestSpace(DeviceProfile{"tiny", 1, 1}, 5, 1);
    FAIL() << "empty search accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySpace);
  }
}

TEST(SelectBestSpaceTest, JobsDoNotChangeRanking) {
  const DeviceProfile f412 = FindBuiltinDevice("f412");
  SpaceOptions serial;
  SpaceOptions parallel;
  parallel.jobs = 4;
  const SpaceSelection a = SelectBestSpace(f412, 40, 5, serial);
  const SpaceSelection b = SelectBestSpace(f412, 40, 5, parallel);
  ASSERT_EQ(a.ranked.size(), b.ranked.size());
  for (size_t i = 0; i < a.ranked.size(); ++i) {
    EXPECT_EQ(a.ranked[i].config, b.ranked[i].config);
    EXPECT_EQ(a.ranked[i].flops_samples, b.ranked[i].flops_samples);
  }
}

TEST(SelectBestSpaceTest, RegressionWinnerOnF746) {
  const SpaceSelection sel = SelectBestSpace(FindBuiltinDevice("f746"), 1000, 42);
  EXPECT_EQ(sel.best.Name(), "w0.7-r192");
}

}  // namespace
}  // namespace tinyco
