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
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tinyco/error.h"
#include "tinyco/graph.h"
#include "tinyco/planner.h"
#include "tinyco/serialize.h"

namespace tinyco {
namespace {

constexpr int64_t kKiB = 1024;

LayerSpec ConvSpec(int k, int cin, int out_w) {
  LayerSpec l;
  l.kind = LayerKind::kConv2d;
  l.kernel_size = k;
  l.padding = k / 2;
  l.in_channels = cin;
  l.out_channels = 8;
  l.input_shape = Shape{cin, out_w, out_w};
  l.output_shape = Shape{8, out_w, out_w};
  return l;
}

NetworkArch DepthwiseOnly() {
  NetworkBuilder b("dw16", Shape{16, 8, 8});
  b.Depthwise(3, 1, true);
  return std::move(b).Build(16);
}

ArchGenes MixedGenes() {
  ArchGenes g;
  g.space = SpaceConfig::Make(5, 96);
  g.stages[0] = {2, {3, 5, 7, 3}, {3, 4, 6, 3}};
  g.stages[1] = {3, {5, 7, 3, 5}, {6, 3, 4, 6}};
  g.stages[2] = {4, {7, 3, 5, 7}, {4, 6, 3, 4}};
  g.stages[3] = {2, {3, 3, 5, 5}, {6, 6, 3, 3}};
  g.stages[4] = {3, {5, 3, 7, 3}, {3, 4, 6, 6}};
  return g;
}

std::vector<int64_t> StageBlocks(const NetworkArch& arch, const MemoryPlan& plan) {
  const auto per_block = BlockActivationBytes(arch, plan);
  std::vector<int64_t> out;
  for (size_t i = 0; i < arch.blocks.size(); ++i) {
    const Block& b = arch.blocks[i];
    if (b.kind == "mbconv" && (b.stage == 1 || b.stage == 2)) {
      out.push_back(per_block[i]);
    }
  }
  return out;
}

TEST(Im2colRequirementTest, MaxOverSpatialConvs) {
  NetworkBuilder b("two-conv", Shape{16, 8, 8});
  b.Conv(3, 1, 4, true);
  b.Conv(5, 1, 8, true);
  const NetworkArch arch = std::move(b).Build(8);
  EXPECT_EQ(Im2colRequirement(arch), 144);
}

TEST(Im2colRequirementTest, PointwiseOnlyNeedsNone) {
  NetworkBuilder b("pw", Shape{8, 4, 4});
  b.Pointwise(16, false);
  const NetworkArch arch = std::move(b).Build(16);
  EXPECT_EQ(Im2colRequirement(arch), 0);
  const MemoryPlan plan = PlanMemory(arch, true);
  EXPECT_EQ(plan.layers[0].tile_width, 0);
}

TEST(TileWidthTest, FloorOfRatio) {
  EXPECT_EQ(TileWidth(ConvSpec(3, 8, 16), 144), 2);
  EXPECT_EQ(TileWidth(ConvSpec(3, 16, 16), 144), 1);
  EXPECT_EQ(TileWidth(ConvSpec(3, 2, 5), 144), 5);  // clamped to the width
}

TEST(TileWidthTest, RejectsForeignLayer) {
  try {
    TileWidth(ConvSpec(3, 16, 16), 100);
    FAIL() << "M below one column accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTileMismatch);
  }
}

TEST(PlanMemoryTest, InplaceDepthwiseCostsNPlusOneChannels) {
  const NetworkArch arch = DepthwiseOnly();
  const MemoryPlan off = PlanMemory(arch, false);
  const MemoryPlan on = PlanMemory(arch, true);
  EXPECT_FALSE(off.layers[0].inplace);
  EXPECT_EQ(off.layers[0].activation_bytes, 2048);
  EXPECT_EQ(off.peak_sram_bytes, 2048);
  EXPECT_TRUE(on.layers[0].inplace);
  EXPECT_EQ(on.layers[0].activation_bytes, 1088);
  EXPECT_EQ(on.layers[0].scratch_bytes, 64);
  EXPECT_EQ(on.peak_sram_bytes, 1088);
}

TEST(PlanMemoryTest, StrideTwoDepthwiseKeepsTwoBuffers) {
  NetworkBuilder b("dw-s2", Shape{16, 8, 8});
  b.Depthwise(3, 2, true);
  const NetworkArch arch = std::move(b).Build(16);
  const MemoryPlan plan = PlanMemory(arch, true);
  EXPECT_FALSE(plan.layers[0].inplace);
  EXPECT_EQ(plan.layers[0].activation_bytes, 16 * 64 + 16 * 16);
}

TEST(PlanMemoryTest, SinglePointwisePeak) {
  NetworkBuilder b("pw", Shape{8, 4, 4});
  b.Pointwise(16, false);
  const MemoryPlan plan = PlanMemory(std::move(b).Build(16), true);
  EXPECT_EQ(plan.peak_sram_bytes, 384);
}

TEST(PlanMemoryTest, MatchesIndependentOracle) {
  const NetworkArch arch = BuildNetwork(MixedGenes());
  const MemoryPlan on = PlanMemory(arch, true);
  const MemoryPlan off = PlanMemory(arch, false);
  EXPECT_EQ(on.im2col_buffer_bytes, 27);
  EXPECT_EQ(on.flash_bytes, 586080);
  EXPECT_EQ(on.peak_sram_bytes, 73728);
  EXPECT_EQ(off.peak_sram_bytes, 82944);
  EXPECT_EQ(StageBlocks(arch, on),
            (std::vector<int64_t>{73728, 55296, 69120, 17280, 20736}));
  EXPECT_NEAR(StageActivationImbalance(arch, on), 1.5609756, 1e-6);
}

TEST(PlanMemoryTest, MobileNetV2ImbalanceAtW03) {
  const NetworkArch arch = BuildMobileNetV2(SpaceConfig::Make(3, 144));
  const MemoryPlan plan = PlanMemory(arch, true);
  EXPECT_EQ(plan.peak_sram_bytes, 311040);
  EXPECT_EQ(plan.flash_bytes, 620032);
  EXPECT_EQ(StageBlocks(arch, plan),
            (std::vector<int64_t>{311040, 82944, 77760, 20736, 20736}));
  const double ratio = StageActivationImbalance(arch, plan);
  EXPECT_GE(ratio, 2.0);
  EXPECT_NEAR(ratio, 100.0 / 33.0, 1e-9);
}

TEST(CheckFitTest, DeviceBudgets) {
  const DeviceProfile f746 = FindBuiltinDevice("stm32f746");
  EXPECT_EQ(f746.sram_bytes, 320 * kKiB);
  EXPECT_EQ(f746.flash_bytes, 1024 * kKiB);
  MemoryPlan plan;
  plan.peak_sram_bytes = 300 * kKiB;
  plan.flash_bytes = 900 * kKiB;
  FitResult fit = CheckFit(plan, f746);
  EXPECT_TRUE(fit.fits);
  EXPECT_EQ(fit.sram_margin, 20 * kKiB);
  EXPECT_EQ(fit.flash_margin, 124 * kKiB);

  const DeviceProfile h743 = FindBuiltinDevice("H743");
  EXPECT_EQ(h743.sram_bytes, 512 * kKiB);
  plan.flash_bytes = 0;
  plan.peak_sram_bytes = 466 * kKiB;
  EXPECT_TRUE(CheckFit(plan, h743).fits);
  plan.peak_sram_bytes = 519 * kKiB;
  fit = CheckFit(plan, h743);
  EXPECT_FALSE(fit.fits);
  EXPECT_EQ(fit.sram_margin, -7 * kKiB);
}

TEST(CheckFitTest, FlashAloneCanFail) {
  MemoryPlan plan;
  plan.peak_sram_bytes = 1;
  plan.flash_bytes = 1024 * kKiB + 1;
  EXPECT_FALSE(CheckFit(plan, FindBuiltinDevice("f412")).fits);
  EXPECT_TRUE(CheckFit(plan, FindBuiltinDevice("h743")).fits);
}

TEST(DeviceTest, BuiltinsAndLookup) {
  const auto& devs = BuiltinDevices();
  ASSERT_EQ(devs.size(), 4u);
  EXPECT_EQ(devs[0].sram_bytes, 256 * kKiB);
  EXPECT_EQ(devs[2].sram_bytes, 512 * kKiB);
  EXPECT_EQ(devs[2].flash_bytes, 1024 * kKiB);
  EXPECT_EQ(devs[3].flash_bytes, 2048 * kKiB);
  EXPECT_THROW(FindBuiltinDevice("esp32"), Error);
  DeviceProfile bad{"bad", 0, 10};
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(PlannerPropertyTest, RandomNetworks) {
  for (uint64_t s = 0; s < 10000; ++s) {
    const NetworkArch arch = BuildNetwork(testing::RandomGenes(s));
    const MemoryPlan on = PlanMemory(arch, true);
    const MemoryPlan off = PlanMemory(arch, false);
    ASSERT_LE(on.peak_sram_bytes, off.peak_sram_bytes) << s;
    const int64_t m = on.im2col_buffer_bytes;
    int64_t peak = 0;
    for (const LayerPlan& lp : on.layers) {
      const LayerSpec& l = arch.layers[lp.layer_index];
      peak = std::max(peak, lp.layer_peak_bytes);
      ASSERT_EQ(lp.layer_peak_bytes, lp.input_bytes + lp.output_bytes +
                                         lp.extra_buffer_bytes +
                                         lp.resident_skip_bytes);
      if (!l.UsesIm2col()) continue;
      const int64_t col = int64_t{l.kernel_size} * l.kernel_size * l.in_channels;
      ASSERT_GE(lp.tile_width, 1);
      if (col == m) ASSERT_EQ(lp.tile_width, 1);
    }
    ASSERT_EQ(peak, on.peak_sram_bytes);
  }
}

TEST(PlannerPropertyTest, SkipTensorStaysResident) {
  for (uint64_t s = 0; s < 500; ++s) {
    const NetworkArch arch = BuildNetwork(testing::RandomGenes(s));
    const MemoryPlan plan = PlanMemory(arch, true);
    for (size_t j = 0; j < arch.layers.size(); ++j) {
      const LayerSpec& add = arch.layers[j];
      if (add.kind != LayerKind::kResidualAdd) continue;
      const int t = add.skip_tensor;
      const int64_t bytes = arch.TensorShape(t).elements();
      // Layer t reads the skip tensor as its main input; later layers up to
      // the add must carry it as resident.
      for (size_t i = t + 1; i < j; ++i) {
        ASSERT_GE(plan.layers[i].resident_skip_bytes, bytes) << s << " " << i;
      }
      ASSERT_EQ(plan.layers[j].input_bytes, 2 * bytes);
    }
  }
}

TEST(PlannerPropertyTest, Deterministic) {
  for (uint64_t s = 0; s < 100; ++s) {
    const NetworkArch arch = BuildNetwork(testing::RandomGenes(s));
    EXPECT_EQ(DumpJson(PlanToJson(PlanMemory(arch, true))),
              DumpJson(PlanToJson(PlanMemory(arch, true))));
  }
}

}  // namespace
}  // namespace tinyco
