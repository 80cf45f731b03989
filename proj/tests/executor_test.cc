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

#include <cstdint>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tinyco/error.h"
#include "tinyco/executor.h"
#include "tinyco/graph.h"
#include "tinyco/kernels.h"
#include "tinyco/planner.h"
#include "tinyco/rng.h"
#include "tinyco/tensor.h"
#include "tinyco/weights.h"

namespace tinyco {
namespace {

// Unit scales, zero points 0, requant multiplier exactly 1.
WeightSet UnitWeights(const NetworkArch& arch) {
  WeightSet ws;
  ws.tensor_quant.resize(arch.num_tensors());
  for (const LayerSpec& l : arch.layers) {
    LayerParams p;
    p.weights.assign(l.WeightCount(), 0);
    p.bias.assign(l.BiasCount(), 0);
    p.requant = QuantizeMultiplier(1.0);
    ws.layers.push_back(p);
  }
  return ws;
}

TensorBuf Filled(Shape shape, std::vector<int8_t> data) {
  TensorBuf t;
  t.shape = shape;
  t.data = std::move(data);
  return t;
}

NetworkArch FourLayerNet() {
  NetworkBuilder b("four", Shape{3, 16, 16});
  b.Conv(3, 1, 8, true);
  b.Depthwise(3, 1, true);
  b.Pointwise(16, false);
  b.AvgPool();
  return std::move(b).Build(16);
}

TEST(RunReferenceTest, PointwiseChannelMix) {
  NetworkBuilder b("mix", Shape{2, 2, 2});
  b.Pointwise(2, false);
  const NetworkArch arch = std::move(b).Build(2);
  WeightSet ws = UnitWeights(arch);
  ws.layers[0].weights = {1, 1,   // out0 = in0 + in1
                          0, 1};  // out1 = in1
  const TensorBuf in = Filled(arch.input_shape, {1, 2, 3, 4, 10, 20, -30, 40});
  const TensorBuf out = RunReference(arch, ws, in);
  EXPECT_EQ(out.data, (std::vector<int8_t>{11, 22, -27, 44, 10, 20, -30, 40}));
}

TEST(RunReferenceTest, DepthwiseAllOnesSums) {
  NetworkBuilder b("dw", Shape{1, 3, 3});
  b.Depthwise(3, 1, false);
  const NetworkArch arch = std::move(b).Build(1);
  WeightSet ws = UnitWeights(arch);
  ws.layers[0].weights.assign(9, 1);
  TensorBuf out = RunReference(arch, ws, Filled(arch.input_shape,
                                                {1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(out.at(0, 1, 1), 45);
  EXPECT_EQ(out.at(0, 0, 0), 1 + 2 + 4 + 5);  // zero padding
  out = RunReference(arch, ws, Filled(arch.input_shape, std::vector<int8_t>(9, 20)));
  EXPECT_EQ(out.at(0, 1, 1), 127);  // 180 saturates
  out = RunReference(arch, ws, Filled(arch.input_shape, std::vector<int8_t>(9, -20)));
  EXPECT_EQ(out.at(0, 1, 1), -128);
}

TEST(RunReferenceTest, PaddingUsesInputZeroPoint) {
  NetworkBuilder b("dw", Shape{1, 3, 3});
  b.Depthwise(3, 1, false);
  const NetworkArch arch = std::move(b).Build(1);
  WeightSet ws = UnitWeights(arch);
  ws.layers[0].weights.assign(9, 1);
  ws.layers[0].input_zero_point = 5;
  // Every input equals the zero point, so padded taps contribute nothing
  // either and the whole output is 0.
  const TensorBuf out =
      RunReference(arch, ws, Filled(arch.input_shape, std::vector<int8_t>(9, 5)));
  EXPECT_EQ(out.data, std::vector<int8_t>(9, 0));
}

TEST(RunReferenceTest, RejectsWrongInputShape) {
  const NetworkArch arch = FourLayerNet();
  const WeightSet ws = GenWeights(arch, 7);
  const TensorBuf in = RandomTensor(Shape{3, 8, 8}, {}, 1);
  try {
    RunReference(arch, ws, in);
    FAIL() << "shape mismatch accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(RunReferenceTest, GoldenFourLayerHash) {
  const NetworkArch arch = FourLayerNet();
  const WeightSet ws = GenWeights(arch, 7);
  const TensorBuf in = RandomTensor(arch.input_shape, ws.tensor_quant[0], 7);
  const TensorBuf out = RunReference(arch, ws, in);
  EXPECT_EQ(out.shape, (Shape{16, 1, 1}));
  EXPECT_EQ(TensorHash(out), 0x3825aa3edd8812cdULL);
}

TEST(GenWeightsTest, DeterministicPerSeed) {
  const NetworkArch arch = BuildNetwork(testing::RandomGenes(3, 96));
  EXPECT_EQ(SerializeWeights(GenWeights(arch, 0)),
            SerializeWeights(GenWeights(arch, 0)));
  EXPECT_NE(SerializeWeights(GenWeights(arch, 0)),
            SerializeWeights(GenWeights(arch, 1)));
  EXPECT_TRUE(GenWeights(arch, 0).bn_folded);
}

TEST(GenWeightsTest, ZeroWeightsGiveBiasConstant) {
  std::vector<NetworkArch> nets;
  {
    NetworkBuilder b("conv", Shape{3, 9, 9});
    b.Conv(3, 2, 8, true);
    nets.push_back(std::move(b).Build(8));
  }
  {
    NetworkBuilder b("dw", Shape{8, 9, 9});
    b.Depthwise(5, 1, true);
    nets.push_back(std::move(b).Build(8));
  }
  {
    NetworkBuilder b("pw", Shape{8, 9, 9});
    b.Pointwise(24, false);
    nets.push_back(std::move(b).Build(24));
  }
  for (const NetworkArch& arch : nets) {
    SCOPED_TRACE(arch.name);
    const WeightSet ws = GenWeights(arch, 5, {.zero_weights = true});
    const LayerParams& p = ws.layers[0];
    const TensorBuf out =
        RunReference(arch, ws, RandomTensor(arch.input_shape, ws.tensor_quant[0], 9));
    for (int c = 0; c < out.shape.c; ++c) {
      const int8_t want = SaturateToInt8(
          p.output_zero_point + ApplyRequant(p.bias[c], p.requant), p.act_min,
          p.act_max);
      for (int y = 0; y < out.shape.h; ++y) {
        for (int x = 0; x < out.shape.w; ++x) ASSERT_EQ(out.at(c, y, x), want);
      }
    }
  }
}

TEST(RunScheduledTest, MatchesReferenceOnRandomNetworks) {
  for (uint64_t s = 0; s < 20; ++s) {
    const NetworkArch arch = BuildNetwork(testing::RandomGenes(s, 80));
    const WeightSet ws = GenWeights(arch, s);
    const TensorBuf in = RandomTensor(arch.input_shape, ws.tensor_quant[0], s + 100);
    const TensorBuf ref = RunReference(arch, ws, in);
    for (bool inplace : {true, false}) {
      const MemoryPlan plan = PlanMemory(arch, inplace);
      const ScheduledResult got = RunScheduled(arch, ws, in, plan);
      ASSERT_EQ(got.output.data, ref.data) << s << " inplace=" << inplace;
      ASSERT_LE(got.measured_peak_bytes, plan.peak_sram_bytes);
    }
  }
}

TEST(RunScheduledTest, DepthwiseExamplePeak) {
  NetworkBuilder b("dw16", Shape{16, 8, 8});
  b.Depthwise(3, 1, true);
  const NetworkArch arch = std::move(b).Build(16);
  const WeightSet ws = GenWeights(arch, 2);
  const TensorBuf in = RandomTensor(arch.input_shape, ws.tensor_quant[0], 3);
  MemoryPlan plan = PlanMemory(arch, true);
  const ScheduledResult got = RunScheduled(arch, ws, in, plan);
  EXPECT_LE(got.measured_peak_bytes, 1088);
  EXPECT_EQ(got.output.data, RunReference(arch, ws, in).data);

  plan.peak_sram_bytes = got.measured_peak_bytes - 1;
  try {
    RunScheduled(arch, ws, in, plan);
    FAIL() << "arena overflow not detected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kArenaOverflow);
  }
}

TEST(KernelsTest, InplaceRotationMatchesTwoBuffers) {
  for (int k : {3, 5, 7}) {
    NetworkBuilder b("dw", Shape{6, 7, 7});
    b.Depthwise(k, 1, true);
    const NetworkArch arch = std::move(b).Build(6);
    const LayerSpec& l = arch.layers[0];
    const WeightSet ws = GenWeights(arch, k);
    TensorBuf in = RandomTensor(arch.input_shape, ws.tensor_quant[0], k);
    std::vector<int8_t> expect(in.data.size());
    kernels::Depthwise(l, ws.layers[0], {in.data.data(), l.input_shape, 0},
                       {expect.data(), l.output_shape, 0});
    for (int shift = 0; shift < 6; ++shift) {
      // Start from a rotated layout as left by a previous in-place layer.
      std::vector<int8_t> io(in.data.size());
      kernels::TensorView view{io.data(), l.input_shape, shift};
      for (int c = 0; c < 6; ++c) {
        std::copy_n(in.data.data() + c * 49, 49, view.Channel(c));
      }
      std::vector<int8_t> scratch(49);
      kernels::ShadowTracker shadow;
      const int out_shift =
          kernels::DepthwiseInplace(l, ws.layers[0], view, scratch, &shadow);
      EXPECT_EQ(out_shift, (shift + 5) % 6);
      kernels::TensorView out{io.data(), l.output_shape, out_shift};
      for (int c = 0; c < 6; ++c) {
        ASSERT_TRUE(std::equal(out.Channel(c), out.Channel(c) + 49,
                               expect.data() + c * 49))
            << "k=" << k << " shift=" << shift << " c=" << c;
      }
    }
  }
}

TEST(KernelsTest, ShadowTrackerFlagsStaleReads) {
  kernels::ShadowTracker shadow;
  shadow.Reset(4);
  shadow.MarkWritten(2);
  shadow.CheckRead(1);
  try {
    shadow.CheckRead(2);
    FAIL() << "stale read not flagged";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInplaceViolation);
  }
}

TEST(ArenaTest, TracksPeakAndCapacity) {
  Arena arena(100);
  const int a = arena.Allocate(60);
  const int b = arena.Allocate(40);
  EXPECT_EQ(arena.peak_bytes(), 100);
  arena.Free(a);
  EXPECT_EQ(arena.live_bytes(), 40);
  EXPECT_THROW(arena.Allocate(61), Error);
  arena.Free(b);
  EXPECT_EQ(arena.peak_bytes(), 100);
}

TEST(TensorFileTest, RoundTripAndErrors) {
  const TensorBuf t = RandomTensor(Shape{3, 5, 4}, {}, 8);
  const auto bytes = EncodeTensorFile(t);
  ASSERT_EQ(bytes.size(), 12u + 60u);
  EXPECT_EQ(bytes[0], 3);
  const TensorBuf back = DecodeTensorFile(bytes);
  EXPECT_EQ(back.shape, t.shape);
  EXPECT_EQ(back.data, t.data);
  std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 1);
  try {
    DecodeTensorFile(cut);
    FAIL() << "truncated tensor accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
}

}  // namespace
}  // namespace tinyco
