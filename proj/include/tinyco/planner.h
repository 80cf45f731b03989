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

// Model-adaptive memory scheduling: one im2col buffer sized for the widest
// column in the whole network, per-layer width tiling derived from it,
// in-place depthwise convolution, and peak SRAM / Flash accounting.

#ifndef TINYCO_PLANNER_H_
#define TINYCO_PLANNER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tinyco/graph.h"

namespace tinyco {

struct DeviceProfile {
  std::string name;
  int64_t sram_bytes = 0;
  int64_t flash_bytes = 0;

  // Throws Error(kInvalidArgument) unless both budgets are positive.
  void Validate() const;
};

// STM32F412, STM32F746, STM32F765 and STM32H743, smallest first.
const std::vector<DeviceProfile>& BuiltinDevices();
// Looks up a built-in profile by case-insensitive name ("stm32f746" or "f746").
DeviceProfile FindBuiltinDevice(const std::string& name);
DeviceProfile UnlimitedDevice();

struct LayerPlan {
  int layer_index = 0;
  LayerKind kind = LayerKind::kConv2d;
  int tile_width = 0;  // 0 when the layer does not use im2col
  bool inplace = false;
  int64_t input_bytes = 0;   // both operands for ResidualAdd
  int64_t output_bytes = 0;  // 0 when the output overwrites the input
  int64_t scratch_bytes = 0;      // one-channel buffer of in-place depthwise
  int64_t im2col_bytes = 0;
  int64_t accumulator_bytes = 0;  // int32 per tile column and out channel
  int64_t extra_buffer_bytes = 0;  // scratch + im2col + accumulator
  int64_t activation_bytes = 0;    // input + output + scratch
  int64_t resident_skip_bytes = 0;
  int64_t layer_peak_bytes = 0;
};

struct MemoryPlan {
  bool inplace_dw = true;
  int64_t im2col_buffer_bytes = 0;
  std::vector<LayerPlan> layers;
  int64_t peak_sram_bytes = 0;
  int peak_layer = 0;
  int64_t flash_bytes = 0;
};

// M = max over im2col layers of k^2 * Cin, in int8 elements (== bytes).
int64_t Im2colRequirement(const NetworkArch& arch);

// floor(M / (k^2 * Cin)) clamped to the output width. Throws
// Error(kTileMismatch) if M cannot hold one column of this layer.
int TileWidth(const LayerSpec& layer, int64_t im2col_elements);

// Whether `layer` may run in place: stride-1 depthwise with equal spatial
// extents whose input has no later reader.
bool CanRunInplace(const NetworkArch& arch, int layer);

MemoryPlan PlanMemory(const NetworkArch& arch, bool inplace_dw);

struct FitResult {
  bool fits = false;
  int64_t sram_margin = 0;
  int64_t flash_margin = 0;
};

FitResult CheckFit(const MemoryPlan& plan, const DeviceProfile& device);

// Per-block activation footprint (tensors only, no im2col or accumulator
// buffers): max over the block's layers of activation + resident bytes.
std::vector<int64_t> BlockActivationBytes(const NetworkArch& arch,
                                          const MemoryPlan& plan);

// max / mean of BlockActivationBytes over inverted-bottleneck blocks of
// stages [first_stage, last_stage]. Returns 0 when no block qualifies.
double StageActivationImbalance(const NetworkArch& arch, const MemoryPlan& plan,
                                int first_stage = 1, int last_stage = 2);

}  // namespace tinyco

#endif  // TINYCO_PLANNER_H_
