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

// Model-adaptive C99 emission: one specialized function per layer with the
// kernel loop unrolled over k*k taps, constants baked in, and a static arena
// laid out from the memory plan.

#ifndef TINYCO_CODEGEN_H_
#define TINYCO_CODEGEN_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/planner.h"
#include "tinyco/tensor.h"
#include "tinyco/weights.h"

namespace tinyco {

struct MemoryMapEntry {
  std::string buffer_name;  // "t3", "im2col_l0", "acc_l0", "scratch_l7"
  int64_t offset = 0;
  int64_t size = 0;
  int first_step = 0;  // layer indices during which the buffer is live
  int last_step = 0;
};

// Resolved placement of one layer, enough to execute it on a flat arena.
struct ScheduleStep {
  int layer = 0;
  int64_t input_offset = 0;
  int input_shift = 0;
  int64_t skip_offset = -1;
  int skip_shift = 0;
  int64_t output_offset = 0;  // equals input_offset when in place
  int output_shift = 0;
  int64_t scratch_offset = -1;  // in-place depthwise channel buffer
  int64_t im2col_offset = -1;
  int64_t accumulator_offset = -1;
  int tile_width = 0;
  bool inplace = false;
};

struct CodegenOutput {
  std::string source_text;   // model.c
  std::string header_text;   // model.h
  std::string weights_text;  // weights.c
  int64_t arena_bytes = 0;
  std::vector<MemoryMapEntry> memory_map;
  std::vector<ScheduleStep> schedule;
  int64_t input_offset = 0;
  int64_t output_offset = 0;
  int num_layers = 0;
  std::set<LayerKind> ops_emitted;
  int64_t estimated_code_bytes = 0;
};

enum class LayoutStrategy { kPingPong, kFirstFit, kLargestFirst };

// Places every buffer inside [0, arena_bytes) so that buffers with
// overlapping lifetimes never overlap. Throws Error(kLayout) on failure.
std::vector<MemoryMapEntry> LayoutBuffers(const NetworkArch& arch,
                                          const MemoryPlan& plan,
                                          int64_t arena_bytes,
                                          LayoutStrategy strategy);

// Throws Error(kLayout) if two co-live buffers overlap or a buffer leaves
// the arena.
void CheckMemoryMap(const std::vector<MemoryMapEntry>& map, int64_t arena_bytes);

// Emits model.c / model.h / weights.c. The arena is plan.peak_sram_bytes;
// strategies are tried in order until one lays out. Throws Error(kLayout)
// when none does.
CodegenOutput Generate(const NetworkArch& arch, const MemoryPlan& plan,
                       const WeightSet& weights);

// Code size proxy: fixed runtime + per-op-kind cost + per-layer constant.
int64_t EstimateCodeBytes(const CodegenOutput& output);
// Same proxy if every op kind had been emitted.
int64_t EstimateFullOpSetCodeBytes(const CodegenOutput& output);
int64_t OpCodeCost(LayerKind kind);
inline constexpr int64_t kRuntimeCodeBytes = 320;
inline constexpr int64_t kPerLayerCodeBytes = 48;

// Executes the emitted schedule on one flat arena of output.arena_bytes,
// at the emitted offsets.
TensorBuf InterpretSchedule(const NetworkArch& arch, const WeightSet& weights,
                            const CodegenOutput& output, const TensorBuf& input);

std::string MemoryMapJson(const CodegenOutput& output);

}  // namespace tinyco

#endif  // TINYCO_CODEGEN_H_
