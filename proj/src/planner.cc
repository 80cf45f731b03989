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

#include "tinyco/planner.h"

#include <algorithm>
#include <cctype>
#include <limits>

#include "tinyco/error.h"

namespace tinyco {

void DeviceProfile::Validate() const {
  if (sram_bytes <= 0 || flash_bytes <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "device '" + name + "' needs positive SRAM and Flash budgets");
  }
}

const std::vector<DeviceProfile>& BuiltinDevices() {
  static const std::vector<DeviceProfile> kDevices = {
      {"stm32f412", 256 * 1024, 1024 * 1024},
      {"stm32f746", 320 * 1024, 1024 * 1024},
      {"stm32f765", 512 * 1024, 1024 * 1024},
      {"stm32h743", 512 * 1024, 2048 * 1024},
  };
  return kDevices;
}

DeviceProfile FindBuiltinDevice(const std::string& name) {
  std::string key;
  for (char c : name) key += static_cast<char>(std::tolower(c));
  for (const DeviceProfile& d : BuiltinDevices()) {
    if (key == d.name || "stm32" + key == d.name) return d;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown device '" + name + "'");
}

DeviceProfile UnlimitedDevice() {
  constexpr int64_t kMax = std::numeric_limits<int64_t>::max();
  return {"unlimited", kMax, kMax};
}

int64_t Im2colRequirement(const NetworkArch& arch) {
  int64_t m = 0;
  for (const LayerSpec& l : arch.layers) {
    if (!l.UsesIm2col()) continue;
    m = std::max(m, int64_t{l.kernel_size} * l.kernel_size * l.in_channels);
  }
  return m;
}

int TileWidth(const LayerSpec& layer, int64_t im2col_elements) {
  if (!layer.UsesIm2col()) {
    throw Error(ErrorCode::kInvalidArgument,
                "tile width is only defined for im2col layers");
  }
  const int64_t column = int64_t{layer.kernel_size} * layer.kernel_size *
                         layer.in_channels;
  if (im2col_elements < column) {
    throw Error(ErrorCode::kTileMismatch,
                "im2col buffer of " + std::to_string(im2col_elements) +
                    " elements cannot hold one column of " +
                    std::to_string(column));
  }
  return static_cast<int>(
      std::min<int64_t>(im2col_elements / column, layer.output_shape.w));
}

bool CanRunInplace(const NetworkArch& arch, int layer) {
  const LayerSpec& l = arch.layers.at(layer);
  return l.kind == LayerKind::kDepthwiseConv2d && l.stride == 1 &&
         l.input_shape == l.output_shape && arch.LastUse(layer) == layer;
}

MemoryPlan PlanMemory(const NetworkArch& arch, bool inplace_dw) {
  MemoryPlan plan;
  plan.inplace_dw = inplace_dw;
  plan.im2col_buffer_bytes = Im2colRequirement(arch);
  plan.flash_bytes = ModelSizeBytes(arch, 8);

  const int n = static_cast<int>(arch.layers.size());
  std::vector<int> last_use(n + 1, -1);
  for (int i = 0; i < n; ++i) {
    last_use[i] = std::max(last_use[i], i);
    const int skip = arch.layers[i].skip_tensor;
    if (skip >= 0) last_use[skip] = std::max(last_use[skip], i);
  }

  plan.layers.reserve(n);
  for (int i = 0; i < n; ++i) {
    const LayerSpec& l = arch.layers[i];
    LayerPlan lp;
    lp.layer_index = i;
    lp.kind = l.kind;
    lp.input_bytes = l.input_shape.elements();
    if (l.kind == LayerKind::kResidualAdd) {
      lp.input_bytes += arch.TensorShape(l.skip_tensor).elements();
    }
    lp.inplace = inplace_dw && CanRunInplace(arch, i);
    if (lp.inplace) {
      lp.scratch_bytes = int64_t{l.output_shape.h} * l.output_shape.w;
    } else {
      lp.output_bytes = l.output_shape.elements();
    }
    if (l.UsesIm2col()) {
      lp.tile_width = TileWidth(l, plan.im2col_buffer_bytes);
      lp.im2col_bytes = plan.im2col_buffer_bytes;
      lp.accumulator_bytes = int64_t{4} * lp.tile_width * l.out_channels;
    }
    // Tensors produced earlier that stay alive across this layer without
    // being one of its operands: pending residual sources.
    for (int t = 0; t <= i; ++t) {
      if (t == i || t == l.skip_tensor) continue;
      if (last_use[t] > i) lp.resident_skip_bytes += arch.TensorShape(t).elements();
    }
    lp.extra_buffer_bytes = lp.scratch_bytes + lp.im2col_bytes + lp.accumulator_bytes;
    lp.activation_bytes = lp.input_bytes + lp.output_bytes + lp.scratch_bytes;
    lp.layer_peak_bytes = lp.input_bytes + lp.output_bytes +
                          lp.extra_buffer_bytes + lp.resident_skip_bytes;
    if (lp.layer_peak_bytes > plan.peak_sram_bytes) {
      plan.peak_sram_bytes = lp.layer_peak_bytes;
      plan.peak_layer = i;
    }
    plan.layers.push_back(lp);
  }
  return plan;
}

FitResult CheckFit(const MemoryPlan& plan, const DeviceProfile& device) {
  FitResult r;
  r.sram_margin = device.sram_bytes - plan.peak_sram_bytes;
  r.flash_margin = device.flash_bytes - plan.flash_bytes;
  r.fits = r.sram_margin >= 0 && r.flash_margin >= 0;
  return r;
}

std::vector<int64_t> BlockActivationBytes(const NetworkArch& arch,
                                          const MemoryPlan& plan) {
  std::vector<int64_t> out;
  out.reserve(arch.blocks.size());
  for (const Block& b : arch.blocks) {
    int64_t peak = 0;
    for (int i = b.first_layer; i < b.first_layer + b.num_layers; ++i) {
      const LayerPlan& lp = plan.layers.at(i);
      peak = std::max(peak, lp.activation_bytes + lp.resident_skip_bytes);
    }
    out.push_back(peak);
  }
  return out;
}

double StageActivationImbalance(const NetworkArch& arch, const MemoryPlan& plan,
                                int first_stage, int last_stage) {
  const std::vector<int64_t> per_block = BlockActivationBytes(arch, plan);
  int64_t max_bytes = 0;
  double sum = 0;
  int count = 0;
  for (size_t b = 0; b < arch.blocks.size(); ++b) {
    const Block& blk = arch.blocks[b];
    if (blk.kind != "mbconv" || blk.stage < first_stage || blk.stage > last_stage) {
      continue;
    }
    max_bytes = std::max(max_bytes, per_block[b]);
    sum += static_cast<double>(per_block[b]);
    ++count;
  }
  if (count == 0 || sum <= 0) return 0.0;
  return static_cast<double>(max_bytes) / (sum / count);
}

}  // namespace tinyco
