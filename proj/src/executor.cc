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

#include "tinyco/executor.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "tinyco/error.h"
#include "tinyco/kernels.h"
#include "tinyco/quant.h"

namespace tinyco {

namespace {

int8_t Requantize(int64_t acc, const LayerParams& p) {
  return SaturateToInt8(p.output_zero_point + ApplyRequant(acc, p.requant),
                        p.act_min, p.act_max);
}

// Reference convolution covering Conv2d, depthwise and pointwise layers.
// Padding is materialized as the input zero point.
void ReferenceConv(const LayerSpec& l, const LayerParams& p, const TensorBuf& in,
                   TensorBuf& out) {
  const bool depthwise = l.kind == LayerKind::kDepthwiseConv2d;
  const int k = l.kernel_size;
  const int group_in = depthwise ? 1 : l.in_channels;
  for (int co = 0; co < l.out_channels; ++co) {
    for (int oy = 0; oy < l.output_shape.h; ++oy) {
      for (int ox = 0; ox < l.output_shape.w; ++ox) {
        int64_t acc = p.bias[co];
        for (int g = 0; g < group_in; ++g) {
          const int ci = depthwise ? co : g;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int iy = oy * l.stride - l.padding + ky;
              const int ix = ox * l.stride - l.padding + kx;
              int x = p.input_zero_point;
              if (iy >= 0 && iy < in.shape.h && ix >= 0 && ix < in.shape.w) {
                x = in.at(ci, iy, ix);
              }
              const int64_t widx = ((int64_t{co} * group_in + g) * k + ky) * k + kx;
              acc += int64_t{x - p.input_zero_point} * p.weights[widx];
            }
          }
        }
        out.data[(int64_t{co} * l.output_shape.h + oy) * l.output_shape.w + ox] =
            Requantize(acc, p);
      }
    }
  }
}

}  // namespace

TensorBuf RunReference(const NetworkArch& arch, const WeightSet& weights,
                       const TensorBuf& input) {
  arch.Validate();
  weights.CheckAgainst(arch);
  if (!(input.shape == arch.input_shape) ||
      static_cast<int64_t>(input.data.size()) != input.shape.elements()) {
    throw Error(ErrorCode::kShapeMismatch, "input does not match the network stem");
  }
  std::vector<TensorBuf> tensors(arch.num_tensors());
  tensors[0] = input;
  tensors[0].quant = weights.tensor_quant[0];
  for (size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& l = arch.layers[i];
    const LayerParams& p = weights.layers[i];
    const TensorBuf& in = tensors[i];
    TensorBuf& out = tensors[i + 1];
    out.shape = l.output_shape;
    out.quant = weights.tensor_quant[i + 1];
    out.data.assign(out.shape.elements(), 0);
    switch (l.kind) {
      case LayerKind::kConv2d:
      case LayerKind::kDepthwiseConv2d:
      case LayerKind::kPointwiseConv2d:
        ReferenceConv(l, p, in, out);
        break;
      case LayerKind::kFullyConnected:
        for (int co = 0; co < l.out_channels; ++co) {
          int64_t acc = p.bias[co];
          for (int ci = 0; ci < l.in_channels; ++ci) {
            acc += int64_t{in.data[ci] - p.input_zero_point} *
                   p.weights[int64_t{co} * l.in_channels + ci];
          }
          out.data[co] = Requantize(acc, p);
        }
        break;
      case LayerKind::kAvgPool:
        for (int c = 0; c < l.in_channels; ++c) {
          int64_t acc = 0;
          for (int y = 0; y < in.shape.h; ++y) {
            for (int x = 0; x < in.shape.w; ++x) acc += in.at(c, y, x) - p.input_zero_point;
          }
          out.data[c] = Requantize(acc, p);
        }
        break;
      case LayerKind::kResidualAdd: {
        const TensorBuf& skip = tensors[l.skip_tensor];
        for (size_t e = 0; e < out.data.size(); ++e) {
          const int64_t acc =
              int64_t{in.data[e] - p.input_zero_point} * p.input_multiplier +
              int64_t{skip.data[e] - p.skip_zero_point} * p.skip_multiplier;
          out.data[e] = Requantize(acc, p);
        }
        break;
      }
    }
  }
  return tensors.back();
}

// ---------------------------------------------------------------------------
// Arena

int Arena::Allocate(int64_t bytes) {
  if (bytes < 0 || live_ + bytes > capacity_) {
    throw Error(ErrorCode::kArenaOverflow,
                "arena overflow: " + std::to_string(live_) + " live + " +
                    std::to_string(bytes) + " requested > capacity " +
                    std::to_string(capacity_));
  }
  live_ += bytes;
  peak_ = std::max(peak_, live_);
  const int handle = next_++;
  blocks_.emplace(handle, std::vector<int8_t>(bytes));
  return handle;
}

void Arena::Free(int handle) {
  auto it = blocks_.find(handle);
  if (it == blocks_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "double free in arena");
  }
  live_ -= static_cast<int64_t>(it->second.size());
  blocks_.erase(it);
}

std::span<int8_t> Arena::Get(int handle) {
  auto it = blocks_.find(handle);
  if (it == blocks_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "stale arena handle");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Scheduled executor

ScheduledResult RunScheduled(const NetworkArch& arch, const WeightSet& weights,
                             const TensorBuf& input, const MemoryPlan& plan,
                             const ExecOptions& options) {
  arch.Validate();
  weights.CheckAgainst(arch);
  if (!(input.shape == arch.input_shape) ||
      static_cast<int64_t>(input.data.size()) != input.shape.elements()) {
    throw Error(ErrorCode::kShapeMismatch, "input does not match the network stem");
  }
  const int n = static_cast<int>(arch.layers.size());
  if (static_cast<int>(plan.layers.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "plan was built for a different network");
  }

  Arena arena(plan.peak_sram_bytes);
  kernels::ShadowTracker shadow;
  std::vector<int> handle(n + 1, -1);
  std::vector<int> shift(n + 1, 0);
  std::vector<int> last_use(n + 1, -1);
  for (int i = 0; i < n; ++i) {
    last_use[i] = std::max(last_use[i], i);
    if (arch.layers[i].skip_tensor >= 0) {
      last_use[arch.layers[i].skip_tensor] =
          std::max(last_use[arch.layers[i].skip_tensor], i);
    }
  }

  auto view = [&](int tensor) {
    return kernels::TensorView{arena.Get(handle[tensor]).data(),
                               arch.TensorShape(tensor), shift[tensor]};
  };

  handle[0] = arena.Allocate(input.shape.elements());
  std::memcpy(arena.Get(handle[0]).data(), input.data.data(), input.data.size());

  for (int i = 0; i < n; ++i) {
    const LayerSpec& l = arch.layers[i];
    const LayerParams& p = weights.layers[i];
    const LayerPlan& lp = plan.layers[i];
    if (lp.layer_index != i || lp.kind != l.kind) {
      throw Error(ErrorCode::kShapeMismatch, "plan was built for a different network");
    }
    if (lp.inplace) {
      if (!CanRunInplace(arch, i)) {
        throw Error(ErrorCode::kInplaceViolation,
                    "plan marks layer " + std::to_string(i) + " in place illegally");
      }
      const int scratch = arena.Allocate(lp.scratch_bytes);
      shift[i + 1] = kernels::DepthwiseInplace(
          l, p, view(i), arena.Get(scratch), options.shadow_check ? &shadow : nullptr);
      arena.Free(scratch);
      handle[i + 1] = handle[i];
      handle[i] = -1;
      continue;
    }

    handle[i + 1] = arena.Allocate(l.output_shape.elements());
    const kernels::TensorView out = view(i + 1);
    switch (l.kind) {
      case LayerKind::kConv2d:
        if (l.UsesIm2col()) {
          const int cols = arena.Allocate(lp.im2col_bytes);
          const int accs = arena.Allocate(lp.accumulator_bytes);
          kernels::ConvIm2col(l, p, view(i), out, lp.tile_width, arena.Get(cols),
                              arena.Get(accs));
          arena.Free(accs);
          arena.Free(cols);
        } else {
          kernels::ConvDirect(l, p, view(i), out);
        }
        break;
      case LayerKind::kDepthwiseConv2d:
        kernels::Depthwise(l, p, view(i), out);
        break;
      case LayerKind::kPointwiseConv2d:
        kernels::Pointwise(l, p, view(i), out);
        break;
      case LayerKind::kAvgPool:
        kernels::AvgPool(l, p, view(i), out);
        break;
      case LayerKind::kFullyConnected:
        kernels::FullyConnected(l, p, view(i), out);
        break;
      case LayerKind::kResidualAdd:
        kernels::ResidualAdd(l, p, view(i), view(l.skip_tensor), out);
        break;
    }
    for (int t : {i, l.skip_tensor}) {
      if (t >= 0 && handle[t] >= 0 && last_use[t] == i) {
        arena.Free(handle[t]);
        handle[t] = -1;
      }
    }
  }

  ScheduledResult result;
  const kernels::TensorView last = view(n);
  result.output.shape = last.shape;
  result.output.quant = weights.tensor_quant[n];
  result.output.data.resize(last.shape.elements());
  for (int c = 0; c < last.shape.c; ++c) {
    std::memcpy(result.output.data.data() + c * last.plane(), last.Channel(c),
                last.plane());
  }
  result.measured_peak_bytes = arena.peak_bytes();
  return result;
}

}  // namespace tinyco
