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

// Int8 kernels used by the scheduled executor and by the codegen schedule
// interpreter. They operate on views into caller-owned memory and never
// allocate activation storage themselves.

#ifndef TINYCO_KERNELS_H_
#define TINYCO_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/weights.h"

namespace tinyco::kernels {

// CHW tensor in memory whose channels may be rotated: logical channel c
// lives in physical slot (c + shift) % C. In-place depthwise produces
// rotated tensors; every consumer reads through Channel().
struct TensorView {
  int8_t* data = nullptr;
  Shape shape;
  int shift = 0;

  int64_t plane() const { return int64_t{shape.h} * shape.w; }
  int Slot(int c) const { return (c + shift) % shape.c; }
  int8_t* Channel(int c) const { return data + Slot(c) * plane(); }
};

// Per-slot record of which input channels an in-place layer has already
// overwritten; reading such a slot is a scheduling bug.
class ShadowTracker {
 public:
  void Reset(int slots) { written_.assign(slots, 0); }
  void CheckRead(int slot) const;
  void MarkWritten(int slot) { written_.at(slot) = 1; }

 private:
  std::vector<uint8_t> written_;
};

// im2col + width tiling: `im2col` holds tile_width columns of k*k*Cin
// values, `accumulators` holds tile_width * Cout int32 partial sums.
void ConvIm2col(const LayerSpec& layer, const LayerParams& params,
                const TensorView& in, const TensorView& out, int tile_width,
                std::span<int8_t> im2col, std::span<int8_t> accumulators);

// Direct convolution for Conv2d layers that skip im2col (1x1 kernels).
void ConvDirect(const LayerSpec& layer, const LayerParams& params,
                const TensorView& in, const TensorView& out);

void Depthwise(const LayerSpec& layer, const LayerParams& params,
               const TensorView& in, const TensorView& out);

// In-place rotation: output channel 0 goes to `scratch`, output channel c
// overwrites the slot of input channel c - 1, and the scratch is finally
// copied into the slot of channel N - 1. Returns the shift of the result.
int DepthwiseInplace(const LayerSpec& layer, const LayerParams& params,
                     const TensorView& io, std::span<int8_t> scratch,
                     ShadowTracker* shadow);

void Pointwise(const LayerSpec& layer, const LayerParams& params,
               const TensorView& in, const TensorView& out);
void AvgPool(const LayerSpec& layer, const LayerParams& params,
             const TensorView& in, const TensorView& out);
void FullyConnected(const LayerSpec& layer, const LayerParams& params,
                    const TensorView& in, const TensorView& out);
void ResidualAdd(const LayerSpec& layer, const LayerParams& params,
                 const TensorView& in, const TensorView& skip,
                 const TensorView& out);

}  // namespace tinyco::kernels

#endif  // TINYCO_KERNELS_H_
