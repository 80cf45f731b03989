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

#include "tinyco/kernels.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "tinyco/error.h"
#include "tinyco/quant.h"

namespace tinyco::kernels {

namespace {

inline void StoreI32(std::span<int8_t> bytes, int64_t index, int32_t v) {
  std::memcpy(bytes.data() + 4 * index, &v, 4);
}

inline int32_t LoadI32(std::span<const int8_t> bytes, int64_t index) {
  int32_t v;
  std::memcpy(&v, bytes.data() + 4 * index, 4);
  return v;
}

inline int8_t Finish(int64_t acc, const LayerParams& p) {
  return SaturateToInt8(p.output_zero_point + ApplyRequant(acc, p.requant),
                        p.act_min, p.act_max);
}

// Depthwise filter of one channel; `dst` may alias no input of this channel.
void DepthwisePlane(const LayerSpec& l, const LayerParams& p, int c,
                    const int8_t* src, int8_t* dst) {
  const int k = l.kernel_size;
  const int s = l.stride;
  const int pad = l.padding;
  const int ih = l.input_shape.h;
  const int iw = l.input_shape.w;
  const int oh = l.output_shape.h;
  const int ow = l.output_shape.w;
  const int8_t* w = p.weights.data() + static_cast<int64_t>(c) * k * k;
  const int zp = p.input_zero_point;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      int32_t acc = p.bias[c];
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * s - pad + ky;
        if (iy < 0 || iy >= ih) continue;  // zero-point padding adds 0
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * s - pad + kx;
          if (ix < 0 || ix >= iw) continue;
          acc += (src[iy * iw + ix] - zp) * w[ky * k + kx];
        }
      }
      dst[oy * ow + ox] = Finish(acc, p);
    }
  }
}

}  // namespace

void ShadowTracker::CheckRead(int slot) const {
  if (written_.at(slot)) {
    throw Error(ErrorCode::kInplaceViolation,
                "in-place depthwise read slot " + std::to_string(slot) +
                    " after it was overwritten");
  }
}

void ConvIm2col(const LayerSpec& l, const LayerParams& p, const TensorView& in,
                const TensorView& out, int tile_width, std::span<int8_t> im2col,
                std::span<int8_t> accumulators) {
  const int k = l.kernel_size;
  const int s = l.stride;
  const int pad = l.padding;
  const int cin = l.in_channels;
  const int cout = l.out_channels;
  const int ih = l.input_shape.h;
  const int iw = l.input_shape.w;
  const int oh = l.output_shape.h;
  const int ow = l.output_shape.w;
  const int64_t column = int64_t{k} * k * cin;
  if (tile_width < 1 || column * tile_width > static_cast<int64_t>(im2col.size()) ||
      int64_t{4} * tile_width * cout > static_cast<int64_t>(accumulators.size())) {
    throw Error(ErrorCode::kTileMismatch, "im2col scratch too small for tile");
  }
  const int8_t zp = static_cast<int8_t>(p.input_zero_point);

  for (int oy = 0; oy < oh; ++oy) {
    for (int ox0 = 0; ox0 < ow; ox0 += tile_width) {
      const int cols = std::min(tile_width, ow - ox0);
      for (int j = 0; j < cols; ++j) {
        int8_t* col = im2col.data() + j * column;
        const int ox = ox0 + j;
        for (int ci = 0; ci < cin; ++ci) {
          const int8_t* plane = in.Channel(ci);
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s - pad + ky;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s - pad + kx;
              const bool inside = iy >= 0 && iy < ih && ix >= 0 && ix < iw;
              *col++ = inside ? plane[iy * iw + ix] : zp;
            }
          }
        }
      }
      for (int co = 0; co < cout; ++co) {
        const int8_t* w = p.weights.data() + co * column;
        for (int j = 0; j < cols; ++j) {
          const int8_t* col = im2col.data() + j * column;
          int32_t acc = p.bias[co];
          for (int64_t e = 0; e < column; ++e) acc += (col[e] - zp) * w[e];
          StoreI32(accumulators, int64_t{co} * tile_width + j, acc);
        }
      }
      for (int co = 0; co < cout; ++co) {
        int8_t* dst = out.Channel(co) + oy * ow + ox0;
        for (int j = 0; j < cols; ++j) {
          dst[j] = Finish(LoadI32(accumulators, int64_t{co} * tile_width + j), p);
        }
      }
    }
  }
}

void ConvDirect(const LayerSpec& l, const LayerParams& p, const TensorView& in,
                const TensorView& out) {
  const int k = l.kernel_size;
  const int s = l.stride;
  const int pad = l.padding;
  const int cin = l.in_channels;
  const int ih = l.input_shape.h;
  const int iw = l.input_shape.w;
  const int oh = l.output_shape.h;
  const int ow = l.output_shape.w;
  const int zp = p.input_zero_point;
  for (int co = 0; co < l.out_channels; ++co) {
    int8_t* dst = out.Channel(co);
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        int32_t acc = p.bias[co];
        for (int ci = 0; ci < cin; ++ci) {
          const int8_t* plane = in.Channel(ci);
          const int8_t* w = p.weights.data() + (int64_t{co} * cin + ci) * k * k;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s - pad + ky;
            if (iy < 0 || iy >= ih) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s - pad + kx;
              if (ix < 0 || ix >= iw) continue;
              acc += (plane[iy * iw + ix] - zp) * w[ky * k + kx];
            }
          }
        }
        dst[oy * ow + ox] = Finish(acc, p);
      }
    }
  }
}

void Depthwise(const LayerSpec& l, const LayerParams& p, const TensorView& in,
               const TensorView& out) {
  for (int c = 0; c < l.in_channels; ++c) {
    DepthwisePlane(l, p, c, in.Channel(c), out.Channel(c));
  }
}

int DepthwiseInplace(const LayerSpec& l, const LayerParams& p,
                     const TensorView& io, std::span<int8_t> scratch,
                     ShadowTracker* shadow) {
  const int n = l.in_channels;
  const int64_t plane = io.plane();
  if (!(l.input_shape == l.output_shape) ||
      static_cast<int64_t>(scratch.size()) < plane) {
    throw Error(ErrorCode::kInplaceViolation,
                "in-place depthwise needs equal shapes and a one-channel scratch");
  }
  if (shadow) shadow->Reset(n);
  for (int c = 0; c < n; ++c) {
    if (shadow) shadow->CheckRead(io.Slot(c));
    int8_t* dst = c == 0 ? scratch.data() : io.Channel(c - 1);
    DepthwisePlane(l, p, c, io.Channel(c), dst);
    if (shadow && c > 0) shadow->MarkWritten(io.Slot(c - 1));
  }
  std::memcpy(io.Channel(n - 1), scratch.data(), plane);
  if (shadow) shadow->MarkWritten(io.Slot(n - 1));
  return (io.shift + n - 1) % n;
}

void Pointwise(const LayerSpec& l, const LayerParams& p, const TensorView& in,
               const TensorView& out) {
  const int cin = l.in_channels;
  const int64_t plane = in.plane();
  const int zp = p.input_zero_point;
  std::vector<const int8_t*> src(cin);
  for (int ci = 0; ci < cin; ++ci) src[ci] = in.Channel(ci);
  for (int co = 0; co < l.out_channels; ++co) {
    const int8_t* w = p.weights.data() + int64_t{co} * cin;
    int8_t* dst = out.Channel(co);
    for (int64_t px = 0; px < plane; ++px) {
      int32_t acc = p.bias[co];
      for (int ci = 0; ci < cin; ++ci) acc += (src[ci][px] - zp) * w[ci];
      dst[px] = Finish(acc, p);
    }
  }
}

void AvgPool(const LayerSpec& l, const LayerParams& p, const TensorView& in,
             const TensorView& out) {
  const int64_t plane = in.plane();
  for (int c = 0; c < l.in_channels; ++c) {
    const int8_t* src = in.Channel(c);
    int64_t acc = 0;
    for (int64_t px = 0; px < plane; ++px) acc += src[px] - p.input_zero_point;
    out.Channel(c)[0] = Finish(acc, p);
  }
}

void FullyConnected(const LayerSpec& l, const LayerParams& p,
                    const TensorView& in, const TensorView& out) {
  const int cin = l.in_channels;
  for (int co = 0; co < l.out_channels; ++co) {
    const int8_t* w = p.weights.data() + int64_t{co} * cin;
    int32_t acc = p.bias[co];
    for (int ci = 0; ci < cin; ++ci) {
      acc += (in.Channel(ci)[0] - p.input_zero_point) * w[ci];
    }
    out.Channel(co)[0] = Finish(acc, p);
  }
}

void ResidualAdd(const LayerSpec& l, const LayerParams& p, const TensorView& in,
                 const TensorView& skip, const TensorView& out) {
  const int64_t plane = in.plane();
  for (int c = 0; c < l.in_channels; ++c) {
    const int8_t* a = in.Channel(c);
    const int8_t* b = skip.Channel(c);
    int8_t* dst = out.Channel(c);
    for (int64_t px = 0; px < plane; ++px) {
      const int64_t acc =
          int64_t{a[px] - p.input_zero_point} * p.input_multiplier +
          int64_t{b[px] - p.skip_zero_point} * p.skip_multiplier;
      dst[px] = Finish(acc, p);
    }
  }
}

}  // namespace tinyco::kernels
