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

#include "tinyco/codegen.h"

#include <fmt/format.h>

#include <algorithm>
#include <cstring>
#include <iterator>

#include "json.hpp"

#include "tinyco/error.h"
#include "tinyco/kernels.h"

namespace tinyco {

namespace {

// Buffers in production order plus the tensor/scratch -> buffer indices.
struct BufferTable {
  std::vector<MemoryMapEntry> entries;
  std::vector<int> ref;        // buffer whose position steers ping-pong
  std::vector<bool> is_tensor;
  std::vector<int> tensor_buf;   // per tensor id
  std::vector<int> scratch_buf;  // per layer, -1 if none
  std::vector<int> im2col_buf;
  std::vector<int> acc_buf;
};

BufferTable CollectBuffers(const NetworkArch& arch, const MemoryPlan& plan) {
  const int n = static_cast<int>(arch.layers.size());
  if (static_cast<int>(plan.layers.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "plan was built for a different network");
  }
  std::vector<int> last_use(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    last_use[i] = std::max(last_use[i], i);
    const int skip = arch.layers[i].skip_tensor;
    if (skip >= 0) last_use[skip] = std::max(last_use[skip], i);
  }
  last_use[n] = std::max(n - 1, 0);

  BufferTable t;
  t.tensor_buf.assign(n + 1, -1);
  t.scratch_buf.assign(n, -1);
  t.im2col_buf.assign(n, -1);
  t.acc_buf.assign(n, -1);
  auto add = [&](std::string name, int64_t size, int first, int last, int ref,
                 bool tensor) {
    t.entries.push_back({std::move(name), 0, size, first, last});
    t.ref.push_back(ref);
    t.is_tensor.push_back(tensor);
    return static_cast<int>(t.entries.size()) - 1;
  };

  t.tensor_buf[0] = add("t0", arch.input_shape.elements(), 0, last_use[0], -1, true);
  for (int i = 0; i < n; ++i) {
    const LayerSpec& l = arch.layers[i];
    const LayerPlan& lp = plan.layers[i];
    if (lp.inplace) {
      const int b = t.tensor_buf[i];
      t.tensor_buf[i + 1] = b;
      t.entries[b].last_step = std::max(t.entries[b].last_step, last_use[i + 1]);
      t.scratch_buf[i] = add(fmt::format("scratch_l{}", i), lp.scratch_bytes, i, i, b,
                             false);
      continue;
    }
    t.tensor_buf[i + 1] =
        add(fmt::format("t{}", i + 1), l.output_shape.elements(), i,
            std::max(i, last_use[i + 1]), t.tensor_buf[i], true);
    if (lp.im2col_bytes > 0) {
      t.im2col_buf[i] = add(fmt::format("im2col_l{}", i), lp.im2col_bytes, i, i,
                            t.tensor_buf[i], false);
      t.acc_buf[i] = add(fmt::format("acc_l{}", i), lp.accumulator_bytes, i, i,
                         t.tensor_buf[i], false);
    }
  }
  return t;
}

bool LifetimesOverlap(const MemoryMapEntry& a, const MemoryMapEntry& b) {
  return a.first_step <= b.last_step && b.first_step <= a.last_step;
}

// Candidate offsets for buffer `self`: both ends of every free gap that is
// large enough, given the placed buffers that are live at the same time.
std::vector<int64_t> GapEnds(const std::vector<MemoryMapEntry>& entries,
                             const std::vector<bool>& placed, int self,
                             int64_t arena) {
  std::vector<std::pair<int64_t, int64_t>> busy;
  for (size_t j = 0; j < entries.size(); ++j) {
    if (!placed[j] || static_cast<int>(j) == self || entries[j].size == 0) continue;
    if (LifetimesOverlap(entries[j], entries[self])) {
      busy.emplace_back(entries[j].offset, entries[j].offset + entries[j].size);
    }
  }
  std::sort(busy.begin(), busy.end());
  const int64_t size = entries[self].size;
  std::vector<int64_t> ends;
  int64_t cursor = 0;
  auto gap = [&](int64_t lo, int64_t hi) {
    if (hi - lo < size) return;
    ends.push_back(lo);
    if (hi - size != lo) ends.push_back(hi - size);
  };
  for (const auto& [lo, hi] : busy) {
    if (lo > cursor) gap(cursor, lo);
    cursor = std::max(cursor, hi);
  }
  if (arena > cursor) gap(cursor, arena);
  if (size == 0 && ends.empty()) ends.push_back(0);
  return ends;
}

// Depth-first placement with conflict-directed backjumping: a buffer's
// feasibility depends only on co-live buffers, so a dead end jumps straight
// back to the latest of those instead of undoing unrelated choices.
class LayoutSearch {
 public:
  LayoutSearch(BufferTable& t, int64_t arena, LayoutStrategy strategy)
      : t_(t), arena_(arena), strategy_(strategy), placed_(t.entries.size(), false) {
    order_.resize(t.entries.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    if (strategy == LayoutStrategy::kLargestFirst) {
      std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
        return t.entries[a].size > t.entries[b].size;
      });
    }
  }

  bool Run() {
    std::vector<int> conflicts;
    return Place(0, conflicts) == kSolved;
  }

 private:
  static constexpr int kSolved = -2;
  static constexpr int64_t kBudget = 200000;

  // Returns kSolved, or the depth to resume from; `conflicts` receives the
  // depths responsible for the dead end.
  int Place(int k, std::vector<int>& conflicts) {
    if (k == static_cast<int>(order_.size())) return kSolved;
    const int b = order_[k];
    std::vector<int> blame;
    for (int j = 0; j < k; ++j) {
      const int o = order_[j];
      if (t_.entries[o].size > 0 && LifetimesOverlap(t_.entries[o], t_.entries[b])) {
        blame.push_back(j);
      }
    }
    std::vector<int64_t> cands = GapEnds(t_.entries, placed_, b, arena_);
    const int64_t pref = Preferred(b);
    std::stable_sort(cands.begin(), cands.end(), [&](int64_t x, int64_t y) {
      return std::llabs(x - pref) < std::llabs(y - pref);
    });
    for (int64_t off : cands) {
      if (++nodes_ > kBudget) break;
      t_.entries[b].offset = off;
      placed_[b] = true;
      std::vector<int> deeper;
      const int r = Place(k + 1, deeper);
      if (r == kSolved) return kSolved;
      placed_[b] = false;
      if (r < k) {
        conflicts = std::move(deeper);
        return r;
      }
      for (int d : deeper) {
        if (d < k) blame.push_back(d);
      }
    }
    placed_[b] = false;
    if (nodes_ > kBudget || blame.empty()) return -1;
    std::sort(blame.begin(), blame.end());
    blame.erase(std::unique(blame.begin(), blame.end()), blame.end());
    const int target = blame.back();
    blame.pop_back();
    conflicts = std::move(blame);
    return target;
  }

  // Offset the strategy would like for buffer b.
  int64_t Preferred(int b) const {
    const MemoryMapEntry& e = t_.entries[b];
    if (strategy_ == LayoutStrategy::kPingPong && t_.is_tensor[b] && t_.ref[b] >= 0) {
      const MemoryMapEntry& r = t_.entries[t_.ref[b]];
      if (placed_[t_.ref[b]] && 2 * r.offset + r.size < arena_) return arena_ - e.size;
    }
    return 0;
  }

  BufferTable& t_;
  int64_t arena_;
  LayoutStrategy strategy_;
  std::vector<bool> placed_;
  std::vector<int> order_;
  int64_t nodes_ = 0;
};

bool TryLayout(BufferTable& t, int64_t arena, LayoutStrategy strategy) {
  return LayoutSearch(t, arena, strategy).Run();
}

// ---- C emission helpers ---------------------------------------------------

using Buf = fmt::memory_buffer;

// "(x - zp)" without double signs.
std::string MinusZp(const std::string& x, int zp) {
  if (zp == 0) return x;
  if (zp > 0) return fmt::format("({} - {})", x, zp);
  return fmt::format("({} + {})", x, -zp);
}

std::string SlotExpr(const std::string& c, int shift, int channels) {
  if (shift == 0) return c.find(' ') == std::string::npos ? c : "(" + c + ")";
  return fmt::format("(({} + {}) % {})", c, shift, channels);
}

std::string RequantCall(const std::string& acc, const LayerParams& p) {
  return fmt::format("tc_requant({}, {}, {}, {}, {}, {})", acc, p.requant.multiplier,
                     31 + p.requant.shift, p.output_zero_point, p.act_min, p.act_max);
}

void EmitConvIm2col(Buf& o, int i, const LayerSpec& l, const LayerParams& p,
                    const ScheduleStep& s) {
  const int k = l.kernel_size;
  const int kk = k * k;
  const int64_t column = int64_t{kk} * l.in_channels;
  const int ih = l.input_shape.h, iw = l.input_shape.w;
  const int oh = l.output_shape.h, ow = l.output_shape.w;
  const int zp = p.input_zero_point;
  fmt::format_to(std::back_inserter(o),
                 "/* Conv2d {}x{} stride {} pad {}, {} -> {} channels, im2col tile {} */\n"
                 "static void layer_{}(void) {{\n"
                 "  const int8_t* in = arena + {};\n"
                 "  int8_t* out = arena + {};\n"
                 "  int8_t* cols = arena + {};\n"
                 "  uint8_t* accs = (uint8_t*)(arena + {});\n"
                 "  int oy, ox0, j, ci, co, ky, kx;\n"
                 "  for (oy = 0; oy < {}; ++oy) {{\n"
                 "    for (ox0 = 0; ox0 < {}; ox0 += {}) {{\n"
                 "      const int n = {} - ox0 < {} ? {} - ox0 : {};\n"
                 "      for (j = 0; j < n; ++j) {{\n"
                 "        int8_t* col = cols + j * {};\n"
                 "        const int ox = ox0 + j;\n"
                 "        for (ci = 0; ci < {}; ++ci) {{\n"
                 "          const int8_t* plane = in + {} * {};\n"
                 "          for (ky = 0; ky < {}; ++ky) {{\n"
                 "            const int iy = oy * {} - {} + ky;\n"
                 "            for (kx = 0; kx < {}; ++kx) {{\n"
                 "              const int ix = ox * {} - {} + kx;\n"
                 "              *col++ = (iy >= 0 && iy < {} && ix >= 0 && ix < {})\n"
                 "                           ? plane[iy * {} + ix] : (int8_t)({});\n"
                 "            }}\n"
                 "          }}\n"
                 "        }}\n"
                 "      }}\n"
                 "      for (co = 0; co < {}; ++co) {{\n"
                 "        for (j = 0; j < n; ++j) {{\n"
                 "          const int8_t* c = cols + j * {};\n"
                 "          const int8_t* w = l{}_w + co * {};\n"
                 "          int32_t acc = l{}_b[co];\n"
                 "          for (ci = 0; ci < {}; ++ci, c += {}, w += {}) {{\n",
                 k, k, l.stride, l.padding, l.in_channels, l.out_channels, s.tile_width,
                 i, s.input_offset, s.output_offset, s.im2col_offset,
                 s.accumulator_offset, oh, ow, s.tile_width, ow, s.tile_width, ow,
                 s.tile_width, column, l.in_channels,
                 SlotExpr("ci", s.input_shift, l.in_channels), int64_t{ih} * iw, k,
                 l.stride, l.padding, k, l.stride, l.padding, ih, iw, iw, zp,
                 l.out_channels, column, i, column, i, l.in_channels, kk, kk);
  for (int e = 0; e < kk; ++e) {
    fmt::format_to(std::back_inserter(o), "            acc += {} * w[{}];\n",
                   MinusZp(fmt::format("c[{}]", e), zp), e);
  }
  fmt::format_to(std::back_inserter(o),
                 "          }}\n"
                 "          tc_store_i32(accs, co * {} + j, acc);\n"
                 "        }}\n"
                 "      }}\n"
                 "      for (co = 0; co < {}; ++co) {{\n"
                 "        int8_t* dst = out + co * {} + oy * {} + ox0;\n"
                 "        for (j = 0; j < n; ++j) {{\n"
                 "          dst[j] = {};\n"
                 "        }}\n"
                 "      }}\n"
                 "    }}\n"
                 "  }}\n"
                 "}}\n\n",
                 s.tile_width, l.out_channels, int64_t{oh} * ow, ow,
                 RequantCall(fmt::format("tc_load_i32(accs, co * {} + j)", s.tile_width),
                             p));
}

// Unrolled k*k taps with bounds-checked zero-point padding.
void EmitTaps(Buf& o, int k, const std::string& indent, const LayerSpec& l, int zp) {
  for (int ky = 0; ky < k; ++ky) {
    for (int kx = 0; kx < k; ++kx) {
      fmt::format_to(std::back_inserter(o),
                     "{}acc += tc_tap(src, iy + {}, ix + {}, {}, {}, {}) * w[{}];\n",
                     indent, ky, kx, l.input_shape.h, l.input_shape.w, zp, ky * k + kx);
    }
  }
}

void EmitConvDirect(Buf& o, int i, const LayerSpec& l, const LayerParams& p,
                    const ScheduleStep& s) {
  const int k = l.kernel_size;
  const int oh = l.output_shape.h, ow = l.output_shape.w;
  fmt::format_to(std::back_inserter(o),
                 "/* Conv2d {}x{} stride {} pad {}, {} -> {} channels, direct */\n"
                 "static void layer_{}(void) {{\n"
                 "  const int8_t* in = arena + {};\n"
                 "  int8_t* out = arena + {};\n"
                 "  int co, ci, oy, ox;\n"
                 "  for (co = 0; co < {}; ++co) {{\n"
                 "    for (oy = 0; oy < {}; ++oy) {{\n"
                 "      const int iy = oy * {} - {};\n"
                 "      for (ox = 0; ox < {}; ++ox) {{\n"
                 "        const int ix = ox * {} - {};\n"
                 "        int32_t acc = l{}_b[co];\n"
                 "        for (ci = 0; ci < {}; ++ci) {{\n"
                 "          const int8_t* src = in + {} * {};\n"
                 "          const int8_t* w = l{}_w + (co * {} + ci) * {};\n",
                 k, k, l.stride, l.padding, l.in_channels, l.out_channels, i,
                 s.input_offset, s.output_offset, l.out_channels, oh, l.stride,
                 l.padding, ow, l.stride, l.padding, i, l.in_channels,
                 SlotExpr("ci", s.input_shift, l.in_channels),
                 int64_t{l.input_shape.h} * l.input_shape.w, i, l.in_channels, k * k);
  EmitTaps(o, k, "          ", l, p.input_zero_point);
  fmt::format_to(std::back_inserter(o),
                 "        }}\n"
                 "        out[co * {} + oy * {} + ox] = {};\n"
                 "      }}\n"
                 "    }}\n"
                 "  }}\n"
                 "}}\n\n",
                 int64_t{oh} * ow, ow, RequantCall("acc", p));
}

void EmitDepthwise(Buf& o, int i, const LayerSpec& l, const LayerParams& p,
                   const ScheduleStep& s) {
  const int k = l.kernel_size;
  const int n = l.in_channels;
  const int oh = l.output_shape.h, ow = l.output_shape.w;
  const int64_t iplane = int64_t{l.input_shape.h} * l.input_shape.w;
  const int64_t oplane = int64_t{oh} * ow;
  fmt::format_to(std::back_inserter(o),
                 "/* DepthwiseConv2d {}x{} stride {} pad {}, {} channels{} */\n"
                 "static void layer_{}(void) {{\n",
                 k, k, l.stride, l.padding, n, s.inplace ? ", in place" : "", i);
  if (s.inplace) {
    fmt::format_to(std::back_inserter(o),
                   "  int8_t* io = arena + {};\n"
                   "  int8_t* scratch = arena + {};\n"
                   "  int c, oy, ox, px;\n"
                   "  for (c = 0; c < {}; ++c) {{\n"
                   "    const int8_t* src = io + {} * {};\n"
                   "    int8_t* dst = c == 0 ? scratch : io + {} * {};\n",
                   s.input_offset, s.scratch_offset, n,
                   SlotExpr("c", s.input_shift, n), iplane,
                   SlotExpr("c - 1", s.input_shift, n), oplane);
  } else {
    fmt::format_to(std::back_inserter(o),
                   "  const int8_t* in = arena + {};\n"
                   "  int8_t* out = arena + {};\n"
                   "  int c, oy, ox;\n"
                   "  for (c = 0; c < {}; ++c) {{\n"
                   "    const int8_t* src = in + {} * {};\n"
                   "    int8_t* dst = out + c * {};\n",
                   s.input_offset, s.output_offset, n,
                   SlotExpr("c", s.input_shift, n), iplane, oplane);
  }
  fmt::format_to(std::back_inserter(o),
                 "    const int8_t* w = l{}_w + c * {};\n"
                 "    for (oy = 0; oy < {}; ++oy) {{\n"
                 "      const int iy = oy * {} - {};\n"
                 "      for (ox = 0; ox < {}; ++ox) {{\n"
                 "        const int ix = ox * {} - {};\n"
                 "        int32_t acc = l{}_b[c];\n",
                 i, k * k, oh, l.stride, l.padding, ow, l.stride, l.padding, i);
  EmitTaps(o, k, "        ", l, p.input_zero_point);
  fmt::format_to(std::back_inserter(o),
                 "        dst[oy * {} + ox] = {};\n"
                 "      }}\n"
                 "    }}\n"
                 "  }}\n",
                 ow, RequantCall("acc", p));
  if (s.inplace) {
    fmt::format_to(std::back_inserter(o),
                   "  for (px = 0; px < {}; ++px) io[{} * {} + px] = scratch[px];\n",
                   oplane, (n - 1 + s.input_shift) % n, oplane);
  }
  o.append(std::string_view("}\n\n"));
}

void EmitPointwise(Buf& o, int i, const LayerSpec& l, const LayerParams& p,
                   const ScheduleStep& s) {
  const int64_t plane = int64_t{l.output_shape.h} * l.output_shape.w;
  fmt::format_to(std::back_inserter(o),
                 "/* PointwiseConv2d {} -> {} channels{} */\n"
                 "static void layer_{}(void) {{\n"
                 "  const int8_t* in = arena + {};\n"
                 "  int8_t* out = arena + {};\n"
                 "  int co, ci, px;\n"
                 "  for (co = 0; co < {}; ++co) {{\n"
                 "    const int8_t* w = l{}_w + co * {};\n"
                 "    int8_t* dst = out + co * {};\n"
                 "    for (px = 0; px < {}; ++px) {{\n"
                 "      int32_t acc = l{}_b[co];\n"
                 "      for (ci = 0; ci < {}; ++ci) {{\n"
                 "        acc += {} * w[ci];\n"
                 "      }}\n"
                 "      dst[px] = {};\n"
                 "    }}\n"
                 "  }}\n"
                 "}}\n\n",
                 l.in_channels, l.out_channels, l.has_relu6 ? ", relu6" : "", i,
                 s.input_offset, s.output_offset, l.out_channels, i, l.in_channels,
                 plane, plane, i, l.in_channels,
                 MinusZp(fmt::format("in[{} * {} + px]",
                                     SlotExpr("ci", s.input_shift, l.in_channels), plane),
                         p.input_zero_point),
                 RequantCall("acc", p));
}

void EmitAvgPool(Buf& o, int i, const LayerSpec& l, const LayerParams& p,
                 const ScheduleStep& s) {
  const int64_t plane = int64_t{l.input_shape.h} * l.input_shape.w;
  fmt::format_to(std::back_inserter(o),
                 "/* AvgPool {}x{} -> 1x1, {} channels */\n"
                 "static void layer_{}(void) {{\n"
                 "  const int8_t* in = arena + {};\n"
                 "  int8_t* out = arena + {};\n"
                 "  int c, px;\n"
                 "  for (c = 0; c < {}; ++c) {{\n"
                 "    const int8_t* src = in + {} * {};\n"
                 "    int64_t acc = 0;\n"
                 "    for (px = 0; px < {}; ++px) acc += {};\n"
                 "    out[c] = {};\n"
                 "  }}\n"
                 "}}\n\n",
                 l.input_shape.h, l.input_shape.w, l.in_channels, i, s.input_offset,
                 s.output_offset, l.in_channels,
                 SlotExpr("c", s.input_shift, l.in_channels), plane, plane,
                 MinusZp("src[px]", p.input_zero_point), RequantCall("acc", p));
}

void EmitFullyConnected(Buf& o, int i, const LayerSpec& l, const LayerParams& p,
                        const ScheduleStep& s) {
  fmt::format_to(std::back_inserter(o),
                 "/* FullyConnected {} -> {} */\n"
                 "static void layer_{}(void) {{\n"
                 "  const int8_t* in = arena + {};\n"
                 "  int8_t* out = arena + {};\n"
                 "  int co, ci;\n"
                 "  for (co = 0; co < {}; ++co) {{\n"
                 "    const int8_t* w = l{}_w + co * {};\n"
                 "    int32_t acc = l{}_b[co];\n"
                 "    for (ci = 0; ci < {}; ++ci) {{\n"
                 "      acc += {} * w[ci];\n"
                 "    }}\n"
                 "    out[co] = {};\n"
                 "  }}\n"
                 "}}\n\n",
                 l.in_channels, l.out_channels, i, s.input_offset, s.output_offset,
                 l.out_channels, i, l.in_channels, i, l.in_channels,
                 MinusZp(fmt::format("in[{}]", SlotExpr("ci", s.input_shift,
                                                        l.in_channels)),
                         p.input_zero_point),
                 RequantCall("acc", p));
}

void EmitResidualAdd(Buf& o, int i, const LayerSpec& l, const LayerParams& p,
                     const ScheduleStep& s) {
  const int64_t plane = int64_t{l.output_shape.h} * l.output_shape.w;
  const int c = l.in_channels;
  fmt::format_to(std::back_inserter(o),
                 "/* ResidualAdd, {} channels */\n"
                 "static void layer_{}(void) {{\n"
                 "  const int8_t* in = arena + {};\n"
                 "  const int8_t* skip = arena + {};\n"
                 "  int8_t* out = arena + {};\n"
                 "  int c, px;\n"
                 "  for (c = 0; c < {}; ++c) {{\n"
                 "    const int8_t* a = in + {} * {};\n"
                 "    const int8_t* b = skip + {} * {};\n"
                 "    int8_t* dst = out + c * {};\n"
                 "    for (px = 0; px < {}; ++px) {{\n"
                 "      const int64_t acc = (int64_t){} * {} + (int64_t){} * {};\n"
                 "      dst[px] = {};\n"
                 "    }}\n"
                 "  }}\n"
                 "}}\n\n",
                 c, i, s.input_offset, s.skip_offset, s.output_offset, c,
                 SlotExpr("c", s.input_shift, c), plane,
                 SlotExpr("c", s.skip_shift, c), plane, plane, plane,
                 MinusZp("a[px]", p.input_zero_point), p.input_multiplier,
                 MinusZp("b[px]", p.skip_zero_point), p.skip_multiplier,
                 RequantCall("acc", p));
}

void AppendInt32(Buf& o, int32_t v) {
  if (v == INT32_MIN) {
    o.append(std::string_view("(-2147483647 - 1)"));
  } else {
    fmt::format_to(std::back_inserter(o), "{}", v);
  }
}

template <typename T>
void EmitArray(Buf& o, const char* type, const std::string& name,
               const std::vector<T>& values) {
  fmt::format_to(std::back_inserter(o), "const {} {}[{}] = {{", type, name,
                 std::max<size_t>(values.size(), 1));
  for (size_t j = 0; j < values.size(); ++j) {
    o.append(std::string_view(j % 16 == 0 ? "\n  " : " "));
    if constexpr (sizeof(T) == 4) {
      AppendInt32(o, values[j]);
    } else {
      fmt::format_to(std::back_inserter(o), "{}", int{values[j]});
    }
    if (j + 1 < values.size()) o.push_back(',');
  }
  if (values.empty()) o.append(std::string_view("0"));
  o.append(std::string_view("\n};\n\n"));
}

constexpr std::string_view kRuntime = R"(static int8_t tc_requant(int64_t acc, int32_t mult, int s, int32_t zp,
                         int32_t lo, int32_t hi) {
  const int64_t prod = acc * mult;
  int64_t v = prod;
  if (s > 0) {
    const int64_t half = (int64_t)1 << (s - 1);
    v = prod >= 0 ? (prod + half) >> s : -((-prod + half) >> s);
  }
  v += zp;
  if (v < lo) v = lo;
  if (v > hi) v = hi;
  return (int8_t)v;
}

)";

constexpr std::string_view kAccumulatorHelpers = R"(/* Accumulators live in the byte arena; stored byte-wise, no alignment. */
static void tc_store_i32(uint8_t* p, int32_t index, int32_t v) {
  const uint32_t u = (uint32_t)v;
  p += 4 * index;
  p[0] = (uint8_t)u;
  p[1] = (uint8_t)(u >> 8);
  p[2] = (uint8_t)(u >> 16);
  p[3] = (uint8_t)(u >> 24);
}

static int32_t tc_load_i32(const uint8_t* p, int32_t index) {
  uint32_t u;
  p += 4 * index;
  u = (uint32_t)p[0] | ((uint32_t)p[1] << 8) | ((uint32_t)p[2] << 16) |
      ((uint32_t)p[3] << 24);
  return u <= 0x7fffffffu ? (int32_t)u : -(int32_t)(~u) - 1;
}

)";

constexpr std::string_view kTapHelper = R"(/* Input minus zero point; padding contributes zero. */
static int32_t tc_tap(const int8_t* src, int iy, int ix, int h, int w, int32_t zp) {
  if (iy < 0 || iy >= h || ix < 0 || ix >= w) return 0;
  return src[iy * w + ix] - zp;
}

)";

}  // namespace

void CheckMemoryMap(const std::vector<MemoryMapEntry>& map, int64_t arena_bytes) {
  for (size_t a = 0; a < map.size(); ++a) {
    const MemoryMapEntry& x = map[a];
    if (x.offset < 0 || x.size < 0 || x.offset + x.size > arena_bytes) {
      throw Error(ErrorCode::kLayout, x.buffer_name + " leaves the arena");
    }
    for (size_t b = a + 1; b < map.size(); ++b) {
      const MemoryMapEntry& y = map[b];
      if (x.size == 0 || y.size == 0 || !LifetimesOverlap(x, y)) continue;
      if (x.offset < y.offset + y.size && y.offset < x.offset + x.size) {
        throw Error(ErrorCode::kLayout,
                    x.buffer_name + " overlaps " + y.buffer_name + " while both are live");
      }
    }
  }
}

std::vector<MemoryMapEntry> LayoutBuffers(const NetworkArch& arch,
                                          const MemoryPlan& plan,
                                          int64_t arena_bytes,
                                          LayoutStrategy strategy) {
  BufferTable t = CollectBuffers(arch, plan);
  if (!TryLayout(t, arena_bytes, strategy)) {
    throw Error(ErrorCode::kLayout, "buffers do not fit in " +
                                        std::to_string(arena_bytes) + " bytes");
  }
  return t.entries;
}

CodegenOutput Generate(const NetworkArch& arch, const MemoryPlan& plan,
                       const WeightSet& weights) {
  arch.Validate();
  weights.CheckAgainst(arch);
  const int n = static_cast<int>(arch.layers.size());
  CodegenOutput out;
  out.arena_bytes = plan.peak_sram_bytes;
  out.num_layers = n;

  BufferTable t = CollectBuffers(arch, plan);
  bool laid_out = false;
  for (LayoutStrategy st : {LayoutStrategy::kPingPong, LayoutStrategy::kFirstFit,
                            LayoutStrategy::kLargestFirst}) {
    BufferTable trial = t;
    if (TryLayout(trial, out.arena_bytes, st)) {
      t = std::move(trial);
      laid_out = true;
      break;
    }
  }
  if (!laid_out) {
    throw Error(ErrorCode::kLayout, "no layout fits the planned peak of " +
                                        std::to_string(out.arena_bytes) + " bytes");
  }
  CheckMemoryMap(t.entries, out.arena_bytes);
  out.memory_map = t.entries;

  // Resolve offsets and channel rotations per layer.
  std::vector<int> shift(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    const LayerSpec& l = arch.layers[i];
    const LayerPlan& lp = plan.layers[i];
    ScheduleStep s;
    s.layer = i;
    s.inplace = lp.inplace;
    s.tile_width = lp.tile_width;
    s.input_offset = t.entries[t.tensor_buf[i]].offset;
    s.input_shift = shift[i];
    if (l.skip_tensor >= 0) {
      s.skip_offset = t.entries[t.tensor_buf[l.skip_tensor]].offset;
      s.skip_shift = shift[l.skip_tensor];
    }
    s.output_offset = t.entries[t.tensor_buf[i + 1]].offset;
    if (lp.inplace) {
      shift[i + 1] = (shift[i] + l.in_channels - 1) % l.in_channels;
      s.scratch_offset = t.entries[t.scratch_buf[i]].offset;
    }
    s.output_shift = shift[i + 1];
    if (t.im2col_buf[i] >= 0) {
      s.im2col_offset = t.entries[t.im2col_buf[i]].offset;
      s.accumulator_offset = t.entries[t.acc_buf[i]].offset;
    }
    out.schedule.push_back(s);
  }
  if (shift[n] != 0) {
    throw Error(ErrorCode::kInvalidArch, "network output may not be channel-rotated");
  }
  out.input_offset = t.entries[t.tensor_buf[0]].offset;
  out.output_offset = t.entries[t.tensor_buf[n]].offset;

  bool need_tap = false;
  bool need_acc = false;
  for (const LayerSpec& l : arch.layers) {
    out.ops_emitted.insert(l.kind);
    if (l.kind == LayerKind::kDepthwiseConv2d ||
        (l.kind == LayerKind::kConv2d && !l.UsesIm2col())) {
      need_tap = true;
    }
    if (l.UsesIm2col()) need_acc = true;
  }

  const Shape in_shape = arch.input_shape;
  const Shape out_shape = arch.TensorShape(n);
  Buf h;
  fmt::format_to(std::back_inserter(h),
                 "/* Generated by tinyco for {}. */\n"
                 "#ifndef TINYCO_MODEL_H_\n"
                 "#define TINYCO_MODEL_H_\n\n"
                 "#include <stdint.h>\n\n"
                 "#define MODEL_INPUT_C {}\n"
                 "#define MODEL_INPUT_H {}\n"
                 "#define MODEL_INPUT_W {}\n"
                 "#define MODEL_INPUT_BYTES {}\n"
                 "#define MODEL_OUTPUT_BYTES {}\n"
                 "#define MODEL_ARENA_BYTES {}\n\n"
                 "/* Runs the network on a CHW int8 input. The result points into\n"
                 "   the static arena and stays valid until the next call. */\n"
                 "int8_t* invoke(const int8_t* input);\n\n"
                 "#endif  /* TINYCO_MODEL_H_ */\n",
                 arch.name, in_shape.c, in_shape.h, in_shape.w, in_shape.elements(),
                 out_shape.elements(), out.arena_bytes);
  out.header_text = fmt::to_string(h);

  Buf w;
  fmt::format_to(std::back_inserter(w),
                 "/* Generated by tinyco for {}. Int8 weights, int32 biases with\n"
                 "   batch norm folded in. */\n"
                 "#include <stdint.h>\n\n",
                 arch.name);
  Buf c;
  fmt::format_to(std::back_inserter(c),
                 "/* Generated by tinyco for {}: {} layers, arena {} bytes. */\n"
                 "#include <stdint.h>\n\n"
                 "#include \"model.h\"\n\n",
                 arch.name, n, out.arena_bytes);
  for (int i = 0; i < n; ++i) {
    const LayerParams& p = weights.layers[i];
    if (p.weights.empty()) continue;
    EmitArray(w, "int8_t", fmt::format("l{}_w", i), p.weights);
    EmitArray(w, "int32_t", fmt::format("l{}_b", i), p.bias);
    fmt::format_to(std::back_inserter(c),
                   "extern const int8_t l{}_w[];\nextern const int32_t l{}_b[];\n", i, i);
  }
  out.weights_text = fmt::to_string(w);
  fmt::format_to(std::back_inserter(c), "\nstatic int8_t arena[{}];\n\n",
                 std::max<int64_t>(out.arena_bytes, 1));
  c.append(kRuntime);
  if (need_acc) c.append(kAccumulatorHelpers);
  if (need_tap) c.append(kTapHelper);

  for (int i = 0; i < n; ++i) {
    const LayerSpec& l = arch.layers[i];
    const LayerParams& p = weights.layers[i];
    const ScheduleStep& s = out.schedule[i];
    switch (l.kind) {
      case LayerKind::kConv2d:
        if (l.UsesIm2col()) {
          EmitConvIm2col(c, i, l, p, s);
        } else {
          EmitConvDirect(c, i, l, p, s);
        }
        break;
      case LayerKind::kDepthwiseConv2d:
        EmitDepthwise(c, i, l, p, s);
        break;
      case LayerKind::kPointwiseConv2d:
        EmitPointwise(c, i, l, p, s);
        break;
      case LayerKind::kAvgPool:
        EmitAvgPool(c, i, l, p, s);
        break;
      case LayerKind::kFullyConnected:
        EmitFullyConnected(c, i, l, p, s);
        break;
      case LayerKind::kResidualAdd:
        EmitResidualAdd(c, i, l, p, s);
        break;
    }
  }
  fmt::format_to(std::back_inserter(c),
                 "int8_t* invoke(const int8_t* input) {{\n"
                 "  int i;\n"
                 "  for (i = 0; i < {}; ++i) arena[{} + i] = input[i];\n",
                 in_shape.elements(), out.input_offset);
  for (int i = 0; i < n; ++i) fmt::format_to(std::back_inserter(c), "  layer_{}();\n", i);
  fmt::format_to(std::back_inserter(c), "  return arena + {};\n}}\n", out.output_offset);
  out.source_text = fmt::to_string(c);
  out.estimated_code_bytes = EstimateCodeBytes(out);
  return out;
}

int64_t OpCodeCost(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return 1536;
    case LayerKind::kDepthwiseConv2d: return 1024;
    case LayerKind::kPointwiseConv2d: return 640;
    case LayerKind::kAvgPool: return 192;
    case LayerKind::kFullyConnected: return 320;
    case LayerKind::kResidualAdd: return 384;
  }
  return 0;
}

int64_t EstimateCodeBytes(const CodegenOutput& output) {
  int64_t bytes = kRuntimeCodeBytes + kPerLayerCodeBytes * output.num_layers;
  for (LayerKind k : output.ops_emitted) bytes += OpCodeCost(k);
  return bytes;
}

int64_t EstimateFullOpSetCodeBytes(const CodegenOutput& output) {
  int64_t bytes = kRuntimeCodeBytes + kPerLayerCodeBytes * output.num_layers;
  for (LayerKind k : {LayerKind::kConv2d, LayerKind::kDepthwiseConv2d,
                      LayerKind::kPointwiseConv2d, LayerKind::kAvgPool,
                      LayerKind::kFullyConnected, LayerKind::kResidualAdd}) {
    bytes += OpCodeCost(k);
  }
  return bytes;
}

TensorBuf InterpretSchedule(const NetworkArch& arch, const WeightSet& weights,
                            const CodegenOutput& output, const TensorBuf& input) {
  const int n = static_cast<int>(arch.layers.size());
  if (static_cast<int>(output.schedule.size()) != n || !(input.shape == arch.input_shape)) {
    throw Error(ErrorCode::kShapeMismatch, "schedule does not match the network");
  }
  std::vector<int8_t> arena(std::max<int64_t>(output.arena_bytes, 1));
  std::memcpy(arena.data() + output.input_offset, input.data.data(), input.data.size());
  auto at = [&](int64_t offset) { return arena.data() + offset; };
  auto span_at = [&](int64_t offset, int64_t size) {
    return std::span<int8_t>(arena.data() + offset, static_cast<size_t>(size));
  };
  for (int i = 0; i < n; ++i) {
    const LayerSpec& l = arch.layers[i];
    const LayerParams& p = weights.layers[i];
    const ScheduleStep& s = output.schedule[i];
    const kernels::TensorView in{at(s.input_offset), l.input_shape, s.input_shift};
    const kernels::TensorView out{at(s.output_offset), l.output_shape, 0};
    if (s.inplace) {
      kernels::DepthwiseInplace(l, p, in, span_at(s.scratch_offset, in.plane()), nullptr);
      continue;
    }
    switch (l.kind) {
      case LayerKind::kConv2d:
        if (l.UsesIm2col()) {
          kernels::ConvIm2col(
              l, p, in, out, s.tile_width,
              span_at(s.im2col_offset, int64_t{s.tile_width} * l.kernel_size *
                                           l.kernel_size * l.in_channels),
              span_at(s.accumulator_offset, int64_t{4} * s.tile_width * l.out_channels));
        } else {
          kernels::ConvDirect(l, p, in, out);
        }
        break;
      case LayerKind::kDepthwiseConv2d:
        kernels::Depthwise(l, p, in, out);
        break;
      case LayerKind::kPointwiseConv2d:
        kernels::Pointwise(l, p, in, out);
        break;
      case LayerKind::kAvgPool:
        kernels::AvgPool(l, p, in, out);
        break;
      case LayerKind::kFullyConnected:
        kernels::FullyConnected(l, p, in, out);
        break;
      case LayerKind::kResidualAdd:
        kernels::ResidualAdd(
            l, p, in,
            kernels::TensorView{at(s.skip_offset), arch.TensorShape(l.skip_tensor),
                                s.skip_shift},
            out);
        break;
    }
  }
  TensorBuf result;
  result.shape = arch.TensorShape(n);
  result.quant = weights.tensor_quant.at(n);
  result.data.assign(at(output.output_offset),
                     at(output.output_offset) + result.shape.elements());
  return result;
}

std::string MemoryMapJson(const CodegenOutput& output) {
  nlohmann::ordered_json j;
  j["arena_bytes"] = output.arena_bytes;
  j["input_offset"] = output.input_offset;
  j["output_offset"] = output.output_offset;
  nlohmann::ordered_json bufs = nlohmann::ordered_json::array();
  for (const MemoryMapEntry& e : output.memory_map) {
    bufs.push_back({{"buffer_name", e.buffer_name},
                    {"offset", e.offset},
                    {"size", e.size},
                    {"first_step", e.first_step},
                    {"last_step", e.last_step}});
  }
  j["buffers"] = std::move(bufs);
  nlohmann::ordered_json ops = nlohmann::ordered_json::array();
  for (LayerKind k : output.ops_emitted) ops.push_back(LayerKindName(k));
  j["ops_emitted"] = std::move(ops);
  j["estimated_code_bytes"] = output.estimated_code_bytes;
  return j.dump(2) + "\n";
}

}  // namespace tinyco
