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

#include "tinyco/graph.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <utility>

#include <fmt/format.h>

#include "tinyco/error.h"

namespace tinyco {

namespace {

constexpr int kMinResolution = 48;
constexpr int kResolutionStep = 16;

// Searchable schedule: stem, five stages, feature mix.
constexpr int kStemChannels = 16;
constexpr std::array<int, kNumStages> kStageChannels = {24, 40, 80, 96, 192};
constexpr std::array<int, kNumStages> kStageStrides = {2, 2, 2, 1, 2};
constexpr int kMixChannels = 320;

struct MbV2Stage {
  int channels;
  int blocks;
  int stride;
};
constexpr std::array<MbV2Stage, 6> kMbV2Stages = {{
    {24, 2, 2}, {32, 3, 2}, {64, 4, 2}, {96, 3, 1}, {160, 3, 2}, {320, 1, 1},
}};

bool Contains(std::span<const int> choices, int v) {
  return std::find(choices.begin(), choices.end(), v) != choices.end();
}

[[noreturn]] void BadArch(int layer, const std::string& what) {
  throw Error(ErrorCode::kInvalidArch,
              "layer " + std::to_string(layer) + ": " + what);
}

int ConvOut(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

// Appends one inverted-bottleneck block; `expand` of 1 skips the expansion.
void AddInvertedBottleneck(NetworkBuilder& b, const std::string& kind,
                           int stage, int kernel, int expand, int stride,
                           int out_channels) {
  b.BeginBlock(kind, stage);
  const int block_input = b.current_tensor();
  const int in_channels = b.current_shape().c;
  if (expand != 1) b.Pointwise(in_channels * expand, true);
  b.Depthwise(kernel, stride, true);
  b.Pointwise(out_channels, false);
  if (stride == 1 && in_channels == out_channels) b.ResidualAdd(block_input);
  b.EndBlock();
}

}  // namespace

// ---------------------------------------------------------------------------
// SpaceConfig

SpaceConfig SpaceConfig::Make(int width_tenths, int resolution) {
  if (width_tenths < 2 || width_tenths > 10) {
    throw Error(ErrorCode::kInvalidGene,
                "width multiplier must be one of 0.2..1.0 in steps of 0.1");
  }
  if (resolution < kMinResolution || resolution > 224 ||
      (resolution - kMinResolution) % kResolutionStep != 0) {
    throw Error(ErrorCode::kInvalidGene,
                "resolution must be one of 48, 64, ..., 224, got " +
                    std::to_string(resolution));
  }
  return SpaceConfig(width_tenths, resolution);
}

SpaceConfig SpaceConfig::Parse(std::string_view text) {
  // w<d>.<d>-r<int>, e.g. "w0.5-r144" or "w1.0-r224"
  auto fail = [&]() -> SpaceConfig {
    throw Error(ErrorCode::kParse,
                "bad space '" + std::string(text) + "', expected e.g. w0.5-r144");
  };
  if (text.size() < 8 || text[0] != 'w' || text[2] != '.' || text[4] != '-' ||
      text[5] != 'r') {
    return fail();
  }
  const int whole = text[1] - '0';
  const int frac = text[3] - '0';
  if (whole < 0 || whole > 1 || frac < 0 || frac > 9) return fail();
  int resolution = 0;
  const char* first = text.data() + 6;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, resolution);
  if (ec != std::errc() || ptr != last) return fail();
  return Make(whole * 10 + frac, resolution);
}

std::vector<SpaceConfig> SpaceConfig::All() {
  std::vector<SpaceConfig> out;
  out.reserve(kNumWidths * kNumResolutions);
  for (int w = 2; w <= 10; ++w) {
    for (int r = kMinResolution; r <= 224; r += kResolutionStep) {
      out.push_back(SpaceConfig(w, r));
    }
  }
  return out;
}

std::string SpaceConfig::Name() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "w%d.%d-r%d", width_tenths_ / 10,
                width_tenths_ % 10, resolution_);
  return buf;
}

// ---------------------------------------------------------------------------
// ArchGenes

void ArchGenes::Validate() const {
  for (int i = 0; i < kNumGenes; ++i) {
    if (!Contains(GeneChoices(i), Gene(i))) {
      throw Error(ErrorCode::kInvalidGene,
                  "gene " + std::to_string(i) + " (stage " +
                      std::to_string(i / kGenesPerStage + 1) +
                      ") has illegal value " + std::to_string(Gene(i)));
    }
  }
}

int ArchGenes::Gene(int index) const {
  const StageGenes& s = stages.at(index / kGenesPerStage);
  const int j = index % kGenesPerStage;
  if (j == 0) return s.depth;
  if (j <= kMaxDepth) return s.kernel[j - 1];
  return s.expand[j - 1 - kMaxDepth];
}

void ArchGenes::SetGene(int index, int value) {
  StageGenes& s = stages.at(index / kGenesPerStage);
  const int j = index % kGenesPerStage;
  if (j == 0) {
    s.depth = value;
  } else if (j <= kMaxDepth) {
    s.kernel[j - 1] = value;
  } else {
    s.expand[j - 1 - kMaxDepth] = value;
  }
}

std::span<const int> ArchGenes::GeneChoices(int index) {
  const int j = index % kGenesPerStage;
  if (j == 0) return kDepthChoices;
  if (j <= kMaxDepth) return kKernelChoices;
  return kExpandChoices;
}

ArchGenes ArchGenes::Uniform(SpaceConfig space, int kernel, int expand,
                             int depth) {
  ArchGenes g;
  g.space = space;
  for (auto& s : g.stages) {
    s.depth = depth;
    s.kernel.fill(kernel);
    s.expand.fill(expand);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Layers

const char* LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "Conv2d";
    case LayerKind::kDepthwiseConv2d: return "DepthwiseConv2d";
    case LayerKind::kPointwiseConv2d: return "PointwiseConv2d";
    case LayerKind::kAvgPool: return "AvgPool";
    case LayerKind::kFullyConnected: return "FullyConnected";
    case LayerKind::kResidualAdd: return "ResidualAdd";
  }
  return "?";
}

LayerKind LayerKindFromName(std::string_view name) {
  for (int k = 0; k < kNumLayerKinds; ++k) {
    const auto kind = static_cast<LayerKind>(k);
    if (name == LayerKindName(kind)) return kind;
  }
  throw Error(ErrorCode::kParse, "unknown layer kind '" + std::string(name) + "'");
}

int64_t LayerSpec::WeightCount() const {
  const int64_t k2 = int64_t{kernel_size} * kernel_size;
  switch (kind) {
    case LayerKind::kConv2d: return k2 * in_channels * out_channels;
    case LayerKind::kDepthwiseConv2d: return k2 * out_channels;
    case LayerKind::kPointwiseConv2d:
    case LayerKind::kFullyConnected:
      return int64_t{in_channels} * out_channels;
    default: return 0;
  }
}

int64_t LayerSpec::BiasCount() const {
  return WeightCount() > 0 ? out_channels : 0;
}

int64_t LayerSpec::Macs() const {
  const int64_t spatial = int64_t{output_shape.h} * output_shape.w;
  switch (kind) {
    case LayerKind::kFullyConnected:
      return int64_t{in_channels} * out_channels;
    case LayerKind::kAvgPool:
    case LayerKind::kResidualAdd:
      return 0;
    default:
      return WeightCount() * spatial;
  }
}

// ---------------------------------------------------------------------------
// NetworkArch

const Shape& NetworkArch::TensorShape(int tensor) const {
  if (tensor == 0) return input_shape;
  return layers.at(tensor - 1).output_shape;
}

int NetworkArch::LastUse(int tensor) const {
  int last = -1;
  for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
    if (i == tensor || layers[i].skip_tensor == tensor) last = i;
  }
  return last;
}

int NetworkArch::BlockOf(int layer) const {
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
    if (layer >= blocks[b].first_layer &&
        layer < blocks[b].first_layer + blocks[b].num_layers) {
      return b;
    }
  }
  return -1;
}

void NetworkArch::Validate() const {
  if (input_shape.elements() <= 0) {
    throw Error(ErrorCode::kInvalidArch, "empty input shape");
  }
  if (layers.empty()) throw Error(ErrorCode::kInvalidArch, "no layers");
  for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
    const LayerSpec& l = layers[i];
    if (!(l.input_shape == TensorShape(i))) {
      BadArch(i, "input shape does not chain from the previous layer");
    }
    if (l.in_channels != l.input_shape.c || l.out_channels != l.output_shape.c) {
      BadArch(i, "channel counts disagree with shapes");
    }
    if (l.kind != LayerKind::kResidualAdd && l.skip_tensor != -1) {
      BadArch(i, "only ResidualAdd may reference a skip tensor");
    }
    switch (l.kind) {
      case LayerKind::kConv2d:
      case LayerKind::kDepthwiseConv2d:
      case LayerKind::kPointwiseConv2d: {
        if (l.kernel_size < 1 || l.stride < 1 || l.padding < 0) {
          BadArch(i, "bad kernel/stride/padding");
        }
        const int ho = ConvOut(l.input_shape.h, l.kernel_size, l.stride, l.padding);
        const int wo = ConvOut(l.input_shape.w, l.kernel_size, l.stride, l.padding);
        if (ho < 1 || wo < 1 || l.output_shape.h != ho || l.output_shape.w != wo) {
          BadArch(i, "output spatial size does not follow the conv formula");
        }
        if (l.kind == LayerKind::kDepthwiseConv2d &&
            l.in_channels != l.out_channels) {
          BadArch(i, "depthwise conv must keep the channel count");
        }
        if (l.kind == LayerKind::kPointwiseConv2d &&
            (l.kernel_size != 1 || l.stride != 1 || l.padding != 0)) {
          BadArch(i, "pointwise conv must be 1x1, stride 1, no padding");
        }
        break;
      }
      case LayerKind::kAvgPool:
        if (!(l.output_shape == Shape{l.input_shape.c, 1, 1})) {
          BadArch(i, "global average pool must produce (C, 1, 1)");
        }
        break;
      case LayerKind::kFullyConnected:
        if (l.input_shape.h != 1 || l.input_shape.w != 1 ||
            l.output_shape.h != 1 || l.output_shape.w != 1) {
          BadArch(i, "fully-connected layer needs (C, 1, 1) tensors");
        }
        break;
      case LayerKind::kResidualAdd:
        if (l.skip_tensor < 0 || l.skip_tensor > i) {
          BadArch(i, "residual add must reference an earlier tensor");
        }
        if (!(TensorShape(l.skip_tensor) == l.input_shape) ||
            !(l.output_shape == l.input_shape)) {
          BadArch(i, "residual operands must have identical shapes");
        }
        if (l.has_relu6) BadArch(i, "residual add does not fuse ReLU6");
        break;
    }
  }
  int next = 0;
  for (const Block& b : blocks) {
    if (b.first_layer != next || b.num_layers < 1) {
      throw Error(ErrorCode::kInvalidArch, "blocks must tile the layer list");
    }
    next += b.num_layers;
  }
  if (!blocks.empty() && next != static_cast<int>(layers.size())) {
    throw Error(ErrorCode::kInvalidArch, "blocks must tile the layer list");
  }
}

// ---------------------------------------------------------------------------
// NetworkBuilder

NetworkBuilder::NetworkBuilder(std::string name, Shape input) : shape_(input) {
  arch_.name = std::move(name);
  arch_.input_shape = input;
}

void NetworkBuilder::BeginBlock(std::string kind, int stage) {
  if (in_block_) EndBlock();
  arch_.blocks.push_back(Block{std::move(kind), stage,
                               static_cast<int>(arch_.layers.size()), 0});
  in_block_ = true;
}

void NetworkBuilder::EndBlock() {
  if (!in_block_) return;
  Block& b = arch_.blocks.back();
  b.num_layers = static_cast<int>(arch_.layers.size()) - b.first_layer;
  in_block_ = false;
}

int NetworkBuilder::Push(LayerSpec layer) {
  layer.input_shape = shape_;
  layer.in_channels = shape_.c;
  layer.out_channels = layer.output_shape.c;
  shape_ = layer.output_shape;
  arch_.layers.push_back(layer);
  return current_tensor();
}

int NetworkBuilder::Conv(int kernel, int stride, int out_channels, bool relu6) {
  LayerSpec l;
  l.kind = kernel == 1 && stride == 1 ? LayerKind::kPointwiseConv2d
                                      : LayerKind::kConv2d;
  l.kernel_size = kernel;
  l.stride = stride;
  l.padding = kernel / 2;
  l.has_relu6 = relu6;
  l.output_shape = {out_channels, ConvOut(shape_.h, kernel, stride, l.padding),
                    ConvOut(shape_.w, kernel, stride, l.padding)};
  return Push(l);
}

int NetworkBuilder::Depthwise(int kernel, int stride, bool relu6) {
  LayerSpec l;
  l.kind = LayerKind::kDepthwiseConv2d;
  l.kernel_size = kernel;
  l.stride = stride;
  l.padding = kernel / 2;
  l.has_relu6 = relu6;
  l.output_shape = {shape_.c, ConvOut(shape_.h, kernel, stride, l.padding),
                    ConvOut(shape_.w, kernel, stride, l.padding)};
  return Push(l);
}

int NetworkBuilder::Pointwise(int out_channels, bool relu6) {
  LayerSpec l;
  l.kind = LayerKind::kPointwiseConv2d;
  l.has_relu6 = relu6;
  l.output_shape = {out_channels, shape_.h, shape_.w};
  return Push(l);
}

int NetworkBuilder::ResidualAdd(int skip_tensor) {
  LayerSpec l;
  l.kind = LayerKind::kResidualAdd;
  l.skip_tensor = skip_tensor;
  l.output_shape = shape_;
  return Push(l);
}

int NetworkBuilder::AvgPool() {
  LayerSpec l;
  l.kind = LayerKind::kAvgPool;
  l.kernel_size = shape_.h;
  l.output_shape = {shape_.c, 1, 1};
  return Push(l);
}

int NetworkBuilder::FullyConnected(int out_channels) {
  LayerSpec l;
  l.kind = LayerKind::kFullyConnected;
  l.output_shape = {out_channels, 1, 1};
  return Push(l);
}

NetworkArch NetworkBuilder::Build(int num_classes) && {
  EndBlock();
  arch_.num_classes = num_classes;
  arch_.Validate();
  return std::move(arch_);
}

// ---------------------------------------------------------------------------
// Builders and cost model

int ScaleChannels(int base, int width_tenths) {
  const int rounded = (base * width_tenths + 40) / 80 * 8;
  return std::max(8, rounded);
}

NetworkArch BuildNetwork(const ArchGenes& genes, int num_classes) {
  genes.Validate();
  const int w = genes.space.width_tenths();
  const int r = genes.space.resolution();
  NetworkBuilder b("tinyco-" + genes.space.Name(), Shape{3, r, r});

  b.BeginBlock("stem", -1);
  b.Conv(3, 2, ScaleChannels(kStemChannels, w), true);
  for (int s = 0; s < kNumStages; ++s) {
    const StageGenes& stage = genes.stages[s];
    const int out_channels = ScaleChannels(kStageChannels[s], w);
    for (int blk = 0; blk < stage.depth; ++blk) {
      AddInvertedBottleneck(b, "mbconv", s + 1, stage.kernel[blk],
                            stage.expand[blk], blk == 0 ? kStageStrides[s] : 1,
                            out_channels);
    }
  }
  b.BeginBlock("head", -1);
  b.Pointwise(ScaleChannels(kMixChannels, w), true);
  b.AvgPool();
  b.FullyConnected(num_classes);
  return std::move(b).Build(num_classes);
}

NetworkArch BuildMobileNetV2(SpaceConfig space, int num_classes) {
  return BuildMobileNetV2Scaled(space.width_tenths() * 10, space.resolution(),
                                num_classes, "mbv2-" + space.Name());
}

NetworkArch BuildMobileNetV2Scaled(int width_percent, int resolution,
                                   int num_classes, std::string name) {
  if (width_percent <= 0 || resolution < 32) {
    throw Error(ErrorCode::kInvalidGene,
                fmt::format("bad baseline scale w={}% r={}", width_percent,
                            resolution));
  }
  if (name.empty()) {
    name = fmt::format("mbv2-w{}.{:02d}-r{}", width_percent / 100,
                       width_percent % 100, resolution);
  }
  auto ch = [&](int base) {
    return std::max(8, (base * width_percent + 400) / 800 * 8);
  };
  const int r = resolution;
  NetworkBuilder b(std::move(name), Shape{3, r, r});

  b.BeginBlock("stem", -1);
  b.Conv(3, 2, ch(32), true);
  AddInvertedBottleneck(b, "first", -1, 3, 1, 1, ch(16));
  for (int s = 0; s < static_cast<int>(kMbV2Stages.size()); ++s) {
    const MbV2Stage& st = kMbV2Stages[s];
    for (int blk = 0; blk < st.blocks; ++blk) {
      AddInvertedBottleneck(b, "mbconv", s + 1, 3, 6, blk == 0 ? st.stride : 1,
                            ch(st.channels));
    }
  }
  b.BeginBlock("head", -1);
  b.Pointwise(ch(1280), true);
  b.AvgPool();
  b.FullyConnected(num_classes);
  return std::move(b).Build(num_classes);
}

int64_t CountMacs(const NetworkArch& arch) {
  int64_t total = 0;
  for (const LayerSpec& l : arch.layers) total += l.Macs();
  return total;
}

int64_t ModelSizeBytes(const NetworkArch& arch, int bits) {
  if (bits != 8 && bits != 4) {
    throw Error(ErrorCode::kUnsupportedBitWidth,
                "weights can be accounted at 8 or 4 bits, got " +
                    std::to_string(bits));
  }
  int64_t total = 0;
  for (const LayerSpec& l : arch.layers) {
    total += (l.WeightCount() * bits + 7) / 8;
    total += l.BiasCount() * 4;
  }
  return total;
}

}  // namespace tinyco
