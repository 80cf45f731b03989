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

// Architecture encoding, concrete layer graphs and their static cost model.

#ifndef TINYCO_GRAPH_H_
#define TINYCO_GRAPH_H_

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tinyco {

inline constexpr int kNumStages = 5;
inline constexpr int kMaxDepth = 4;
inline constexpr std::array<int, 3> kKernelChoices = {3, 5, 7};
inline constexpr std::array<int, 3> kExpandChoices = {3, 4, 6};
inline constexpr std::array<int, 3> kDepthChoices = {2, 3, 4};
inline constexpr int kDefaultNumClasses = 1000;

// One (width multiplier, input resolution) pair. The width is held in
// tenths so that every legal value is exact: W = {2..10}/10,
// R = {48, 64, ..., 224}.
class SpaceConfig {
 public:
  static constexpr int kNumWidths = 9;
  static constexpr int kNumResolutions = 12;

  SpaceConfig() : width_tenths_(10), resolution_(224) {}

  // Throws Error(kInvalidGene) for values outside W x R.
  static SpaceConfig Make(int width_tenths, int resolution);
  // Accepts the "w0.5-r144" form used on the command line.
  static SpaceConfig Parse(std::string_view text);
  // All 108 configurations, widths ascending then resolutions ascending.
  static std::vector<SpaceConfig> All();

  int width_tenths() const { return width_tenths_; }
  double width_multiplier() const { return width_tenths_ / 10.0; }
  int resolution() const { return resolution_; }
  std::string Name() const;

  friend auto operator<=>(const SpaceConfig&, const SpaceConfig&) = default;

 private:
  SpaceConfig(int width_tenths, int resolution)
      : width_tenths_(width_tenths), resolution_(resolution) {}

  int width_tenths_;
  int resolution_;
};

struct StageGenes {
  int depth = 2;
  // Per-block choices; only the first `depth` entries are active.
  std::array<int, kMaxDepth> kernel = {3, 3, 3, 3};
  std::array<int, kMaxDepth> expand = {3, 3, 3, 3};

  friend bool operator==(const StageGenes&, const StageGenes&) = default;
};

// The searchable encoding. Viewed as a flat vector of kNumGenes categorical
// genes (per stage: depth, 4 kernels, 4 expansions) for crossover/mutation.
struct ArchGenes {
  static constexpr int kGenesPerStage = 1 + 2 * kMaxDepth;
  static constexpr int kNumGenes = kNumStages * kGenesPerStage;

  SpaceConfig space;
  std::array<StageGenes, kNumStages> stages;

  // Throws Error(kInvalidGene) if any value is outside its legal set.
  void Validate() const;

  int Gene(int index) const;
  void SetGene(int index, int value);
  static std::span<const int> GeneChoices(int index);

  static ArchGenes Uniform(SpaceConfig space, int kernel, int expand, int depth);
  static ArchGenes Max(SpaceConfig space) { return Uniform(space, 7, 6, 4); }

  friend bool operator==(const ArchGenes&, const ArchGenes&) = default;
};

enum class LayerKind {
  kConv2d,
  kDepthwiseConv2d,
  kPointwiseConv2d,
  kAvgPool,
  kFullyConnected,
  kResidualAdd,
};
inline constexpr int kNumLayerKinds = 6;

const char* LayerKindName(LayerKind kind);
LayerKind LayerKindFromName(std::string_view name);

struct Shape {
  int c = 0;
  int h = 0;
  int w = 0;

  int64_t elements() const { return int64_t{c} * h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kConv2d;
  int kernel_size = 1;
  int stride = 1;
  int padding = 0;
  int in_channels = 0;
  int out_channels = 0;
  Shape input_shape;
  Shape output_shape;
  bool has_relu6 = false;
  // ResidualAdd only: id of the second operand tensor. Tensor 0 is the
  // network input and tensor i + 1 is the output of layer i.
  int skip_tensor = -1;

  // Only spatial convolutions (Conv2d with k > 1) go through im2col.
  bool UsesIm2col() const {
    return kind == LayerKind::kConv2d && kernel_size > 1;
  }
  int64_t WeightCount() const;
  int64_t BiasCount() const;
  int64_t Macs() const;
};

struct Block {
  std::string kind;  // "stem", "first", "mbconv" or "head"
  int stage = -1;    // inverted-bottleneck stage, 1-based; -1 outside stages
  int first_layer = 0;
  int num_layers = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

struct NetworkArch {
  std::string name;
  int num_classes = kDefaultNumClasses;
  Shape input_shape;
  std::vector<LayerSpec> layers;
  std::vector<Block> blocks;

  int num_tensors() const { return static_cast<int>(layers.size()) + 1; }
  const Shape& TensorShape(int tensor) const;
  // Last layer index reading `tensor` (as main or skip input); -1 if none.
  int LastUse(int tensor) const;
  // Block index containing `layer`.
  int BlockOf(int layer) const;

  // Checks shape chaining, per-kind channel rules and residual legality.
  // Throws Error(kInvalidArch).
  void Validate() const;
};

// Appends layers with shape inference. Used by the builders below and by
// tests that need hand-made graphs.
class NetworkBuilder {
 public:
  NetworkBuilder(std::string name, Shape input);

  void BeginBlock(std::string kind, int stage);
  void EndBlock();

  // Each returns the id of the produced tensor.
  int Conv(int kernel, int stride, int out_channels, bool relu6);
  int Depthwise(int kernel, int stride, bool relu6);
  int Pointwise(int out_channels, bool relu6);
  int ResidualAdd(int skip_tensor);
  int AvgPool();
  int FullyConnected(int out_channels);

  int current_tensor() const { return static_cast<int>(arch_.layers.size()); }
  const Shape& current_shape() const { return shape_; }

  NetworkArch Build(int num_classes) &&;

 private:
  int Push(LayerSpec layer);

  NetworkArch arch_;
  Shape shape_;
  bool in_block_ = false;
};

// Scales a base channel count by width/10 and rounds to the nearest
// multiple of 8 (ties up), never below 8.
int ScaleChannels(int base, int width_tenths);

// MobileNetV2-derived searchable network: 3x3 stride-2 stem, five
// inverted-bottleneck stages, a 1x1 feature-mix layer, global average pool
// and a fully-connected classifier.
NetworkArch BuildNetwork(const ArchGenes& genes,
                         int num_classes = kDefaultNumClasses);

// Compound-scaled MobileNetV2 (all kernels 3, expansion 6, original block
// counts), the fixed-architecture baseline.
NetworkArch BuildMobileNetV2(SpaceConfig space,
                             int num_classes = kDefaultNumClasses);
// Same baseline at a width given in hundredths (0.75 -> 75), for scales off
// the tenths grid. An empty name becomes "mbv2-w0.75-r224".
NetworkArch BuildMobileNetV2Scaled(int width_percent, int resolution,
                                   int num_classes = kDefaultNumClasses,
                                   std::string name = "");

int64_t CountMacs(const NetworkArch& arch);

// Flash footprint: weights at `bits` (8 or 4) rounded up per tensor plus
// int32 biases. Throws Error(kUnsupportedBitWidth).
int64_t ModelSizeBytes(const NetworkArch& arch, int bits);

}  // namespace tinyco

#endif  // TINYCO_GRAPH_H_
