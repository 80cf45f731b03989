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

#ifndef TINYCO_WEIGHTS_H_
#define TINYCO_WEIGHTS_H_

#include <cstdint>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/quant.h"

namespace tinyco {

// Everything one layer needs at inference time, already in integer form.
// Weight layouts: Conv2d [cout][cin][ky][kx], depthwise [c][ky][kx],
// pointwise and fully-connected [cout][cin].
struct LayerParams {
  std::vector<int8_t> weights;
  std::vector<int32_t> bias;
  QuantParams weight_quant;  // symmetric: zero_point == 0
  Requant requant;
  int input_zero_point = 0;
  int output_zero_point = 0;
  // ReLU6 (when fused) is the clamp to [act_min, act_max].
  int act_min = -128;
  int act_max = 127;
  // ResidualAdd only: operands are rescaled by these integer factors before
  // the sum is requantized.
  int skip_zero_point = 0;
  int32_t input_multiplier = 0;
  int32_t skip_multiplier = 0;
};

struct WeightSet {
  uint64_t seed = 0;
  bool bn_folded = true;
  std::vector<QuantParams> tensor_quant;  // indexed by tensor id
  std::vector<LayerParams> layers;

  // Throws Error(kShapeMismatch) if sizes disagree with `arch`.
  void CheckAgainst(const NetworkArch& arch) const;
};

struct WeightGenOptions {
  // Every weight zero; outputs collapse to the requantized bias.
  bool zero_weights = false;
};

// Draws float weights and batch-norm statistics from `seed`, folds the BN
// into the weights and bias, then quantizes: per-tensor symmetric weights,
// per-tensor affine activations sized for the ReLU6 (or signed) range.
WeightSet GenWeights(const NetworkArch& arch, uint64_t seed,
                     const WeightGenOptions& options = {});

// Little-endian binary image, stable across runs for identical inputs.
std::vector<uint8_t> SerializeWeights(const WeightSet& weights);

}  // namespace tinyco

#endif  // TINYCO_WEIGHTS_H_
