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

#include "tinyco/weights.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "tinyco/error.h"
#include "tinyco/rng.h"

namespace tinyco {

namespace {

constexpr double kBnEpsilon = 1e-5;
constexpr double kSignedRange = 8.0;  // activations without ReLU6: [-8, 8]

QuantParams ReluQuant(Rng& rng) {
  QuantParams q;
  q.scale = 6.0 / 255.0 * rng.Uniform(0.9, 1.1);
  q.zero_point = -128 + static_cast<int>(rng.UniformIndex(5));
  return q;
}

QuantParams SignedQuant(Rng& rng) {
  QuantParams q;
  q.scale = 2.0 * kSignedRange / 255.0 * rng.Uniform(0.9, 1.1);
  q.zero_point = static_cast<int>(rng.UniformIndex(7)) - 3;
  return q;
}

void SetActivationRange(LayerParams& p, const QuantParams& out, bool relu6) {
  p.output_zero_point = out.zero_point;
  if (relu6) {
    p.act_min = std::max(-128, out.zero_point);
    p.act_max = static_cast<int>(std::min<long>(
        127, out.zero_point + std::lround(6.0 / out.scale)));
  } else {
    p.act_min = -128;
    p.act_max = 127;
  }
}

int32_t ClampInt32(double v) {
  constexpr double lo = std::numeric_limits<int32_t>::min();
  constexpr double hi = std::numeric_limits<int32_t>::max();
  return static_cast<int32_t>(std::llround(std::clamp(v, lo, hi)));
}

// Draws a conv-like layer in float, folds BN, quantizes.
void GenConvLike(const LayerSpec& l, const QuantParams& in,
                 const QuantParams& out, Rng& rng, bool zero_weights,
                 LayerParams& p) {
  const int64_t count = l.WeightCount();
  const int cout = l.out_channels;
  const int64_t per_out = count / cout;
  const double bound = std::sqrt(6.0 / static_cast<double>(per_out));

  std::vector<double> w(count);
  for (double& v : w) v = rng.Uniform(-bound, bound);
  std::vector<double> b(cout);
  const bool fold_bn = l.kind != LayerKind::kFullyConnected;
  for (int c = 0; c < cout; ++c) {
    if (!fold_bn) {
      b[c] = rng.Uniform(-0.1, 0.1);
      continue;
    }
    const double gamma = rng.Uniform(0.5, 1.5);
    const double beta = rng.Uniform(-0.2, 0.2);
    const double mean = rng.Uniform(-0.2, 0.2);
    const double var = rng.Uniform(0.5, 1.5);
    const double factor = gamma / std::sqrt(var + kBnEpsilon);
    for (int64_t j = 0; j < per_out; ++j) w[c * per_out + j] *= factor;
    b[c] = beta - mean * factor;
  }

  double max_abs = 0.0;
  for (double v : w) max_abs = std::max(max_abs, std::abs(v));
  p.weight_quant.scale = max_abs > 0 ? max_abs / 127.0 : 1.0 / 127.0;
  p.weight_quant.zero_point = 0;
  p.weights.resize(count);
  for (int64_t j = 0; j < count; ++j) {
    p.weights[j] = zero_weights
                       ? int8_t{0}
                       : static_cast<int8_t>(std::clamp<long>(
                             std::lround(w[j] / p.weight_quant.scale), -127, 127));
  }
  const double acc_scale = in.scale * p.weight_quant.scale;
  p.bias.resize(cout);
  for (int c = 0; c < cout; ++c) p.bias[c] = ClampInt32(b[c] / acc_scale);
  p.requant = QuantizeMultiplier(acc_scale / out.scale);
  p.input_zero_point = in.zero_point;
  SetActivationRange(p, out, l.has_relu6);
}

template <typename T>
void Put(std::vector<uint8_t>& out, T v) {
  static_assert(sizeof(T) <= sizeof(uint64_t));
  uint64_t u = 0;
  std::memcpy(&u, &v, sizeof(T));  // little-endian host
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<uint8_t>(u >> (8 * i)));
  }
}

}  // namespace

void WeightSet::CheckAgainst(const NetworkArch& arch) const {
  if (layers.size() != arch.layers.size() ||
      tensor_quant.size() != static_cast<size_t>(arch.num_tensors())) {
    throw Error(ErrorCode::kShapeMismatch, "weight set does not match network");
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = arch.layers[i];
    if (static_cast<int64_t>(layers[i].weights.size()) != l.WeightCount() ||
        static_cast<int64_t>(layers[i].bias.size()) != l.BiasCount()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(i) + ": weight shapes do not match");
    }
  }
}

WeightSet GenWeights(const NetworkArch& arch, uint64_t seed,
                     const WeightGenOptions& options) {
  arch.Validate();
  WeightSet ws;
  ws.seed = seed;
  ws.bn_folded = true;
  Rng qrng(DeriveSeed(seed, "activation-quant"));

  ws.tensor_quant.resize(arch.num_tensors());
  ws.tensor_quant[0].scale = 2.0 / 255.0 * qrng.Uniform(0.9, 1.1);
  ws.tensor_quant[0].zero_point = static_cast<int>(qrng.UniformIndex(7)) - 3;
  for (size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& l = arch.layers[i];
    QuantParams& q = ws.tensor_quant[i + 1];
    if (l.kind == LayerKind::kAvgPool) {
      q = ws.tensor_quant[i];
      q.scale *= qrng.Uniform(0.9, 1.1);
    } else {
      q = l.has_relu6 ? ReluQuant(qrng) : SignedQuant(qrng);
    }
  }

  ws.layers.resize(arch.layers.size());
  for (size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& l = arch.layers[i];
    const QuantParams& in = ws.tensor_quant[i];
    const QuantParams& out = ws.tensor_quant[i + 1];
    LayerParams& p = ws.layers[i];
    Rng rng(DeriveSeed(seed, "layer", {i}));
    switch (l.kind) {
      case LayerKind::kConv2d:
      case LayerKind::kDepthwiseConv2d:
      case LayerKind::kPointwiseConv2d:
      case LayerKind::kFullyConnected:
        GenConvLike(l, in, out, rng, options.zero_weights, p);
        break;
      case LayerKind::kAvgPool: {
        const double pixels = static_cast<double>(l.input_shape.h) * l.input_shape.w;
        p.input_zero_point = in.zero_point;
        p.requant = QuantizeMultiplier(in.scale / (out.scale * pixels));
        SetActivationRange(p, out, false);
        break;
      }
      case LayerKind::kResidualAdd: {
        const QuantParams& skip = ws.tensor_quant[l.skip_tensor];
        const double larger = std::max(in.scale, skip.scale);
        constexpr double kOne = 1 << 16;
        p.input_zero_point = in.zero_point;
        p.skip_zero_point = skip.zero_point;
        p.input_multiplier = static_cast<int32_t>(std::lround(kOne * in.scale / larger));
        p.skip_multiplier = static_cast<int32_t>(std::lround(kOne * skip.scale / larger));
        p.requant = QuantizeMultiplier(larger / (kOne * out.scale));
        SetActivationRange(p, out, false);
        break;
      }
    }
  }
  return ws;
}

std::vector<uint8_t> SerializeWeights(const WeightSet& weights) {
  std::vector<uint8_t> out;
  const char magic[8] = {'T', 'C', 'W', 'E', 'I', 'G', 'H', '1'};
  out.insert(out.end(), magic, magic + 8);
  Put<uint64_t>(out, weights.seed);
  Put<uint8_t>(out, weights.bn_folded ? 1 : 0);
  Put<uint32_t>(out, static_cast<uint32_t>(weights.tensor_quant.size()));
  for (const QuantParams& q : weights.tensor_quant) {
    Put<double>(out, q.scale);
    Put<int32_t>(out, q.zero_point);
  }
  Put<uint32_t>(out, static_cast<uint32_t>(weights.layers.size()));
  for (const LayerParams& p : weights.layers) {
    Put<uint32_t>(out, static_cast<uint32_t>(p.weights.size()));
    for (int8_t w : p.weights) Put<int8_t>(out, w);
    Put<uint32_t>(out, static_cast<uint32_t>(p.bias.size()));
    for (int32_t b : p.bias) Put<int32_t>(out, b);
    Put<double>(out, p.weight_quant.scale);
    Put<int32_t>(out, p.requant.multiplier);
    Put<int32_t>(out, p.requant.shift);
    Put<int32_t>(out, p.input_zero_point);
    Put<int32_t>(out, p.output_zero_point);
    Put<int32_t>(out, p.act_min);
    Put<int32_t>(out, p.act_max);
    Put<int32_t>(out, p.skip_zero_point);
    Put<int32_t>(out, p.input_multiplier);
    Put<int32_t>(out, p.skip_multiplier);
  }
  return out;
}

}  // namespace tinyco
