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

#ifndef TINYCO_QUANT_H_
#define TINYCO_QUANT_H_

#include <algorithm>
#include <cstdint>

namespace tinyco {

// Affine int8 quantization: real = scale * (q - zero_point).
struct QuantParams {
  double scale = 1.0;
  int zero_point = 0;
  int bit_width = 8;

  // Throws Error(kInvalidArgument) unless scale > 0, zero_point in int8 and
  // bit_width == 8.
  void Validate() const;
};

// Fixed-point rescale: real ~= multiplier * 2^-(31 + shift) with
// multiplier in [2^30, 2^31) (or 0). shift may be negative down to -31.
struct Requant {
  int32_t multiplier = 0;
  int shift = 0;

  friend bool operator==(const Requant&, const Requant&) = default;
};

Requant QuantizeMultiplier(double real);

// acc * multiplier / 2^(31 + shift), rounded half away from zero. Integer
// arithmetic only.
inline int64_t ApplyRequant(int64_t acc, Requant r) {
  const int64_t prod = acc * r.multiplier;
  const int s = 31 + r.shift;
  if (s <= 0) return prod;
  const int64_t half = int64_t{1} << (s - 1);
  return prod >= 0 ? (prod + half) >> s : -((-prod + half) >> s);
}

inline int8_t SaturateToInt8(int64_t v, int lo, int hi) {
  return static_cast<int8_t>(std::clamp<int64_t>(v, lo, hi));
}

}  // namespace tinyco

#endif  // TINYCO_QUANT_H_
