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

#include "tinyco/quant.h"

#include <cmath>
#include <string>

#include "tinyco/error.h"

namespace tinyco {

void QuantParams::Validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument, "quantization scale must be > 0");
  }
  if (zero_point < -128 || zero_point > 127) {
    throw Error(ErrorCode::kInvalidArgument,
                "zero point " + std::to_string(zero_point) + " outside int8");
  }
  if (bit_width != 8) {
    throw Error(ErrorCode::kUnsupportedBitWidth, "activations are int8 only");
  }
}

Requant QuantizeMultiplier(double real) {
  if (!(real > 0.0)) return {};
  int exponent = 0;
  const double q = std::frexp(real, &exponent);  // real = q * 2^exponent
  int64_t m = std::llround(q * static_cast<double>(int64_t{1} << 31));
  if (m == (int64_t{1} << 31)) {
    m /= 2;
    ++exponent;
  }
  Requant r{static_cast<int32_t>(m), -exponent};
  if (r.shift < -31) {
    throw Error(ErrorCode::kInvalidArgument, "requantization multiplier too large");
  }
  if (31 + r.shift > 62) return {};  // underflows to zero for any int32 input
  return r;
}

}  // namespace tinyco
