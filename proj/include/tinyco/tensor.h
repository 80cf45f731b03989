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

#ifndef TINYCO_TENSOR_H_
#define TINYCO_TENSOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/quant.h"

namespace tinyco {

// Int8 activation tensor in CHW order.
struct TensorBuf {
  Shape shape;
  std::vector<int8_t> data;
  QuantParams quant;

  int8_t at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * shape.h + y) * shape.w + x];
  }
};

TensorBuf RandomTensor(Shape shape, QuantParams quant, uint64_t seed);

// File format: C, H, W as little-endian int32, then C*H*W int8 values.
std::vector<uint8_t> EncodeTensorFile(const TensorBuf& tensor);
TensorBuf DecodeTensorFile(std::span<const uint8_t> bytes);

uint64_t TensorHash(const TensorBuf& tensor);

}  // namespace tinyco

#endif  // TINYCO_TENSOR_H_
