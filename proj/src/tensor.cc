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

#include "tinyco/tensor.h"

#include <string>

#include "tinyco/error.h"
#include "tinyco/rng.h"

namespace tinyco {

TensorBuf RandomTensor(Shape shape, QuantParams quant, uint64_t seed) {
  TensorBuf t;
  t.shape = shape;
  t.quant = quant;
  t.data.resize(shape.elements());
  Rng rng(seed);
  for (int8_t& v : t.data) v = static_cast<int8_t>(int(rng.UniformIndex(256)) - 128);
  return t;
}

std::vector<uint8_t> EncodeTensorFile(const TensorBuf& tensor) {
  std::vector<uint8_t> out;
  out.reserve(12 + tensor.data.size());
  for (int dim : {tensor.shape.c, tensor.shape.h, tensor.shape.w}) {
    const auto u = static_cast<uint32_t>(dim);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(u >> (8 * i)));
  }
  for (int8_t v : tensor.data) out.push_back(static_cast<uint8_t>(v));
  return out;
}

TensorBuf DecodeTensorFile(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12) {
    throw Error(ErrorCode::kParse, "tensor file shorter than its 12-byte header");
  }
  int dims[3];
  for (int d = 0; d < 3; ++d) {
    uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= uint32_t{bytes[4 * d + i]} << (8 * i);
    dims[d] = static_cast<int32_t>(u);
    if (dims[d] <= 0) throw Error(ErrorCode::kParse, "tensor dims must be positive");
  }
  TensorBuf t;
  t.shape = {dims[0], dims[1], dims[2]};
  const auto n = static_cast<size_t>(t.shape.elements());
  if (bytes.size() != 12 + n) {
    throw Error(ErrorCode::kParse, "tensor file holds " +
                                       std::to_string(bytes.size() - 12) +
                                       " values, header says " + std::to_string(n));
  }
  t.data.resize(n);
  for (size_t i = 0; i < n; ++i) t.data[i] = static_cast<int8_t>(bytes[12 + i]);
  return t;
}

uint64_t TensorHash(const TensorBuf& tensor) {
  const std::vector<uint8_t> bytes = EncodeTensorFile(tensor);
  return Fnv1a64(bytes.data(), bytes.size());
}

}  // namespace tinyco
