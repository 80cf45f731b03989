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

#ifndef TINYCO_RNG_H_
#define TINYCO_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace tinyco {

// 64-bit FNV-1a. Used for digests and for turning labels into seed material.
uint64_t Fnv1a64(const void* data, size_t size,
                 uint64_t basis = 0xcbf29ce484222325ULL);
uint64_t Fnv1a64(std::string_view text);

uint64_t SplitMix64(uint64_t x);

// Labeled seed derivation: DeriveSeed(root, "evolve", {iteration, child})
// gives an independent stream per (label, indices) so that work can be
// scheduled in any order without changing the draws.
uint64_t DeriveSeed(uint64_t root, std::string_view label,
                    std::initializer_list<uint64_t> indices = {});

// xoshiro256** seeded through SplitMix64. All draws go through integer
// arithmetic only, so sequences are identical across platforms and
// standard libraries (unlike std::uniform_int_distribution).
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t Next();
  // Uniform in [0, n). n must be > 0.
  uint64_t UniformIndex(uint64_t n);
  // Uniform in [0, 1) with 53 bits.
  double UniformReal();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * UniformReal(); }
  bool Bernoulli(double p) { return UniformReal() < p; }

 private:
  uint64_t s_[4];
};

}  // namespace tinyco

#endif  // TINYCO_RNG_H_
