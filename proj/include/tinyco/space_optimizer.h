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

// Search-space optimization: score every (width, resolution) configuration
// by the compute its constraint-satisfying networks can afford.

#ifndef TINYCO_SPACE_OPTIMIZER_H_
#define TINYCO_SPACE_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/planner.h"

namespace tinyco {

inline constexpr int kDefaultSamplesPerSpace = 1000;

struct SpaceStats {
  SpaceConfig config;
  int sampled = 0;
  int satisfying = 0;
  std::vector<int64_t> flops_samples;  // MACs of satisfying nets, ascending
  int64_t flops_sum = 0;
  double mean_flops = 0.0;
  int64_t p80_flops = 0;  // nearest-rank 80th percentile
  bool eligible = false;  // satisfying fraction reached the winning threshold

  bool empty() const { return satisfying == 0; }
};

struct SpaceOptions {
  double min_satisfying_fraction = 0.05;
  int num_classes = kDefaultNumClasses;
  int jobs = 1;
};

// Uniform independent draw of every gene from its legal set.
ArchGenes SampleGenes(SpaceConfig config, uint64_t seed);

// Seed of the i-th sample of `config` under root `seed`. Derived per
// config so evaluation order and parallelism cannot change the draws.
uint64_t SpaceSampleSeed(uint64_t seed, SpaceConfig config, int index);

struct SampleMetrics {
  int64_t macs = 0;
  int64_t peak_sram_bytes = 0;
  int64_t flash_bytes = 0;
};

// Builds and plans (in-place depthwise on) the m sampled networks.
std::vector<SampleMetrics> ProfileSpace(SpaceConfig config, int m, uint64_t seed,
                                        int num_classes = kDefaultNumClasses);

SpaceStats StatsForDevice(SpaceConfig config,
                          const std::vector<SampleMetrics>& samples,
                          const DeviceProfile& device,
                          double min_satisfying_fraction = 0.05);

SpaceStats EvaluateSpace(SpaceConfig config, const DeviceProfile& device, int m,
                         uint64_t seed, const SpaceOptions& options = {});

// Orders stats best-first: eligible configs by mean MACs, then ineligible
// non-empty ones, then empty ones; ties go to higher resolution, then
// higher width.
void RankSpaces(std::vector<SpaceStats>& stats);

struct SpaceSelection {
  SpaceConfig best;
  std::vector<SpaceStats> ranked;
};

// Evaluates all 108 configurations. Throws Error(kEmptySpace) when no
// configuration is eligible to win.
SpaceSelection SelectBestSpace(const DeviceProfile& device, int m, uint64_t seed,
                               const SpaceOptions& options = {});

}  // namespace tinyco

#endif  // TINYCO_SPACE_OPTIMIZER_H_
