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

#include "tinyco/space_optimizer.h"

#include <algorithm>
#include <tuple>

#include "tinyco/error.h"
#include "tinyco/parallel.h"
#include "tinyco/rng.h"

namespace tinyco {

ArchGenes SampleGenes(SpaceConfig config, uint64_t seed) {
  Rng rng(seed);
  ArchGenes g;
  g.space = config;
  for (int i = 0; i < ArchGenes::kNumGenes; ++i) {
    const auto choices = ArchGenes::GeneChoices(i);
    g.SetGene(i, choices[rng.UniformIndex(choices.size())]);
  }
  return g;
}

uint64_t SpaceSampleSeed(uint64_t seed, SpaceConfig config, int index) {
  return DeriveSeed(seed, "space-sample",
                    {static_cast<uint64_t>(config.width_tenths()),
                     static_cast<uint64_t>(config.resolution()),
                     static_cast<uint64_t>(index)});
}

std::vector<SampleMetrics> ProfileSpace(SpaceConfig config, int m, uint64_t seed,
                                        int num_classes) {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
  std::vector<SampleMetrics> out(m);
  for (int i = 0; i < m; ++i) {
    const NetworkArch arch =
        BuildNetwork(SampleGenes(config, SpaceSampleSeed(seed, config, i)), num_classes);
    const MemoryPlan plan = PlanMemory(arch, /*inplace_dw=*/true);
    out[i] = {CountMacs(arch), plan.peak_sram_bytes, plan.flash_bytes};
  }
  return out;
}

SpaceStats StatsForDevice(SpaceConfig config,
                          const std::vector<SampleMetrics>& samples,
                          const DeviceProfile& device,
                          double min_satisfying_fraction) {
  SpaceStats s;
  s.config = config;
  s.sampled = static_cast<int>(samples.size());
  for (const SampleMetrics& m : samples) {
    if (m.peak_sram_bytes <= device.sram_bytes && m.flash_bytes <= device.flash_bytes) {
      s.flops_samples.push_back(m.macs);
      s.flops_sum += m.macs;
    }
  }
  std::sort(s.flops_samples.begin(), s.flops_samples.end());
  s.satisfying = static_cast<int>(s.flops_samples.size());
  if (s.satisfying > 0) {
    s.mean_flops = static_cast<double>(s.flops_sum) / s.satisfying;
    const int rank = (4 * s.satisfying + 4) / 5;  // ceil(0.8 n)
    s.p80_flops = s.flops_samples[rank - 1];
  }
  s.eligible = s.satisfying > 0 &&
               s.satisfying >= min_satisfying_fraction * s.sampled;
  return s;
}

SpaceStats EvaluateSpace(SpaceConfig config, const DeviceProfile& device, int m,
                         uint64_t seed, const SpaceOptions& options) {
  return StatsForDevice(config, ProfileSpace(config, m, seed, options.num_classes),
                        device, options.min_satisfying_fraction);
}

void RankSpaces(std::vector<SpaceStats>& stats) {
  auto key = [](const SpaceStats& s) {
    const int tier = s.eligible ? 0 : (s.empty() ? 2 : 1);
    return std::make_tuple(-tier, s.mean_flops, s.config.resolution(),
                           s.config.width_tenths());
  };
  std::sort(stats.begin(), stats.end(),
            [&](const SpaceStats& a, const SpaceStats& b) { return key(a) > key(b); });
}

SpaceSelection SelectBestSpace(const DeviceProfile& device, int m, uint64_t seed,
                               const SpaceOptions& options) {
  device.Validate();
  const std::vector<SpaceConfig> configs = SpaceConfig::All();
  std::vector<SpaceStats> stats(configs.size());
  ParallelFor(configs.size(), options.jobs, [&](size_t i) {
    stats[i] = EvaluateSpace(configs[i], device, m, seed, options);
  });
  RankSpaces(stats);
  if (!stats.front().eligible) {
    const bool all_empty = std::all_of(stats.begin(), stats.end(),
                                       [](const SpaceStats& s) { return s.empty(); });
    throw Error(ErrorCode::kEmptySpace,
                all_empty ? "no configuration has a network that fits " + device.name
                          : "no configuration reaches the minimum satisfying "
                            "fraction on " + device.name);
  }
  return {stats.front().config, std::move(stats)};
}

}  // namespace tinyco
