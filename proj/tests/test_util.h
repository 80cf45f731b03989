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

#ifndef TINYCO_TESTS_TEST_UTIL_H_
#define TINYCO_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/rng.h"
#include "tinyco/space_optimizer.h"

namespace tinyco::testing {

// Genes over the whole space, or only configs with resolution <= max_res.
inline ArchGenes RandomGenes(uint64_t seed, int max_res = 224) {
  std::vector<SpaceConfig> configs;
  for (SpaceConfig c : SpaceConfig::All()) {
    if (c.resolution() <= max_res) configs.push_back(c);
  }
  Rng rng(DeriveSeed(seed, "test-config"));
  const SpaceConfig config = configs[rng.UniformIndex(configs.size())];
  return SampleGenes(config, DeriveSeed(seed, "test-genes"));
}

inline std::string DataPath(const std::string& name) {
  return std::string(TINYCO_TEST_DATA_DIR) + "/" + name;
}

inline std::string DevicePath(const std::string& name) {
  return std::string(TINYCO_DEVICE_DIR) + "/" + name;
}

}  // namespace tinyco::testing

#endif  // TINYCO_TESTS_TEST_UTIL_H_
