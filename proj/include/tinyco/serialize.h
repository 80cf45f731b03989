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

// JSON interchange for every artifact the CLI reads or writes. Field order
// is fixed and all counts are integers so that identical inputs give
// byte-identical files.

#ifndef TINYCO_SERIALIZE_H_
#define TINYCO_SERIALIZE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tinyco/evolution.h"
#include "tinyco/graph.h"
#include "tinyco/planner.h"
#include "tinyco/space_optimizer.h"

namespace tinyco {

using Json = nlohmann::ordered_json;

// Parse errors of any kind become Error(kParse).
Json ParseJson(const std::string& text);
std::string DumpJson(const Json& j);  // 2-space indent, trailing newline

std::string ReadTextFile(const std::string& path);
std::vector<uint8_t> ReadBinaryFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);
void WriteBinaryFile(const std::string& path, const std::vector<uint8_t>& bytes);

Json SpaceConfigToJson(SpaceConfig config);
SpaceConfig SpaceConfigFromJson(const Json& j);

Json GenesToJson(const ArchGenes& genes);
ArchGenes GenesFromJson(const Json& j);

Json ArchToJson(const NetworkArch& arch);
NetworkArch ArchFromJson(const Json& j);

Json PlanToJson(const MemoryPlan& plan);
MemoryPlan PlanFromJson(const Json& j);

Json DeviceToJson(const DeviceProfile& device);
DeviceProfile DeviceFromJson(const Json& j);

Json SpaceStatsToJson(const SpaceStats& stats);

Json CandidateToJson(const Candidate& c);
Candidate CandidateFromJson(const Json& j);

Json EvolutionToJson(const EvolutionResult& r, const EvolutionConfig& cfg,
                     SpaceConfig space, const DeviceProfile& device,
                     const std::string& evaluator);

// Accepts an architecture, a genes object or a candidate (anything with a
// "genes" member) and returns the network it describes.
NetworkArch LoadModel(const Json& j, int num_classes = kDefaultNumClasses);

}  // namespace tinyco

#endif  // TINYCO_SERIALIZE_H_
