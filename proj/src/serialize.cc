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

#include "tinyco/serialize.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "tinyco/error.h"

namespace tinyco {

namespace {

constexpr const char* kArchFormat = "tinyco.arch.v1";
constexpr const char* kPlanFormat = "tinyco.plan.v1";

// Runs `fn`, turning JSON type/key errors into Error(kParse).
template <typename Fn>
auto Guard(const char* what, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad ") + what + ": " + e.what());
  }
}

Json ShapeToJson(const Shape& s) { return Json::array({s.c, s.h, s.w}); }

Shape ShapeFromJson(const Json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kParse, "shape must be [c, h, w]");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

}  // namespace

Json ParseJson(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

std::string DumpJson(const Json& j) { return j.dump(2) + "\n"; }

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<uint8_t> ReadBinaryFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw Error(ErrorCode::kIo, "cannot write " + path);
  }
}

void WriteBinaryFile(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(reinterpret_cast<const char*>(bytes.data()),
                         static_cast<std::streamsize>(bytes.size()))) {
    throw Error(ErrorCode::kIo, "cannot write " + path);
  }
}

Json SpaceConfigToJson(SpaceConfig config) {
  return Json{{"width_multiplier", config.width_multiplier()},
              {"resolution", config.resolution()}};
}

SpaceConfig SpaceConfigFromJson(const Json& j) {
  return Guard("space", [&] {
    if (j.is_string()) return SpaceConfig::Parse(j.get<std::string>());
    const double w = j.at("width_multiplier").get<double>();
    const int tenths = static_cast<int>(std::lround(w * 10));
    if (std::abs(w * 10 - tenths) > 1e-9) {
      throw Error(ErrorCode::kInvalidGene, "width multiplier must be a multiple of 0.1");
    }
    return SpaceConfig::Make(tenths, j.at("resolution").get<int>());
  });
}

Json GenesToJson(const ArchGenes& genes) {
  Json stages = Json::array();
  for (const StageGenes& s : genes.stages) {
    stages.push_back({{"depth", s.depth}, {"kernel", s.kernel}, {"expand", s.expand}});
  }
  return Json{{"space", SpaceConfigToJson(genes.space)}, {"stages", std::move(stages)}};
}

ArchGenes GenesFromJson(const Json& j) {
  return Guard("genes", [&] {
    ArchGenes g;
    g.space = SpaceConfigFromJson(j.at("space"));
    const Json& stages = j.at("stages");
    if (!stages.is_array() || stages.size() != kNumStages) {
      throw Error(ErrorCode::kInvalidGene, "genes need exactly 5 stages");
    }
    for (int s = 0; s < kNumStages; ++s) {
      const Json& st = stages[s];
      g.stages[s].depth = st.at("depth").get<int>();
      const Json& k = st.at("kernel");
      const Json& e = st.at("expand");
      if (k.size() != kMaxDepth || e.size() != kMaxDepth) {
        throw Error(ErrorCode::kInvalidGene, "kernel and expand need 4 entries");
      }
      for (int b = 0; b < kMaxDepth; ++b) {
        g.stages[s].kernel[b] = k[b].get<int>();
        g.stages[s].expand[b] = e[b].get<int>();
      }
    }
    g.Validate();
    return g;
  });
}

Json ArchToJson(const NetworkArch& arch) {
  Json layers = Json::array();
  for (const LayerSpec& l : arch.layers) {
    layers.push_back({{"kind", LayerKindName(l.kind)},
                      {"kernel_size", l.kernel_size},
                      {"stride", l.stride},
                      {"padding", l.padding},
                      {"in_channels", l.in_channels},
                      {"out_channels", l.out_channels},
                      {"input_shape", ShapeToJson(l.input_shape)},
                      {"output_shape", ShapeToJson(l.output_shape)},
                      {"has_relu6", l.has_relu6},
                      {"skip_tensor", l.skip_tensor}});
  }
  Json blocks = Json::array();
  for (const Block& b : arch.blocks) {
    blocks.push_back({{"kind", b.kind},
                      {"stage", b.stage},
                      {"first_layer", b.first_layer},
                      {"num_layers", b.num_layers}});
  }
  return Json{{"format", kArchFormat},
              {"name", arch.name},
              {"num_classes", arch.num_classes},
              {"input_shape", ShapeToJson(arch.input_shape)},
              {"layers", std::move(layers)},
              {"blocks", std::move(blocks)}};
}

NetworkArch ArchFromJson(const Json& j) {
  return Guard("architecture", [&] {
    NetworkArch a;
    a.name = j.at("name").get<std::string>();
    a.num_classes = j.at("num_classes").get<int>();
    a.input_shape = ShapeFromJson(j.at("input_shape"));
    for (const Json& lj : j.at("layers")) {
      LayerSpec l;
      l.kind = LayerKindFromName(lj.at("kind").get<std::string>());
      l.kernel_size = lj.at("kernel_size").get<int>();
      l.stride = lj.at("stride").get<int>();
      l.padding = lj.at("padding").get<int>();
      l.in_channels = lj.at("in_channels").get<int>();
      l.out_channels = lj.at("out_channels").get<int>();
      l.input_shape = ShapeFromJson(lj.at("input_shape"));
      l.output_shape = ShapeFromJson(lj.at("output_shape"));
      l.has_relu6 = lj.at("has_relu6").get<bool>();
      l.skip_tensor = lj.value("skip_tensor", -1);
      a.layers.push_back(l);
    }
    if (j.contains("blocks")) {
      for (const Json& bj : j.at("blocks")) {
        a.blocks.push_back({bj.at("kind").get<std::string>(), bj.at("stage").get<int>(),
                            bj.at("first_layer").get<int>(),
                            bj.at("num_layers").get<int>()});
      }
    }
    a.Validate();
    return a;
  });
}

Json PlanToJson(const MemoryPlan& plan) {
  Json layers = Json::array();
  for (const LayerPlan& lp : plan.layers) {
    layers.push_back({{"layer", lp.layer_index},
                      {"kind", LayerKindName(lp.kind)},
                      {"tile_width", lp.tile_width},
                      {"inplace", lp.inplace},
                      {"input_bytes", lp.input_bytes},
                      {"output_bytes", lp.output_bytes},
                      {"scratch_bytes", lp.scratch_bytes},
                      {"im2col_bytes", lp.im2col_bytes},
                      {"accumulator_bytes", lp.accumulator_bytes},
                      {"extra_buffer_bytes", lp.extra_buffer_bytes},
                      {"activation_bytes", lp.activation_bytes},
                      {"resident_skip_bytes", lp.resident_skip_bytes},
                      {"layer_peak_bytes", lp.layer_peak_bytes}});
  }
  return Json{{"format", kPlanFormat},
              {"inplace_dw", plan.inplace_dw},
              {"im2col_buffer_bytes", plan.im2col_buffer_bytes},
              {"peak_sram_bytes", plan.peak_sram_bytes},
              {"peak_layer", plan.peak_layer},
              {"flash_bytes", plan.flash_bytes},
              {"layers", std::move(layers)}};
}

MemoryPlan PlanFromJson(const Json& j) {
  return Guard("plan", [&] {
    MemoryPlan p;
    p.inplace_dw = j.at("inplace_dw").get<bool>();
    p.im2col_buffer_bytes = j.at("im2col_buffer_bytes").get<int64_t>();
    p.peak_sram_bytes = j.at("peak_sram_bytes").get<int64_t>();
    p.peak_layer = j.at("peak_layer").get<int>();
    p.flash_bytes = j.at("flash_bytes").get<int64_t>();
    for (const Json& lj : j.at("layers")) {
      LayerPlan lp;
      lp.layer_index = lj.at("layer").get<int>();
      lp.kind = LayerKindFromName(lj.at("kind").get<std::string>());
      lp.tile_width = lj.at("tile_width").get<int>();
      lp.inplace = lj.at("inplace").get<bool>();
      lp.input_bytes = lj.at("input_bytes").get<int64_t>();
      lp.output_bytes = lj.at("output_bytes").get<int64_t>();
      lp.scratch_bytes = lj.at("scratch_bytes").get<int64_t>();
      lp.im2col_bytes = lj.at("im2col_bytes").get<int64_t>();
      lp.accumulator_bytes = lj.at("accumulator_bytes").get<int64_t>();
      lp.extra_buffer_bytes = lj.at("extra_buffer_bytes").get<int64_t>();
      lp.activation_bytes = lj.at("activation_bytes").get<int64_t>();
      lp.resident_skip_bytes = lj.at("resident_skip_bytes").get<int64_t>();
      lp.layer_peak_bytes = lj.at("layer_peak_bytes").get<int64_t>();
      p.layers.push_back(lp);
    }
    return p;
  });
}

Json DeviceToJson(const DeviceProfile& device) {
  return Json{{"name", device.name},
              {"sram_bytes", device.sram_bytes},
              {"flash_bytes", device.flash_bytes}};
}

DeviceProfile DeviceFromJson(const Json& j) {
  return Guard("device profile", [&] {
    DeviceProfile d;
    d.name = j.at("name").get<std::string>();
    d.sram_bytes = j.at("sram_bytes").get<int64_t>();
    d.flash_bytes = j.at("flash_bytes").get<int64_t>();
    d.Validate();
    return d;
  });
}

Json SpaceStatsToJson(const SpaceStats& s) {
  return Json{{"config", s.config.Name()},
              {"width_multiplier", s.config.width_multiplier()},
              {"resolution", s.config.resolution()},
              {"sampled", s.sampled},
              {"satisfying", s.satisfying},
              {"flops_sum", s.flops_sum},
              {"mean_flops", s.mean_flops},
              {"p80_flops", s.p80_flops},
              {"eligible", s.eligible}};
}

Json CandidateToJson(const Candidate& c) {
  return Json{{"score", c.score},
              {"macs", c.macs},
              {"peak_sram_bytes", c.peak_sram},
              {"flash_bytes", c.flash},
              {"feasible", c.feasible},
              {"genes", GenesToJson(c.genes)}};
}

Candidate CandidateFromJson(const Json& j) {
  return Guard("candidate", [&] {
    Candidate c;
    c.score = j.at("score").get<double>();
    c.macs = j.at("macs").get<int64_t>();
    c.peak_sram = j.at("peak_sram_bytes").get<int64_t>();
    c.flash = j.at("flash_bytes").get<int64_t>();
    c.feasible = j.at("feasible").get<bool>();
    c.genes = GenesFromJson(j.at("genes"));
    return c;
  });
}

Json EvolutionToJson(const EvolutionResult& r, const EvolutionConfig& cfg,
                     SpaceConfig space, const DeviceProfile& device,
                     const std::string& evaluator) {
  Json history = Json::array();
  for (const IterationStats& h : r.history) {
    history.push_back({{"iteration", h.iteration},
                       {"best", h.best},
                       {"mean", h.mean},
                       {"min", h.min},
                       {"best_ever", h.best_ever}});
  }
  return Json{{"space", space.Name()},
              {"device", DeviceToJson(device)},
              {"evaluator", evaluator},
              {"seed", cfg.seed},
              {"population", cfg.population},
              {"parents", cfg.parents},
              {"crossover_children", cfg.crossover_children},
              {"mutation_children", cfg.mutation_children},
              {"mutation_prob", cfg.mutation_prob},
              {"iterations", cfg.iterations},
              {"keep_parents", cfg.keep_parents},
              {"evaluations", r.evaluations},
              {"best", CandidateToJson(r.best)},
              {"history", std::move(history)}};
}

NetworkArch LoadModel(const Json& j, int num_classes) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "model must be a JSON object");
  if (j.contains("layers")) return ArchFromJson(j);
  if (j.contains("stages")) return BuildNetwork(GenesFromJson(j), num_classes);
  if (j.contains("genes")) return BuildNetwork(GenesFromJson(j.at("genes")), num_classes);
  if (j.contains("best")) return LoadModel(j.at("best"), num_classes);
  throw Error(ErrorCode::kParse,
              "model JSON needs \"layers\", \"stages\", \"genes\" or \"best\"");
}

}  // namespace tinyco
