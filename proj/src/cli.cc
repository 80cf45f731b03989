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

#include "tinyco/cli.h"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "tinyco/codegen.h"
#include "tinyco/error.h"
#include "tinyco/evolution.h"
#include "tinyco/executor.h"
#include "tinyco/graph.h"
#include "tinyco/planner.h"
#include "tinyco/rng.h"
#include "tinyco/serialize.h"
#include "tinyco/space_optimizer.h"
#include "tinyco/tensor.h"
#include "tinyco/weights.h"

namespace tinyco {

namespace {

namespace fs = std::filesystem;

struct Globals {
  uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  int classes = kDefaultNumClasses;
  bool quiet = false;
};

struct Ctx {
  std::ostream& out;
  std::ostream& err;
  Globals g;
  std::string stage;  // set while codesign runs a stage

  template <typename... T>
  void Print(fmt::format_string<T...> f, T&&... args) {
    if (!g.quiet) out << fmt::format(f, std::forward<T>(args)...);
  }
};

std::string Digest(std::string_view bytes) {
  return fmt::format("fnv1a64:{:016x}", Fnv1a64(bytes));
}

std::string HexHash(uint64_t h) { return fmt::format("{:016x}", h); }

DeviceProfile LoadDevice(const std::string& spec) {
  if (spec.empty()) throw Error(ErrorCode::kInvalidArgument, "--device is required");
  if (fs::is_regular_file(spec)) return DeviceFromJson(ParseJson(ReadTextFile(spec)));
  if (spec == "unlimited") return UnlimitedDevice();
  return FindBuiltinDevice(spec);
}

NetworkArch LoadModelFile(const std::string& path, int classes) {
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "--model is required");
  return LoadModel(ParseJson(ReadTextFile(path)), classes);
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void WriteJsonFile(const std::string& path, const Json& j) {
  EnsureParent(path);
  WriteTextFile(path, DumpJson(j));
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeOpts {
  std::string model;
  std::string baseline;
  std::string space;
  int kernel = 0;
  int expand = 0;
  int depth = 0;
};

Json DoAnalyze(Ctx& ctx, const AnalyzeOpts& o) {
  NetworkArch arch;
  if (!o.model.empty()) {
    arch = LoadModelFile(o.model, ctx.g.classes);
  } else if (!o.baseline.empty()) {
    arch = BuildMobileNetV2(SpaceConfig::Parse(o.baseline), ctx.g.classes);
  } else if (!o.space.empty()) {
    const SpaceConfig space = SpaceConfig::Parse(o.space);
    const bool uniform = o.kernel || o.expand || o.depth;
    const ArchGenes genes =
        uniform ? ArchGenes::Uniform(space, o.kernel ? o.kernel : 3,
                                     o.expand ? o.expand : 6, o.depth ? o.depth : 2)
                : SampleGenes(space, DeriveSeed(ctx.g.seed, "analyze"));
    arch = BuildNetwork(genes, ctx.g.classes);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "analyze needs --model, --baseline or --space");
  }
  const MemoryPlan plan = PlanMemory(arch, true);
  const MemoryPlan plain = PlanMemory(arch, false);
  int64_t params = 0;
  for (const LayerSpec& l : arch.layers) params += l.WeightCount() + l.BiasCount();

  ctx.Print("{:>4}  {:<16} {:>2} {:>2}  {:>16} {:>16} {:>12}\n", "#", "kind", "k", "s",
            "input", "output", "MACs");
  for (size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& l = arch.layers[i];
    ctx.Print("{:>4}  {:<16} {:>2} {:>2}  {:>16} {:>16} {:>12}\n", i,
              LayerKindName(l.kind), l.kernel_size, l.stride,
              fmt::format("{}x{}x{}", l.input_shape.c, l.input_shape.h, l.input_shape.w),
              fmt::format("{}x{}x{}", l.output_shape.c, l.output_shape.h,
                          l.output_shape.w),
              l.Macs());
  }
  const double imbalance = StageActivationImbalance(arch, plan, 1, 2);
  ctx.Print("{}: {} layers, {} MACs, {} params, flash {} B, peak SRAM {} B "
            "({} B without in-place)\n",
            arch.name, arch.layers.size(), CountMacs(arch), params, plan.flash_bytes,
            plan.peak_sram_bytes, plain.peak_sram_bytes);

  Json j = ArchToJson(arch);
  j["analysis"] = {{"macs", CountMacs(arch)},
                   {"params", params},
                   {"flash_bytes", plan.flash_bytes},
                   {"flash_bytes_int4", ModelSizeBytes(arch, 4)},
                   {"im2col_buffer_bytes", plan.im2col_buffer_bytes},
                   {"peak_sram_bytes", plan.peak_sram_bytes},
                   {"peak_sram_bytes_no_inplace", plain.peak_sram_bytes},
                   {"peak_layer", plan.peak_layer},
                   {"stage12_activation_imbalance", imbalance}};
  return j;
}

// ---- optimize-space ------------------------------------------------------

struct SpaceOpts {
  std::string device;
  int samples = kDefaultSamplesPerSpace;
  double min_fraction = 0.05;
  std::string csv;
  std::string cdf_csv;
};

Json DoOptimizeSpace(Ctx& ctx, const SpaceOpts& o, uint64_t seed, SpaceConfig* winner) {
  const DeviceProfile device = LoadDevice(o.device);
  SpaceOptions opts;
  opts.min_satisfying_fraction = o.min_fraction;
  opts.num_classes = ctx.g.classes;
  opts.jobs = ctx.g.jobs;
  const SpaceSelection sel = SelectBestSpace(device, o.samples, seed, opts);
  if (winner) *winner = sel.best;

  Json ranked = Json::array();
  for (const SpaceStats& s : sel.ranked) ranked.push_back(SpaceStatsToJson(s));
  Json j{{"device", DeviceToJson(device)},
         {"samples_per_space", o.samples},
         {"seed", seed},
         {"num_classes", ctx.g.classes},
         {"min_satisfying_fraction", o.min_fraction},
         {"best", sel.best.Name()},
         {"ranked", std::move(ranked)}};

  if (!o.csv.empty()) {
    std::string csv = "config,width_multiplier,resolution,satisfying,mean_flops,p80_flops\n";
    for (const SpaceStats& s : sel.ranked) {
      csv += fmt::format("{},{},{},{},{},{}\n", s.config.Name(),
                         s.config.width_multiplier(), s.config.resolution(),
                         s.satisfying, s.mean_flops, s.p80_flops);
    }
    EnsureParent(o.csv);
    WriteTextFile(o.csv, csv);
  }
  if (!o.cdf_csv.empty()) {
    std::string csv = "config,flops,cdf\n";
    for (const SpaceStats& s : sel.ranked) {
      const size_t n = s.flops_samples.size();
      for (size_t i = 0; i < n; ++i) {
        csv += fmt::format("{},{},{}\n", s.config.Name(), s.flops_samples[i],
                           static_cast<double>(i + 1) / static_cast<double>(n));
      }
    }
    EnsureParent(o.cdf_csv);
    WriteTextFile(o.cdf_csv, csv);
  }

  ctx.Print("{} ({} B SRAM, {} B Flash), {} samples per space\n", device.name,
            device.sram_bytes, device.flash_bytes, o.samples);
  ctx.Print("{:<12} {:>10} {:>14} {:>14}\n", "space", "satisfying", "mean MACs",
            "p80 MACs");
  for (size_t i = 0; i < std::min<size_t>(10, sel.ranked.size()); ++i) {
    const SpaceStats& s = sel.ranked[i];
    ctx.Print("{:<12} {:>10} {:>14.0f} {:>14}\n", s.config.Name(), s.satisfying,
              s.mean_flops, s.p80_flops);
  }
  ctx.Print("best: {}\n", sel.best.Name());
  return j;
}

// ---- search --------------------------------------------------------------

struct SearchOpts {
  std::string space;
  std::string device;
  std::string evaluator = "surrogate";
  std::string curve;
  bool keep_parents = false;
  int iterations = 30;
  int population = 100;
  int random_samples = 0;  // > 0: random search baseline instead
};

std::unique_ptr<AccuracyEvaluator> MakeEvaluator(const std::string& name) {
  if (name == "surrogate") return std::make_unique<SurrogateEvaluator>();
  throw Error(ErrorCode::kInvalidArgument, "unknown evaluator '" + name + "'");
}

Json DoSearch(Ctx& ctx, const SearchOpts& o, SpaceConfig space, uint64_t seed) {
  const DeviceProfile device = LoadDevice(o.device);
  const auto evaluator = MakeEvaluator(o.evaluator);
  EvolutionConfig cfg;
  cfg.seed = seed;
  cfg.iterations = o.iterations;
  cfg.population = o.population;
  cfg.parents = std::max(1, o.population / 5);
  cfg.crossover_children = o.population / 2;
  cfg.mutation_children = o.population - cfg.crossover_children;
  cfg.keep_parents = o.keep_parents;
  cfg.num_classes = ctx.g.classes;
  cfg.jobs = ctx.g.jobs;

  if (o.random_samples > 0) {
    const Candidate best = RandomSearch(space, device, *evaluator, o.random_samples,
                                        seed, ctx.g.jobs, ctx.g.classes);
    ctx.Print("random search over {} feasible draws in {}: score {:.6f}, {} MACs\n",
              o.random_samples, space.Name(), best.score, best.macs);
    return Json{{"space", space.Name()},
                {"device", DeviceToJson(device)},
                {"evaluator", evaluator->name()},
                {"seed", seed},
                {"random_samples", o.random_samples},
                {"best", CandidateToJson(best)}};
  }

  const EvolutionResult r = Evolve(space, device, *evaluator, cfg);
  if (!o.curve.empty()) {
    std::string csv = "iteration,best,mean,min,best_ever\n";
    for (const IterationStats& h : r.history) {
      csv += fmt::format("{},{},{},{},{}\n", h.iteration, h.best, h.mean, h.min,
                         h.best_ever);
    }
    EnsureParent(o.curve);
    WriteTextFile(o.curve, csv);
  }
  ctx.Print("{:>5} {:>10} {:>10} {:>10}\n", "iter", "best", "mean", "min");
  for (const IterationStats& h : r.history) {
    if (h.iteration % 5 == 0 || h.iteration == cfg.iterations) {
      ctx.Print("{:>5} {:>10.6f} {:>10.6f} {:>10.6f}\n", h.iteration, h.best, h.mean,
                h.min);
    }
  }
  ctx.Print("best in {}: score {:.6f}, {} MACs, peak SRAM {} B, flash {} B\n",
            space.Name(), r.best.score, r.best.macs, r.best.peak_sram, r.best.flash);
  return EvolutionToJson(r, cfg, space, device, evaluator->name());
}

// ---- plan ----------------------------------------------------------------

struct PlanOpts {
  std::string model;
  bool no_inplace = false;
  std::string blocks_csv;
};

Json DoPlan(Ctx& ctx, const PlanOpts& o) {
  const NetworkArch arch = LoadModelFile(o.model, ctx.g.classes);
  const MemoryPlan plan = PlanMemory(arch, !o.no_inplace);
  ctx.Print("{:>5}  {:<16} {:>5} {:>7} {:>12}\n", "layer", "kind", "tile", "inplace",
            "peak_bytes");
  for (const LayerPlan& lp : plan.layers) {
    ctx.Print("{:>5}  {:<16} {:>5} {:>7} {:>12}\n", lp.layer_index,
              LayerKindName(lp.kind), lp.tile_width, lp.inplace ? "yes" : "no",
              lp.layer_peak_bytes);
  }
  ctx.Print("peak SRAM {} B at layer {}, im2col buffer {} B, flash {} B\n",
            plan.peak_sram_bytes, plan.peak_layer, plan.im2col_buffer_bytes,
            plan.flash_bytes);
  if (!o.blocks_csv.empty()) {
    const std::vector<int64_t> act = BlockActivationBytes(arch, plan);
    std::string csv = "block_index,activation_bytes\n";
    for (size_t b = 0; b < act.size(); ++b) csv += fmt::format("{},{}\n", b, act[b]);
    EnsureParent(o.blocks_csv);
    WriteTextFile(o.blocks_csv, csv);
  }
  return PlanToJson(plan);
}

// ---- run -----------------------------------------------------------------

struct RunOpts {
  std::string model;
  std::string input;
  std::string output;
  std::optional<uint64_t> weight_seed;
  bool no_inplace = false;
};

Json DoRun(Ctx& ctx, const RunOpts& o) {
  const NetworkArch arch = LoadModelFile(o.model, ctx.g.classes);
  const uint64_t wseed = o.weight_seed.value_or(ctx.g.seed);
  const WeightSet weights = GenWeights(arch, wseed);
  TensorBuf input;
  if (o.input.empty()) {
    input = RandomTensor(arch.input_shape, weights.tensor_quant[0],
                         DeriveSeed(ctx.g.seed, "input"));
  } else {
    input = DecodeTensorFile(ReadBinaryFile(o.input));
    input.quant = weights.tensor_quant[0];
  }
  const MemoryPlan plan = PlanMemory(arch, !o.no_inplace);
  const ScheduledResult r = RunScheduled(arch, weights, input, plan);
  const bool match = RunReference(arch, weights, input).data == r.output.data;
  if (!o.output.empty()) {
    EnsureParent(o.output);
    WriteBinaryFile(o.output, EncodeTensorFile(r.output));
  }
  ctx.Print("{}: output hash {}, measured peak {} B, planned peak {} B, reference {}\n",
            arch.name, HexHash(TensorHash(r.output)), r.measured_peak_bytes,
            plan.peak_sram_bytes, match ? "match" : "MISMATCH");
  return Json{{"model", arch.name},
              {"weight_seed", wseed},
              {"input_hash", HexHash(TensorHash(input))},
              {"output_hash", HexHash(TensorHash(r.output))},
              {"measured_peak_bytes", r.measured_peak_bytes},
              {"planned_peak_bytes", plan.peak_sram_bytes},
              {"reference_match", match}};
}

// ---- codegen -------------------------------------------------------------

struct CodegenOpts {
  std::string model;
  std::string plan;
  std::optional<uint64_t> weight_seed;
};

Json DoCodegen(Ctx& ctx, const CodegenOpts& o, const std::string& dir, uint64_t wseed) {
  if (dir.empty()) throw Error(ErrorCode::kInvalidArgument, "codegen needs --out DIR");
  const NetworkArch arch = LoadModelFile(o.model, ctx.g.classes);
  const MemoryPlan plan = o.plan.empty() ? PlanMemory(arch, true)
                                         : PlanFromJson(ParseJson(ReadTextFile(o.plan)));
  const WeightSet weights = GenWeights(arch, wseed);
  const CodegenOutput cg = Generate(arch, plan, weights);
  fs::create_directories(dir);
  const std::string map = MemoryMapJson(cg);
  WriteTextFile((fs::path(dir) / "model.c").string(), cg.source_text);
  WriteTextFile((fs::path(dir) / "model.h").string(), cg.header_text);
  WriteTextFile((fs::path(dir) / "weights.c").string(), cg.weights_text);
  WriteTextFile((fs::path(dir) / "memory_map.json").string(), map);
  Json ops = Json::array();
  for (LayerKind k : cg.ops_emitted) ops.push_back(LayerKindName(k));
  ctx.Print("wrote {}: arena {} B, {} buffers, est. code {} B (full op set {} B)\n", dir,
            cg.arena_bytes, cg.memory_map.size(), cg.estimated_code_bytes,
            EstimateFullOpSetCodeBytes(cg));
  return Json{{"model", arch.name},
              {"weight_seed", wseed},
              {"arena_bytes", cg.arena_bytes},
              {"ops_emitted", std::move(ops)},
              {"estimated_code_bytes", cg.estimated_code_bytes},
              {"model_c", Digest(cg.source_text)},
              {"model_h", Digest(cg.header_text)},
              {"weights_c", Digest(cg.weights_text)},
              {"memory_map_json", Digest(map)}};
}

// ---- codesign ------------------------------------------------------------

struct CodesignOpts {
  std::string device;
  int samples = kDefaultSamplesPerSpace;
  std::string evaluator = "surrogate";
  int iterations = 30;
};

Json DoCodesign(Ctx& ctx, const CodesignOpts& o) {
  const std::string dir = ctx.g.out;
  if (dir.empty()) throw Error(ErrorCode::kInvalidArgument, "codesign needs --out DIR");
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  const DeviceProfile device = LoadDevice(o.device);
  const uint64_t space_seed = DeriveSeed(ctx.g.seed, "optimize-space");
  const uint64_t search_seed = DeriveSeed(ctx.g.seed, "search");
  const uint64_t weight_seed = DeriveSeed(ctx.g.seed, "weights");
  const fs::path root(dir);
  const std::string space_json = (root / "space.json").string();
  const std::string search_json = (root / "search.json").string();
  const std::string plan_json = (root / "plan.json").string();
  const std::string code_dir = (root / "code").string();
  // The composed stages read the resolved profile, not the original flag.
  const std::string device_json = (root / "device.json").string();
  WriteJsonFile(device_json, DeviceToJson(device));

  Json stages = Json::array();
  std::string outputs;

  ctx.stage = "optimize-space";
  SpaceOpts so;
  so.device = device_json;
  so.samples = o.samples;
  so.csv = (root / "space.csv").string();
  SpaceConfig space;
  const Json sj = DoOptimizeSpace(ctx, so, space_seed, &space);
  WriteJsonFile(space_json, sj);
  outputs += DumpJson(sj);
  stages.push_back({{"stage", ctx.stage},
                    {"seed", space_seed},
                    {"output", space_json},
                    {"digest", Digest(DumpJson(sj))},
                    {"best_space", space.Name()}});

  ctx.stage = "search";
  SearchOpts se;
  se.device = device_json;
  se.evaluator = o.evaluator;
  se.iterations = o.iterations;
  se.curve = (root / "curve.csv").string();
  const Json ej = DoSearch(ctx, se, space, search_seed);
  WriteJsonFile(search_json, ej);
  outputs += DumpJson(ej);
  stages.push_back({{"stage", ctx.stage},
                    {"seed", search_seed},
                    {"output", search_json},
                    {"digest", Digest(DumpJson(ej))},
                    {"best_score", ej["best"]["score"]},
                    {"best_macs", ej["best"]["macs"]}});

  ctx.stage = "plan";
  PlanOpts po;
  po.model = search_json;
  const Json pj = DoPlan(ctx, po);
  WriteJsonFile(plan_json, pj);
  outputs += DumpJson(pj);
  stages.push_back({{"stage", ctx.stage},
                    {"output", plan_json},
                    {"digest", Digest(DumpJson(pj))},
                    {"peak_sram_bytes", pj["peak_sram_bytes"]},
                    {"flash_bytes", pj["flash_bytes"]}});

  ctx.stage = "codegen";
  CodegenOpts co;
  co.model = search_json;
  co.plan = plan_json;
  const Json cj = DoCodegen(ctx, co, code_dir, weight_seed);
  outputs += DumpJson(cj);
  stages.push_back({{"stage", ctx.stage},
                    {"seed", weight_seed},
                    {"output", code_dir},
                    {"digest", Digest(DumpJson(cj))},
                    {"arena_bytes", cj["arena_bytes"]}});
  ctx.stage.clear();

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Json report{{"command", "codesign"},
              {"inputs_digest",
               Digest(DumpJson(DeviceToJson(device)) +
                      fmt::format("samples={};evaluator={};iterations={};classes={}",
                                  o.samples, o.evaluator, o.iterations,
                                  ctx.g.classes))},
              {"seed", ctx.g.seed},
              {"outputs_digest", Digest(outputs)},
              {"wall_time_s", wall},
              {"stages", std::move(stages)}};
  const std::string report_path = (root / "run_report.jsonl").string();
  {
    std::ofstream f(report_path, std::ios::app | std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot append to " + report_path);
    f << report.dump() << "\n";
  }
  ctx.Print("codesign for {} finished in {:.1f} s; report appended to {}\n",
            device.name, wall, report_path);
  return report;
}

void ReportError(Ctx& ctx, const Error& e) {
  Json j{{"error", ErrorCodeName(e.code())}, {"message", e.what()}};
  if (!ctx.stage.empty()) j["stage"] = ctx.stage;
  ctx.err << j.dump() << "\n";
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  Ctx ctx{out, err, {}, {}};
  CLI::App app{"tinyco: joint network search and inference scheduling for MCUs",
               "tinyco"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--seed", ctx.g.seed, "Root random seed")->capture_default_str();
  app.add_option("--jobs", ctx.g.jobs, "Worker threads (output does not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", ctx.g.out, "Output file (directory for codegen/codesign)");
  app.add_option("--classes", ctx.g.classes, "Classifier width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--quiet", ctx.g.quiet, "No tables on standard output");

  AnalyzeOpts ao;
  CLI::App* analyze = app.add_subcommand("analyze", "Layer table, MACs, Flash and SRAM");
  analyze->add_option("--model", ao.model, "Architecture, genes or candidate JSON");
  analyze->add_option("--baseline", ao.baseline, "Scaled MobileNetV2, e.g. w0.3-r144");
  analyze->add_option("--space", ao.space, "Searchable space, e.g. w0.5-r96");
  analyze->add_option("--kernel", ao.kernel, "Uniform kernel size with --space");
  analyze->add_option("--expand", ao.expand, "Uniform expansion with --space");
  analyze->add_option("--depth", ao.depth, "Uniform stage depth with --space");

  SpaceOpts so;
  CLI::App* optimize = app.add_subcommand("optimize-space", "Rank the 108 search spaces");
  optimize->add_option("--device", so.device, "Profile JSON or built-in name")->required();
  optimize->add_option("--samples", so.samples, "Networks sampled per space")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  optimize->add_option("--min-fraction", so.min_fraction,
                       "Satisfying fraction a space needs to win")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  optimize->add_option("--csv", so.csv, "Per-space summary CSV");
  optimize->add_option("--cdf-csv", so.cdf_csv, "Per-space MACs CDF CSV");

  SearchOpts se;
  std::string search_space;
  CLI::App* search = app.add_subcommand("search", "Evolution search inside one space");
  search->add_option("--space", search_space, "e.g. w0.5-r144")->required();
  search->add_option("--device", se.device, "Profile JSON or built-in name")->required();
  search->add_option("--evaluator", se.evaluator, "Accuracy evaluator")
      ->capture_default_str();
  search->add_option("--curve", se.curve, "Per-iteration CSV");
  search->add_option("--iterations", se.iterations)->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  search->add_option("--population", se.population)->check(CLI::Range(2, 100000))
      ->capture_default_str();
  search->add_flag("--keep-parents", se.keep_parents,
                   "Next generation = best of parents and children");
  search->add_option("--random", se.random_samples,
                     "Random search over N feasible draws instead");

  PlanOpts po;
  CLI::App* plan = app.add_subcommand("plan", "Memory plan of a model");
  plan->add_option("--model", po.model)->required();
  plan->add_flag("--no-inplace", po.no_inplace, "Disable in-place depthwise");
  plan->add_option("--blocks-csv", po.blocks_csv, "Per-block activation bytes CSV");

  RunOpts ro;
  uint64_t run_wseed = 0;
  CLI::App* run = app.add_subcommand("run", "Scheduled int8 inference");
  run->add_option("--model", ro.model)->required();
  run->add_option("--input", ro.input, "Tensor file; random if omitted");
  run->add_option("--output", ro.output, "Output tensor file");
  CLI::Option* run_ws = run->add_option("--weight-seed", run_wseed);
  run->add_flag("--no-inplace", ro.no_inplace);

  CodegenOpts co;
  uint64_t cg_wseed = 0;
  CLI::App* codegen = app.add_subcommand("codegen", "Emit C99 sources");
  codegen->add_option("--model", co.model)->required();
  codegen->add_option("--plan", co.plan, "Plan JSON; planned with in-place if omitted");
  CLI::Option* cg_ws = codegen->add_option("--weight-seed", cg_wseed);

  CodesignOpts cdo;
  CLI::App* codesign = app.add_subcommand("codesign", "Space, search, plan and codegen");
  codesign->add_option("--device", cdo.device, "Profile JSON or built-in name")
      ->required();
  codesign->add_option("--samples", cdo.samples)->check(CLI::PositiveNumber)
      ->capture_default_str();
  codesign->add_option("--evaluator", cdo.evaluator)->capture_default_str();
  codesign->add_option("--iterations", cdo.iterations)->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Json result;
    bool to_file = true;
    if (analyze->parsed()) {
      result = DoAnalyze(ctx, ao);
    } else if (optimize->parsed()) {
      result = DoOptimizeSpace(ctx, so, ctx.g.seed, nullptr);
    } else if (search->parsed()) {
      result = DoSearch(ctx, se, SpaceConfig::Parse(search_space), ctx.g.seed);
    } else if (plan->parsed()) {
      result = DoPlan(ctx, po);
    } else if (run->parsed()) {
      if (run_ws->count()) ro.weight_seed = run_wseed;
      result = DoRun(ctx, ro);
    } else if (codegen->parsed()) {
      const uint64_t ws = cg_ws->count() ? cg_wseed : ctx.g.seed;
      result = DoCodegen(ctx, co, ctx.g.out, ws);
      to_file = false;
    } else if (codesign->parsed()) {
      result = DoCodesign(ctx, cdo);
      to_file = false;
    }
    if (to_file) {
      if (!ctx.g.out.empty()) {
        WriteJsonFile(ctx.g.out, result);
      } else if (ctx.g.quiet) {
        out << DumpJson(result);
      }
    }
  } catch (const Error& e) {
    ReportError(ctx, e);
    return 1;
  } catch (const std::exception& e) {
    ReportError(ctx, Error(ErrorCode::kIo, e.what()));
    return 1;
  }
  return 0;
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace tinyco
