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

#include "tinyco/evolution.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "tinyco/error.h"
#include "tinyco/parallel.h"
#include "tinyco/rng.h"
#include "tinyco/space_optimizer.h"

namespace tinyco {

namespace {

constexpr double kSurrogateSlope = 0.5;
constexpr double kSurrogateCenterMacs = 1e8;

std::array<int, ArchGenes::kNumGenes + 2> GeneKey(const ArchGenes& g) {
  std::array<int, ArchGenes::kNumGenes + 2> key{};
  key[0] = g.space.width_tenths();
  key[1] = g.space.resolution();
  for (int i = 0; i < ArchGenes::kNumGenes; ++i) key[i + 2] = g.Gene(i);
  return key;
}

IterationStats Summarize(int iteration, const std::vector<Candidate>& pop,
                         double best_ever) {
  IterationStats s;
  s.iteration = iteration;
  s.best = pop.front().score;
  s.min = pop.front().score;
  double sum = 0;
  for (const Candidate& c : pop) {
    s.best = std::max(s.best, c.score);
    s.min = std::min(s.min, c.score);
    sum += c.score;
  }
  s.mean = sum / static_cast<double>(pop.size());
  s.best_ever = best_ever;
  return s;
}

// Fresh feasible uniform draw for a population slot. Returns false when
// every attempt was infeasible.
bool SampleFeasible(SpaceConfig space, const DeviceProfile& device,
                    const AccuracyEvaluator& evaluator, const EvolutionConfig& cfg,
                    std::string_view label, uint64_t a, uint64_t b,
                    Candidate& out, int64_t& evaluations) {
  for (int attempt = 0; attempt < cfg.max_sample_attempts; ++attempt) {
    const uint64_t seed =
        DeriveSeed(cfg.seed, label, {a, b, static_cast<uint64_t>(attempt)});
    Candidate c = EvaluateCandidate(SampleGenes(space, seed), device, evaluator,
                                    cfg.num_classes);
    ++evaluations;
    if (c.feasible) {
      out = std::move(c);
      return true;
    }
  }
  return false;
}

}  // namespace

double SurrogateBase(int64_t macs) {
  if (macs <= 0) return 0.01;
  const double z = std::pow(static_cast<double>(macs) / kSurrogateCenterMacs,
                            kSurrogateSlope);
  return 0.01 + 0.98 * z / (1.0 + z);
}

double SurrogateNoise(uint64_t identity) {
  const double u = static_cast<double>(SplitMix64(identity) >> 11) * 0x1.0p-53;
  return kSurrogateNoise * (2.0 * u - 1.0);
}

uint64_t GenesHash(const ArchGenes& genes) {
  const auto key = GeneKey(genes);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (int v : key) {
    const auto b = static_cast<uint8_t>(v);
    h = Fnv1a64(&b, 1, h);
  }
  return h;
}

double SurrogateEvaluator::Score(const ArchGenes& genes,
                                 const NetworkArch& arch) const {
  return SurrogateBase(CountMacs(arch)) + SurrogateNoise(GenesHash(genes));
}

double SurrogateScore(const ArchGenes& genes, int num_classes) {
  return SurrogateEvaluator().Score(genes, BuildNetwork(genes, num_classes));
}

double SurrogateFixedArchScore(const NetworkArch& arch) {
  return SurrogateBase(CountMacs(arch)) + SurrogateNoise(Fnv1a64(arch.name));
}

void EvolutionConfig::Validate() const {
  const bool ok = population > 0 && parents > 0 && parents <= population &&
                  crossover_children >= 0 && mutation_children >= 0 &&
                  crossover_children + mutation_children == population &&
                  mutation_prob >= 0.0 && mutation_prob <= 1.0 &&
                  iterations >= 0 && max_child_retries >= 1 &&
                  max_sample_attempts >= 1;
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "evolution config needs crossover + mutation children == "
                "population, 0 < parents <= population, 0 <= p <= 1");
  }
}

Candidate EvaluateCandidate(const ArchGenes& genes, const DeviceProfile& device,
                            const AccuracyEvaluator& evaluator, int num_classes) {
  const NetworkArch arch = BuildNetwork(genes, num_classes);
  const MemoryPlan plan = PlanMemory(arch, /*inplace_dw=*/true);
  Candidate c;
  c.genes = genes;
  c.macs = CountMacs(arch);
  c.peak_sram = plan.peak_sram_bytes;
  c.flash = plan.flash_bytes;
  c.feasible = CheckFit(plan, device).fits;
  c.score = evaluator.Score(genes, arch);
  return c;
}

bool BetterCandidate(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return GeneKey(a.genes) > GeneKey(b.genes);
}

std::vector<Candidate> InitialPopulation(SpaceConfig space,
                                         const DeviceProfile& device,
                                         const AccuracyEvaluator& evaluator,
                                         const EvolutionConfig& cfg) {
  cfg.Validate();
  std::vector<Candidate> pop(cfg.population);
  std::vector<int64_t> evals(cfg.population, 0);
  ParallelFor(pop.size(), cfg.jobs, [&](size_t slot) {
    if (!SampleFeasible(space, device, evaluator, cfg, "init", 0, slot, pop[slot],
                        evals[slot])) {
      throw Error(ErrorCode::kInitFailure,
                  "no feasible network in " + space.Name() + " for " + device.name +
                      " after " + std::to_string(cfg.max_sample_attempts) +
                      " draws");
    }
  });
  return pop;
}

EvolutionResult Evolve(SpaceConfig space, const DeviceProfile& device,
                       const AccuracyEvaluator& evaluator,
                       const EvolutionConfig& cfg) {
  std::vector<Candidate> pop = InitialPopulation(space, device, evaluator, cfg);
  return EvolveFrom(space, device, evaluator, cfg, std::move(pop));
}

EvolutionResult EvolveFrom(SpaceConfig space, const DeviceProfile& device,
                           const AccuracyEvaluator& evaluator,
                           const EvolutionConfig& cfg,
                           std::vector<Candidate> population) {
  cfg.Validate();
  if (static_cast<int>(population.size()) != cfg.population) {
    throw Error(ErrorCode::kInvalidArgument, "population size mismatch");
  }
  EvolutionResult result;
  result.evaluations = static_cast<int64_t>(population.size());
  std::sort(population.begin(), population.end(), BetterCandidate);
  result.best = population.front();
  result.history.push_back(Summarize(0, population, result.best.score));

  const int n_children = cfg.crossover_children + cfg.mutation_children;
  for (int it = 1; it <= cfg.iterations; ++it) {
    const std::vector<Candidate> parents(population.begin(),
                                         population.begin() + cfg.parents);
    std::vector<Candidate> children(n_children);
    std::vector<int64_t> evals(n_children, 0);
    ParallelFor(children.size(), cfg.jobs, [&](size_t c) {
      const bool crossover = static_cast<int>(c) < cfg.crossover_children;
      Rng rng(DeriveSeed(cfg.seed, "child", {static_cast<uint64_t>(it), c}));
      for (int attempt = 0; attempt < cfg.max_child_retries; ++attempt) {
        ArchGenes genes;
        if (crossover) {
          const ArchGenes& a = parents[rng.UniformIndex(parents.size())].genes;
          const ArchGenes& b = parents[rng.UniformIndex(parents.size())].genes;
          genes = a;
          for (int g = 0; g < ArchGenes::kNumGenes; ++g) {
            if (rng.Bernoulli(0.5)) genes.SetGene(g, b.Gene(g));
          }
        } else {
          genes = parents[rng.UniformIndex(parents.size())].genes;
          for (int g = 0; g < ArchGenes::kNumGenes; ++g) {
            if (rng.Bernoulli(cfg.mutation_prob)) {
              const auto choices = ArchGenes::GeneChoices(g);
              genes.SetGene(g, choices[rng.UniformIndex(choices.size())]);
            }
          }
        }
        Candidate cand = EvaluateCandidate(genes, device, evaluator, cfg.num_classes);
        ++evals[c];
        if (cand.feasible) {
          children[c] = std::move(cand);
          return;
        }
      }
      if (!SampleFeasible(space, device, evaluator, cfg, "refill",
                          static_cast<uint64_t>(it), c, children[c], evals[c])) {
        throw Error(ErrorCode::kInitFailure,
                    "could not refill a child slot with a feasible network");
      }
    });
    for (int64_t e : evals) result.evaluations += e;

    if (cfg.keep_parents) {
      children.insert(children.end(), parents.begin(), parents.end());
      std::sort(children.begin(), children.end(), BetterCandidate);
      children.resize(cfg.population);
    } else {
      std::sort(children.begin(), children.end(), BetterCandidate);
    }
    population = std::move(children);
    if (BetterCandidate(population.front(), result.best)) result.best = population.front();
    result.history.push_back(Summarize(it, population, result.best.score));
  }
  result.final_population = std::move(population);
  return result;
}

Candidate RandomSearch(SpaceConfig space, const DeviceProfile& device,
                       const AccuracyEvaluator& evaluator, int feasible_samples,
                       uint64_t seed, int jobs, int num_classes) {
  if (feasible_samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "random search needs >= 1 sample");
  }
  Candidate best;
  bool have = false;
  int found = 0;
  uint64_t next = 0;
  // Batches are evaluated in parallel but consumed in draw order.
  const int64_t max_draws = int64_t{feasible_samples} * 100;
  while (found < feasible_samples) {
    if (static_cast<int64_t>(next) >= max_draws) {
      throw Error(ErrorCode::kInitFailure, "random search found too few feasible networks");
    }
    const size_t batch = static_cast<size_t>(feasible_samples - found);
    std::vector<Candidate> cands(batch);
    ParallelFor(batch, jobs, [&](size_t i) {
      cands[i] = EvaluateCandidate(
          SampleGenes(space, DeriveSeed(seed, "random-search", {next + i})), device,
          evaluator, num_classes);
    });
    next += batch;
    for (const Candidate& c : cands) {
      if (!c.feasible || found >= feasible_samples) continue;
      ++found;
      if (!have || BetterCandidate(c, best)) {
        best = c;
        have = true;
      }
    }
  }
  return best;
}

}  // namespace tinyco
