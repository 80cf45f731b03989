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

// Evolution search for the best feasible architecture inside one space.

#ifndef TINYCO_EVOLUTION_H_
#define TINYCO_EVOLUTION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/planner.h"

namespace tinyco {

struct Candidate {
  ArchGenes genes;
  double score = 0.0;
  int64_t macs = 0;
  int64_t peak_sram = 0;
  int64_t flash = 0;
  bool feasible = false;
};

// Scores an architecture in [0, 1]. Implementations must be pure: the same
// genes always give the same score.
class AccuracyEvaluator {
 public:
  virtual ~AccuracyEvaluator() = default;
  virtual std::string name() const = 0;
  virtual double Score(const ArchGenes& genes, const NetworkArch& arch) const = 0;
};

// Accuracy stand-in that grows with compute:
//   score = 0.01 + 0.98 * z / (1 + z) + eps,  z = sqrt(MACs / 1e8)
// where eps is a hash-derived perturbation in (-kSurrogateNoise,
// kSurrogateNoise) that breaks ties between equal-MAC architectures.
class SurrogateEvaluator : public AccuracyEvaluator {
 public:
  std::string name() const override { return "surrogate"; }
  double Score(const ArchGenes& genes, const NetworkArch& arch) const override;
};

inline constexpr double kSurrogateNoise = 1e-5;

// The MAC-driven part of the surrogate, without the perturbation.
double SurrogateBase(int64_t macs);
// Perturbation for an identity hash.
double SurrogateNoise(uint64_t identity);
uint64_t GenesHash(const ArchGenes& genes);
// Surrogate for a genes vector (builds the network internally).
double SurrogateScore(const ArchGenes& genes,
                      int num_classes = kDefaultNumClasses);
// Surrogate for a network outside the searchable encoding (the scaled
// baselines); the perturbation is keyed on the network name.
double SurrogateFixedArchScore(const NetworkArch& arch);

struct EvolutionConfig {
  int population = 100;
  int parents = 20;
  int crossover_children = 50;
  int mutation_children = 50;
  double mutation_prob = 0.1;
  int iterations = 30;
  uint64_t seed = 0;
  // Alternative bookkeeping: the next generation is the best `population`
  // of parents plus children instead of the children alone.
  bool keep_parents = false;
  int max_child_retries = 100;
  int max_sample_attempts = 100;  // per population slot
  int num_classes = kDefaultNumClasses;
  int jobs = 1;

  void Validate() const;
};

struct IterationStats {
  int iteration = 0;  // 0 is the initial population
  double best = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double best_ever = 0.0;
};

struct EvolutionResult {
  Candidate best;
  std::vector<Candidate> final_population;
  std::vector<IterationStats> history;
  int64_t evaluations = 0;
};

// Builds, plans and scores one architecture against `device`.
Candidate EvaluateCandidate(const ArchGenes& genes, const DeviceProfile& device,
                            const AccuracyEvaluator& evaluator,
                            int num_classes = kDefaultNumClasses);

// Ranking used for parent selection: higher score first, ties broken by the
// gene vector so that the order is total.
bool BetterCandidate(const Candidate& a, const Candidate& b);

// Random feasible initial population. Throws Error(kInitFailure) if a slot
// finds no feasible network within cfg.max_sample_attempts draws.
std::vector<Candidate> InitialPopulation(SpaceConfig space,
                                         const DeviceProfile& device,
                                         const AccuracyEvaluator& evaluator,
                                         const EvolutionConfig& cfg);

EvolutionResult Evolve(SpaceConfig space, const DeviceProfile& device,
                       const AccuracyEvaluator& evaluator,
                       const EvolutionConfig& cfg);

// Same loop starting from a caller-provided population (all feasible).
EvolutionResult EvolveFrom(SpaceConfig space, const DeviceProfile& device,
                           const AccuracyEvaluator& evaluator,
                           const EvolutionConfig& cfg,
                           std::vector<Candidate> population);

// Best of the first `feasible_samples` feasible uniform draws.
Candidate RandomSearch(SpaceConfig space, const DeviceProfile& device,
                       const AccuracyEvaluator& evaluator, int feasible_samples,
                       uint64_t seed, int jobs = 1,
                       int num_classes = kDefaultNumClasses);

}  // namespace tinyco

#endif  // TINYCO_EVOLUTION_H_
