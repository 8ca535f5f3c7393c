// Copyright 2026 The hetsched Authors
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

#ifndef HETSCHED_SCHEDULERS_H_
#define HETSCHED_SCHEDULERS_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "hetsched/model.h"
#include "hetsched/scoring.h"

// Reference plan searchers. All of them score candidates through a
// PlanScorer, so every method sees the same provisioning and cost model.
namespace hetsched {

struct BruteForceConfig {
  std::uint64_t enumeration_cap = std::uint64_t{1} << 24;
  // Stop enumerating after this long and extrapolate; zero disables.
  std::chrono::duration<double> wall_time_cap{0.0};
  int threads = 1;
};

struct BruteForceResult {
  std::optional<ScoredPlan> best;  // empty only when the run was cut short
  std::uint64_t total_plans = 0;   // T^L
  std::uint64_t evaluated = 0;
  bool completed = false;
  double wall_seconds = 0.0;
  // wall_seconds when completed; otherwise per-plan mean time * total_plans.
  double estimated_seconds = 0.0;
};

// T^L, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> plan_space_size(std::size_t layers, std::size_t types);

// Exhaustive search. Throws ConfigError when T^L exceeds the cap and
// InfeasibleError when the enumeration completes without a feasible plan.
BruteForceResult brute_force_search(const PlanScorer& scorer, const BruteForceConfig& config = {});
ScoredPlan brute_force(const PlanScorer& scorer, const BruteForceConfig& config = {});

// Layer-by-layer choice with the not-yet-decided suffix filled with the
// candidate type.
ScoredPlan greedy(const PlanScorer& scorer);

struct GeneticConfig {
  int population = 64;
  int generations = 200;
  double crossover_rate = 0.8;
  double mutation_rate = -1.0;  // negative means 1 / L
  int tournament_size = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

// Tournament selection, one-point crossover, per-gene uniform mutation and an
// elite of one. `seeds` replace the first members of the initial population.
ScoredPlan genetic(const PlanScorer& scorer, const GeneticConfig& config,
                   const std::vector<SchedulingPlan>& seeds = {});

// Layer 0 on the cheapest CPU type, the rest on the accelerator type with the
// smallest summed oct (lowest id on ties). `invert` swaps the two roles.
SchedulingPlan heuristic_first_layer(const ModelGraph& graph, const ResourceCatalog& catalog,
                                     bool invert = false);

// Every layer on `type_id`. Throws PlanError for an unknown type.
SchedulingPlan homogeneous(const ModelGraph& graph, const ResourceCatalog& catalog,
                           TypeId type_id);

// Cheapest CPU type, and the accelerator with the smallest summed oct.
TypeId default_cpu_type(const ModelGraph& graph, const ResourceCatalog& catalog);
TypeId default_accelerator_type(const ModelGraph& graph, const ResourceCatalog& catalog);

// Best of `budget` uniform plans. With `dedup` the samples are distinct and
// the budget is capped at T^L.
ScoredPlan random_search(const PlanScorer& scorer, std::uint64_t budget, std::uint64_t seed,
                         bool dedup = false);

}  // namespace hetsched

#endif  // HETSCHED_SCHEDULERS_H_
