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

#include "hetsched/schedulers.h"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "hetsched/errors.h"
#include "hetsched/rng.h"

namespace hetsched {
namespace {

using Clock = std::chrono::steady_clock;

// Layer 0 is the most significant digit, so index order is lexicographic.
SchedulingPlan plan_from_index(std::uint64_t index, std::size_t layers, std::size_t types) {
  std::vector<TypeId> ids(layers, 0);
  for (std::size_t l = layers; l-- > 0;) {
    ids[l] = static_cast<TypeId>(index % types);
    index /= types;
  }
  return SchedulingPlan(std::move(ids));
}

SchedulingPlan random_plan(Rng& rng, std::size_t layers, std::size_t types) {
  std::vector<TypeId> ids(layers);
  for (auto& id : ids) id = rng.below(static_cast<int>(types));
  return SchedulingPlan(std::move(ids));
}

void keep_best(std::optional<ScoredPlan>& best, ScoredPlan candidate) {
  if (!best || ranks_before(candidate, *best)) best = std::move(candidate);
}

// Scores each distinct plan once; schedulers revisit plans often.
class ScoreCache {
 public:
  explicit ScoreCache(const PlanScorer& scorer) : scorer_(scorer) {}

  const ScoredPlan& get(const SchedulingPlan& plan) {
    auto it = cache_.find(plan);
    if (it == cache_.end()) it = cache_.emplace(plan, scorer_.score(plan)).first;
    return it->second;
  }

 private:
  const PlanScorer& scorer_;
  std::map<SchedulingPlan, ScoredPlan> cache_;
};

}  // namespace

std::optional<std::uint64_t> plan_space_size(std::size_t layers, std::size_t types) {
  std::uint64_t total = 1;
  for (std::size_t l = 0; l < layers; ++l) {
    if (total > std::numeric_limits<std::uint64_t>::max() / types) return std::nullopt;
    total *= types;
  }
  return total;
}

BruteForceResult brute_force_search(const PlanScorer& scorer, const BruteForceConfig& config) {
  const std::size_t layers = scorer.graph().size();
  const std::size_t types = scorer.catalog().size();
  const auto total = plan_space_size(layers, types);
  if (!total) {
    throw ConfigError("brute force: " + std::to_string(types) + "^" + std::to_string(layers) +
                      " plans overflow a 64-bit count");
  }
  if (*total > config.enumeration_cap) {
    throw ConfigError("brute force refused: " + std::to_string(types) + "^" +
                      std::to_string(layers) + " = " + std::to_string(*total) +
                      " plans exceeds the enumeration cap of " +
                      std::to_string(config.enumeration_cap));
  }

  BruteForceResult result;
  result.total_plans = *total;
  const auto start = Clock::now();
  const bool timed = config.wall_time_cap.count() > 0.0;
  const int threads = std::max(1, config.threads);

  struct Partial {
    std::optional<ScoredPlan> best;
    std::uint64_t evaluated = 0;
    bool stopped = false;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(threads));
  auto work = [&](int worker) {
    Partial& mine = partials[static_cast<std::size_t>(worker)];
    const std::uint64_t chunk = (*total + threads - 1) / threads;
    const std::uint64_t begin = chunk * worker;
    const std::uint64_t end = std::min(*total, begin + chunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      if (timed && (mine.evaluated & 63) == 0 && Clock::now() - start > config.wall_time_cap) {
        mine.stopped = true;
        return;
      }
      keep_best(mine.best, scorer.score(plan_from_index(i, layers, types)));
      ++mine.evaluated;
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  // (cost, plan) is a total order, so the reduction is order independent.
  bool stopped = false;
  for (Partial& p : partials) {
    result.evaluated += p.evaluated;
    stopped = stopped || p.stopped;
    if (p.best) keep_best(result.best, std::move(*p.best));
  }
  result.completed = !stopped;
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (result.completed || result.evaluated == 0) {
    result.estimated_seconds = result.wall_seconds;
  } else {
    result.estimated_seconds =
        result.wall_seconds / static_cast<double>(result.evaluated) * static_cast<double>(*total);
  }
  return result;
}

ScoredPlan brute_force(const PlanScorer& scorer, const BruteForceConfig& config) {
  BruteForceConfig untimed = config;
  untimed.wall_time_cap = std::chrono::duration<double>(0.0);
  BruteForceResult result = brute_force_search(scorer, untimed);
  if (!result.best || !result.best->feasible) {
    throw InfeasibleError("brute force: no feasible plan among " +
                          std::to_string(result.total_plans) + " plans");
  }
  return std::move(*result.best);
}

ScoredPlan greedy(const PlanScorer& scorer) {
  const std::size_t layers = scorer.graph().size();
  const auto types = static_cast<TypeId>(scorer.catalog().size());
  std::vector<TypeId> decided;
  std::optional<ScoredPlan> best;
  for (std::size_t l = 0; l < layers; ++l) {
    std::optional<ScoredPlan> step_best;
    for (TypeId t = 0; t < types; ++t) {
      std::vector<TypeId> candidate = decided;
      candidate.resize(layers, t);
      ScoredPlan scored = scorer.score(SchedulingPlan(std::move(candidate)));
      // Ties keep the lower type id: candidates arrive in id order.
      if (!step_best || scored.cost < step_best->cost) step_best = std::move(scored);
    }
    decided.push_back(step_best->plan[l]);
    best = std::move(step_best);
  }
  return std::move(*best);
}

void GeneticConfig::validate() const {
  if (population < 2) throw ConfigError("genetic: population must be >= 2");
  if (generations < 0) throw ConfigError("genetic: generations must be >= 0");
  if (crossover_rate < 0.0 || crossover_rate > 1.0) {
    throw ConfigError("genetic: crossover_rate must lie in [0,1]");
  }
  if (mutation_rate > 1.0) throw ConfigError("genetic: mutation_rate must lie in [0,1]");
  if (tournament_size < 1) throw ConfigError("genetic: tournament_size must be >= 1");
}

ScoredPlan genetic(const PlanScorer& scorer, const GeneticConfig& config,
                   const std::vector<SchedulingPlan>& seeds) {
  config.validate();
  const std::size_t layers = scorer.graph().size();
  const std::size_t types = scorer.catalog().size();
  const double mutation =
      config.mutation_rate < 0.0 ? 1.0 / static_cast<double>(layers) : config.mutation_rate;
  Rng rng(config.seed);
  ScoreCache cache(scorer);

  std::vector<SchedulingPlan> population;
  for (const SchedulingPlan& s : seeds) {
    if (population.size() == static_cast<std::size_t>(config.population)) break;
    validate_plan(s, scorer.graph(), scorer.catalog());
    population.push_back(s);
  }
  while (population.size() < static_cast<std::size_t>(config.population)) {
    population.push_back(random_plan(rng, layers, types));
  }

  std::optional<ScoredPlan> best;
  auto fittest = [&](const std::vector<SchedulingPlan>& pop) {
    std::size_t winner = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
      if (ranks_before(cache.get(pop[i]), cache.get(pop[winner]))) winner = i;
    }
    return winner;
  };
  auto tournament = [&](const std::vector<SchedulingPlan>& pop) -> const SchedulingPlan& {
    std::size_t winner = rng.below(static_cast<std::uint64_t>(pop.size()));
    for (int r = 1; r < config.tournament_size; ++r) {
      const std::size_t challenger = rng.below(static_cast<std::uint64_t>(pop.size()));
      if (ranks_before(cache.get(pop[challenger]), cache.get(pop[winner]))) winner = challenger;
    }
    return pop[winner];
  };

  keep_best(best, cache.get(population[fittest(population)]));
  for (int gen = 0; gen < config.generations; ++gen) {
    std::vector<SchedulingPlan> next;
    next.reserve(population.size());
    next.push_back(population[fittest(population)]);
    while (next.size() < population.size()) {
      const SchedulingPlan& mother = tournament(population);
      const SchedulingPlan& father = tournament(population);
      std::vector<TypeId> child = mother.assignment();
      if (layers > 1 && rng.bernoulli(config.crossover_rate)) {
        const std::size_t cut = 1 + rng.below(static_cast<std::uint64_t>(layers - 1));
        std::copy(father.assignment().begin() + static_cast<std::ptrdiff_t>(cut),
                  father.assignment().end(), child.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (auto& gene : child) {
        if (rng.bernoulli(mutation)) gene = rng.below(static_cast<int>(types));
      }
      next.emplace_back(std::move(child));
    }
    population = std::move(next);
    keep_best(best, cache.get(population[fittest(population)]));
  }
  return std::move(*best);
}

TypeId default_cpu_type(const ModelGraph& /*graph*/, const ResourceCatalog& catalog) {
  const auto cpu = catalog.cheapest_cpu();
  if (!cpu) throw ConfigError("catalog has no CPU type");
  return *cpu;
}

TypeId default_accelerator_type(const ModelGraph& graph, const ResourceCatalog& catalog) {
  std::optional<TypeId> best;
  double best_sum = 0.0;
  for (const ResourceType& type : catalog.types) {
    if (type.is_cpu) continue;
    double sum = 0.0;
    for (const LayerSpec& layer : graph.layers) sum += layer.oct.at(static_cast<std::size_t>(type.id));
    if (!best || sum < best_sum) {
      best = type.id;
      best_sum = sum;
    }
  }
  if (!best) throw ConfigError("catalog has no accelerator type");
  return *best;
}

SchedulingPlan heuristic_first_layer(const ModelGraph& graph, const ResourceCatalog& catalog,
                                     bool invert) {
  TypeId first = default_cpu_type(graph, catalog);
  TypeId rest = default_accelerator_type(graph, catalog);
  if (invert) std::swap(first, rest);
  std::vector<TypeId> ids(graph.size(), rest);
  ids.at(0) = first;
  return SchedulingPlan(std::move(ids));
}

SchedulingPlan homogeneous(const ModelGraph& graph, const ResourceCatalog& catalog,
                           TypeId type_id) {
  if (type_id < 0 || static_cast<std::size_t>(type_id) >= catalog.size()) {
    throw PlanError("unknown type id " + std::to_string(type_id));
  }
  return SchedulingPlan(std::vector<TypeId>(graph.size(), type_id));
}

ScoredPlan random_search(const PlanScorer& scorer, std::uint64_t budget, std::uint64_t seed,
                         bool dedup) {
  if (budget == 0) throw ConfigError("random search: budget must be >= 1");
  const std::size_t layers = scorer.graph().size();
  const std::size_t types = scorer.catalog().size();
  if (dedup) {
    if (const auto total = plan_space_size(layers, types)) budget = std::min(budget, *total);
  }
  Rng rng(seed);
  std::set<SchedulingPlan> seen;
  std::optional<ScoredPlan> best;
  for (std::uint64_t i = 0; i < budget; ++i) {
    SchedulingPlan plan = random_plan(rng, layers, types);
    if (dedup) {
      while (!seen.insert(plan).second) plan = random_plan(rng, layers, types);
    }
    keep_best(best, scorer.score(plan));
  }
  return std::move(*best);
}

}  // namespace hetsched
