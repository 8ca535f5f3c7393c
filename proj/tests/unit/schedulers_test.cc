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

#include <gtest/gtest.h>

#include <chrono>
#include <string>
#include <vector>

#include "hetsched/errors.h"
#include "hetsched/rng.h"
#include "hetsched/synthetic.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace hetsched {
namespace {

using testing::make_catalog;
using testing::make_graph;
using testing::make_layer;

// Independent instance: the GPU is faster on layers 1 and 3 only.
struct Small {
  ModelGraph graph = make_graph({make_layer(0, {0.2, 0.4}, {0.02, 0.03}, {0.9, 0.9}, {0.5, 0.5}),
                                 make_layer(1, {2.0, 0.1}, {0.05, 0.05}, {0.95, 0.9}, {0.6, 0.6}),
                                 make_layer(2, {0.3, 0.5}, {0.02, 0.03}, {0.9, 0.9}, {0.5, 0.5}),
                                 make_layer(3, {1.5, 0.1}, {0.05, 0.04}, {0.95, 0.9}, {0.6, 0.6})},
                                10'000'000, 1, 64, 64);
  ResourceCatalog catalog = make_catalog({2.42});
  JobParams params{20000.0};
};

TEST(PlanSpaceSizeTest, Counts) {
  EXPECT_EQ(plan_space_size(3, 2), 8u);
  EXPECT_EQ(plan_space_size(12, 4), 16'777'216u);
  EXPECT_EQ(plan_space_size(16, 4), 4'294'967'296u);
  EXPECT_EQ(plan_space_size(31, 4), std::uint64_t{1} << 62);
  EXPECT_FALSE(plan_space_size(32, 4).has_value());
  EXPECT_FALSE(plan_space_size(100, 3).has_value());
}

TEST(BruteForceTest, EnumeratesEveryPlan) {
  const Small s;
  const PlanScorer scorer(s.graph, s.catalog, s.params);
  const auto r = brute_force_search(scorer);
  EXPECT_EQ(r.total_plans, 16u);
  EXPECT_EQ(r.evaluated, 16u);
  EXPECT_TRUE(r.completed);
  const auto oracle = testing::exhaustive_min(scorer);
  ASSERT_TRUE(oracle.best.has_value());
  EXPECT_EQ(r.best->plan, oracle.best->plan);
  EXPECT_EQ(r.best->cost, oracle.best->cost);
}

TEST(BruteForceTest, ThreeLayersTwoTypes) {
  Small s;
  s.graph.layers.pop_back();
  const PlanScorer scorer(s.graph, s.catalog, s.params);
  EXPECT_EQ(brute_force_search(scorer).evaluated, 8u);
}

TEST(BruteForceTest, RefusesAboveTheCapWithTheExactCount) {
  std::vector<LayerSpec> layers;
  for (int i = 0; i < 13; ++i) layers.push_back(make_layer(i, {1, 1, 1, 1}, {0, 0, 0, 0},
                                                           {0.9, 0.9, 0.9, 0.9}, {0, 0, 0, 0}));
  const auto graph = make_graph(layers);
  const auto catalog = make_catalog({1.0, 2.0, 3.0});
  const PlanScorer scorer(graph, catalog, JobParams{1e-3});
  try {
    brute_force_search(scorer);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("67108864"), std::string::npos) << e.what();
  }
}

TEST(BruteForceTest, AtTheCapRunsAndCanBeCutShort) {
  std::vector<LayerSpec> layers;
  for (int i = 0; i < 12; ++i) layers.push_back(make_layer(i, {1, 1, 1, 1}, {0, 0, 0, 0},
                                                           {0.9, 0.9, 0.9, 0.9}, {0, 0, 0, 0}));
  const auto graph = make_graph(layers);
  const auto catalog = make_catalog({1.0, 2.0, 3.0});
  const PlanScorer scorer(graph, catalog, JobParams{1e-3});
  BruteForceConfig config;
  config.wall_time_cap = std::chrono::duration<double>(0.05);
  const auto r = brute_force_search(scorer, config);
  EXPECT_EQ(r.total_plans, 16'777'216u);
  EXPECT_FALSE(r.completed);
  EXPECT_LT(r.evaluated, r.total_plans);
  EXPECT_GT(r.estimated_seconds, r.wall_seconds);
}

TEST(BruteForceTest, NoFeasiblePlanIsAnError) {
  const Small s;
  const auto tiny = make_catalog({2.42}, 1, 1);
  const PlanScorer scorer(s.graph, tiny, JobParams{1e9});
  try {
    brute_force(scorer);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("no feasible plan"), std::string::npos) << e.what();
  }
}

TEST(BruteForceTest, ThreadsDoNotChangeTheAnswer) {
  Rng rng(41);
  for (int i = 0; i < 5; ++i) {
    const auto inst = testing::random_instance(rng, 6, 3);
    const PlanScorer scorer(inst.graph, inst.catalog, inst.params);
    BruteForceConfig threaded;
    threaded.threads = 4;
    const auto a = brute_force(scorer);
    const auto b = brute_force(scorer, threaded);
    EXPECT_EQ(a.plan, b.plan);
    EXPECT_EQ(a.cost, b.cost);
  }
}

TEST(GreedyTest, SingleLayerMatchesBruteForce) {
  Small s;
  s.graph.layers.resize(1);
  const PlanScorer scorer(s.graph, s.catalog, s.params);
  const auto g = greedy(scorer);
  const auto bf = brute_force(scorer);
  EXPECT_EQ(g.plan, bf.plan);
  EXPECT_EQ(g.cost, bf.cost);
}

TEST(GreedyTest, DominantTypeGivesHomogeneousPlan) {
  // Type 1 is cheaper and faster on every layer.
  const auto graph = make_graph({make_layer(0, {1.0, 0.1}, {0.1, 0.01}, {0.9, 0.9}, {0.5, 0.5}),
                                 make_layer(1, {2.0, 0.2}, {0.1, 0.01}, {0.9, 0.9}, {0.5, 0.5}),
                                 make_layer(2, {0.5, 0.05}, {0.1, 0.01}, {0.9, 0.9}, {0.5, 0.5})},
                                1'000'000, 1, 64, 64);
  auto catalog = make_catalog({0.01});
  const PlanScorer scorer(graph, catalog, JobParams{5000.0});
  EXPECT_EQ(greedy(scorer).plan, SchedulingPlan({1, 1, 1}));
}

TEST(GreedyTest, CraftedInstanceTrapsGreedy) {
  const auto trap = testing::greedy_trap();
  const PlanScorer scorer(trap.graph, trap.catalog, trap.params);
  const auto oracle = testing::exhaustive_min(scorer);
  ASSERT_TRUE(oracle.best.has_value());
  const auto g = greedy(scorer);
  EXPECT_GT(g.cost, oracle.best->cost * 1.05) << g.plan.to_string() << " vs "
                                              << oracle.best->plan.to_string();
}

TEST(GeneticTest, ElitismKeepsASeededOptimum) {
  const auto inst = make_synthetic_instance(8, 2, 7);
  const PlanScorer scorer(inst.graph, inst.catalog, inst.params);
  const auto bf = brute_force(scorer);
  GeneticConfig config;
  config.generations = 30;
  const auto g = genetic(scorer, config, {bf.plan});
  EXPECT_EQ(g.cost, bf.cost);
  EXPECT_EQ(g.plan, bf.plan);
}

TEST(GeneticTest, ZeroGenerationsReturnsTheBestInitialMember) {
  const Small s;
  const PlanScorer scorer(s.graph, s.catalog, s.params);
  const std::vector<SchedulingPlan> seeds{SchedulingPlan({0, 0, 0, 0}), SchedulingPlan({1, 1, 1, 1}),
                                          SchedulingPlan({0, 1, 0, 1}), SchedulingPlan({1, 0, 1, 0})};
  GeneticConfig config;
  config.population = 4;
  config.generations = 0;
  const auto g = genetic(scorer, config, seeds);
  ScoredPlan best = scorer.score(seeds[0]);
  for (const auto& p : seeds) {
    const auto s2 = scorer.score(p);
    if (ranks_before(s2, best)) best = s2;
  }
  EXPECT_EQ(g.plan, best.plan);
  EXPECT_EQ(g.cost, best.cost);
}

TEST(GeneticTest, ReproducibleFromSeed) {
  const auto inst = make_synthetic_instance(10, 3, 3);
  const PlanScorer scorer(inst.graph, inst.catalog, inst.params);
  GeneticConfig config;
  config.generations = 20;
  config.seed = 99;
  const auto a = genetic(scorer, config);
  const auto b = genetic(scorer, config);
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_EQ(a.cost, b.cost);
}

TEST(GeneticTest, RejectsBadConfig) {
  GeneticConfig config;
  config.population = 0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = {};
  config.crossover_rate = 1.5;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(HeuristicTest, FirstLayerOnCpuRestOnGpu) {
  std::vector<LayerSpec> layers;
  for (int i = 0; i < 5; ++i) layers.push_back(make_layer(i, {1, 0.1}, {0, 0}, {0.9, 0.9}, {0, 0}));
  const auto graph = make_graph(layers);
  const auto catalog = make_catalog({2.42});
  EXPECT_EQ(heuristic_first_layer(graph, catalog), SchedulingPlan({0, 1, 1, 1, 1}));
  EXPECT_EQ(heuristic_first_layer(graph, catalog, true), SchedulingPlan({1, 0, 0, 0, 0}));
}

TEST(HeuristicTest, SingleLayer) {
  const auto graph = make_graph({make_layer(0, {1, 0.1}, {0, 0}, {0.9, 0.9}, {0, 0})});
  EXPECT_EQ(heuristic_first_layer(graph, make_catalog({2.42})), SchedulingPlan({0}));
}

TEST(HeuristicTest, EqualAcceleratorsPickTheLowerId) {
  const auto graph = make_graph({make_layer(0, {1, 0.2, 0.1}, {0, 0, 0}, {0.9, 0.9, 0.9}, {0, 0, 0}),
                                 make_layer(1, {1, 0.1, 0.2}, {0, 0, 0}, {0.9, 0.9, 0.9}, {0, 0, 0})});
  EXPECT_EQ(heuristic_first_layer(graph, make_catalog({2.42, 1.0})), SchedulingPlan({0, 1}));
}

TEST(HomogeneousTest, EveryLayerOnOneType) {
  const Small s;
  EXPECT_EQ(homogeneous(s.graph, s.catalog, 0), SchedulingPlan({0, 0, 0, 0}));
  EXPECT_EQ(homogeneous(s.graph, s.catalog, 1), SchedulingPlan({1, 1, 1, 1}));
  EXPECT_THROW(homogeneous(s.graph, s.catalog, 2), PlanError);
  EXPECT_THROW(homogeneous(s.graph, s.catalog, -1), PlanError);
}

TEST(RandomSearchTest, DedupOverTheWholeSpaceIsBruteForce) {
  const Small s;
  const PlanScorer scorer(s.graph, s.catalog, s.params);
  const auto r = random_search(scorer, 1000, 5, true);
  const auto bf = brute_force(scorer);
  EXPECT_EQ(r.plan, bf.plan);
  EXPECT_EQ(r.cost, bf.cost);
}

TEST(RandomSearchTest, BudgetOneScoresOneSample) {
  const Small s;
  const PlanScorer scorer(s.graph, s.catalog, s.params);
  const auto one = random_search(scorer, 1, 8);
  EXPECT_EQ(one.cost, scorer.score(one.plan).cost);
  // Larger budgets with the same seed extend the same sample sequence.
  EXPECT_LE(random_search(scorer, 5, 8).cost, one.cost);
  EXPECT_THROW(random_search(scorer, 0, 8), ConfigError);
}

TEST(RandomSearchTest, ReproducibleFromSeed) {
  const auto inst = make_synthetic_instance(10, 3, 4);
  const PlanScorer scorer(inst.graph, inst.catalog, inst.params);
  const auto a = random_search(scorer, 64, 17);
  const auto b = random_search(scorer, 64, 17);
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_EQ(a.cost, b.cost);
}

TEST(SchedulerPropertyTest, BruteForceIsALowerBound) {
  Rng rng(42);
  for (int i = 0; i < 24; ++i) {
    const int types = 2 + rng.below(3);
    const int layers = types == 2 ? 1 + rng.below(8) : 1 + rng.below(5);
    const auto inst = testing::random_instance(rng, layers, types);
    const PlanScorer scorer(inst.graph, inst.catalog, inst.params);
    const auto bf = brute_force(scorer);
    const auto oracle = testing::exhaustive_min(scorer);
    ASSERT_EQ(bf.cost, oracle.best->cost);
    GeneticConfig gc;
    gc.generations = 10;
    gc.population = 16;
    std::vector<ScoredPlan> others{
        greedy(scorer), genetic(scorer, gc),
        scorer.score(heuristic_first_layer(inst.graph, inst.catalog)),
        scorer.score(homogeneous(inst.graph, inst.catalog, 0)),
        scorer.score(homogeneous(inst.graph, inst.catalog, 1)), random_search(scorer, 16, 3)};
    for (const auto& o : others) EXPECT_GE(o.cost, bf.cost) << o.plan.to_string();
  }
}

}  // namespace
}  // namespace hetsched
