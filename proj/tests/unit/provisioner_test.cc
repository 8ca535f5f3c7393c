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


#include "hetsched/provisioner.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hetsched/cost_model.h"
#include "hetsched/errors.h"
#include "hetsched/rng.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace hetsched {
namespace {

using testing::make_catalog;
using testing::make_graph;
using testing::make_layer;

Stage stage_with(double oct, double odt, double alpha, double beta) {
  Stage s;
  s.oct = oct;
  s.odt = odt;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

double cost_of(const SchedulingPlan& plan, const ProvisioningPlan& p, const ModelGraph& graph,
               const ResourceCatalog& catalog, const JobParams& params) {
  return evaluate(plan, p, graph, catalog, params).monetary_cost;
}

TEST(MinK1Test, FullyParallelStage) {
  // B / limit = 2 seconds per sample.
  const auto graph = make_graph({make_layer(0, {10}, {0}, {1}, {0})}, 1000, 1, 4, 1);
  EXPECT_DOUBLE_EQ(min_k1(stage_with(10, 0, 1.0, 0.0), graph, JobParams{2.0}), 5.0);
}

TEST(MinK1Test, SerialFloorAboveBudgetIsInfeasible) {
  const auto graph = make_graph({make_layer(0, {10}, {0}, {0.5}, {0})}, 1000, 1, 4, 1);
  EXPECT_THROW(min_k1(stage_with(10, 0, 0.5, 0.0), graph, JobParams{2.0}), InfeasibleError);
  EXPECT_THROW(min_k1(stage_with(1, 10, 1.0, 0.5), graph, JobParams{2.0}), InfeasibleError);
}

TEST(MinK1Test, SymmetricStageHasEqualBounds) {
  const auto graph = make_graph({make_layer(0, {3}, {3}, {0.8}, {0.8})}, 1000, 1, 4, 1);
  const JobParams params{2.0};
  const double both = min_k1(stage_with(3, 3, 0.8, 0.8), graph, params);
  EXPECT_DOUBLE_EQ(both, min_k1(stage_with(3, 0, 0.8, 0.0), graph, params));
  EXPECT_DOUBLE_EQ(both, min_k1(stage_with(0, 3, 0.0, 0.8), graph, params));
  // 0.8 * 3 / (2 - 0.2 * 3)
  EXPECT_NEAR(both, 2.4 / 1.4, 1e-12);
}

TEST(MinK1Test, TakesTheLargerBound) {
  const auto graph = make_graph({make_layer(0, {4}, {6}, {1}, {1})}, 1000, 1, 4, 1);
  EXPECT_DOUBLE_EQ(min_k1(stage_with(4, 6, 1.0, 1.0), graph, JobParams{2.0}), 3.0);
}

TEST(DeriveKiTest, IdenticalStagesMatch) {
  const Stage s = stage_with(2.0, 0.1, 0.9, 0.5);
  for (double k1 : {1.0, 3.5, 17.0}) EXPECT_NEAR(*derive_ki(k1, s, s), k1, 1e-12 * k1);
}

TEST(DeriveKiTest, DoubleWorkNeedsDoubleUnits) {
  const Stage anchor = stage_with(1.0, 0, 1.0, 0);
  const Stage heavy = stage_with(2.0, 0, 1.0, 0);
  for (double k1 : {1.0, 4.0, 9.0}) EXPECT_NEAR(*derive_ki(k1, anchor, heavy), 2 * k1, 1e-12);
}

TEST(DeriveKiTest, SerialStageThatAlreadyMatchesNeedsOneUnit) {
  const Stage anchor = stage_with(4.0, 0, 0.5, 0);
  const Stage serial = stage_with(1.0, 0, 0.0, 0);
  EXPECT_EQ(*derive_ki(2.0, anchor, serial), 1.0);
}

TEST(DeriveKiTest, UnreachableStageIsNullopt) {
  const Stage anchor = stage_with(1.0, 0, 1.0, 0);
  const Stage slow = stage_with(10.0, 0, 0.5, 0);
  EXPECT_FALSE(derive_ki(100.0, anchor, slow).has_value());
}

TEST(UnitsForTargetTest, CoversComputeAndTransfer) {
  const Stage s = stage_with(8.0, 12.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(*units_for_target(s, 2.0, 1.0), 6.0);
  EXPECT_FALSE(units_for_target(stage_with(8.0, 0, 0.5, 0), 2.0, 1.0).has_value());
}

class AddPsCoresTest : public ::testing::Test {
 protected:
  ModelGraph graph = make_graph({make_layer(0, {1, 1}, {0.1, 0.1}, {0.9, 0.9}, {0.5, 0.5}),
                                 make_layer(1, {1, 1}, {0.1, 0.1}, {0.9, 0.9}, {0.5, 0.5})});
  ResourceCatalog catalog = make_catalog({2.42});
};

TEST_F(AddPsCoresTest, SixCoresPerAccelerator) {
  const auto stages = build_stages(SchedulingPlan({1, 1}), graph);
  const auto base = make_provisioning(stages, {4}, 0, -1, 2);
  const auto p = add_ps_cores(base, stages, catalog, ProvisionerConfig{});
  EXPECT_EQ(p.ps_cores, 24);
  EXPECT_EQ(p.ps_type, 0);
  EXPECT_EQ(p.per_type_totals, (std::vector<int>{24, 4}));
}

TEST_F(AddPsCoresTest, NoAcceleratorsNoCores) {
  const auto stages = build_stages(SchedulingPlan({0, 0}), graph);
  const auto p = add_ps_cores(make_provisioning(stages, {7}, 0, -1, 2), stages, catalog, {});
  EXPECT_EQ(p.ps_cores, 0);
  EXPECT_EQ(p.per_type_totals, (std::vector<int>{7, 0}));
}

TEST_F(AddPsCoresTest, FractionalRatioRoundsUp) {
  ProvisionerConfig config;
  config.ps_cores_per_gpu = 1.5;
  const auto stages = build_stages(SchedulingPlan({0, 1}), graph);
  const auto p = add_ps_cores(make_provisioning(stages, {2, 3}, 0, -1, 2), stages, catalog, config);
  EXPECT_EQ(p.ps_cores, 5);
  EXPECT_EQ(p.per_type_totals, (std::vector<int>{7, 3}));
}

TEST_F(AddPsCoresTest, QuotaBreachThrows) {
  const auto small = make_catalog({2.42}, 10, 8);
  const auto stages = build_stages(SchedulingPlan({1, 1}), graph);
  EXPECT_THROW(add_ps_cores(make_provisioning(stages, {4}, 0, -1, 2), stages, small, {}),
               InfeasibleError);
}

class StaticProvisionTest : public ::testing::Test {
 protected:
  // CPU stage: 0.6 / (6 g); GPU stage: 1 / g. Throughput g beats 1.5 at g = 2.
  ModelGraph graph = make_graph({make_layer(0, {0.6, 0.6}, {0, 0}, {1, 1}, {0, 0}),
                                 make_layer(1, {1.0, 1.0}, {0, 0}, {1, 1}, {0, 0})});
  ResourceCatalog catalog = make_catalog({2.42});
  JobParams params{1.5};
  SchedulingPlan plan{{0, 1}};
};

TEST_F(StaticProvisionTest, StaRatio) {
  const auto p = static_provision(plan, graph, catalog, params, StaticMode::kStaRatio);
  EXPECT_EQ(p.per_stage_k, (std::vector<int>{12, 2}));
  EXPECT_EQ(p.ps_cores, 0);
  EXPECT_EQ(p.per_type_totals, (std::vector<int>{12, 2}));
  EXPECT_TRUE(evaluate(plan, p, graph, catalog, params).feasible);
}

TEST_F(StaticProvisionTest, StaPSRatio) {
  const auto p = static_provision(plan, graph, catalog, params, StaticMode::kStaPSRatio);
  EXPECT_EQ(p.per_stage_k, (std::vector<int>{12, 2}));
  EXPECT_EQ(p.ps_cores, 12);
  EXPECT_EQ(p.per_type_totals, (std::vector<int>{24, 2}));
}

TEST_F(StaticProvisionTest, TinyLimitNeedsOneAccelerator) {
  const SchedulingPlan gpu_only({1, 1});
  const auto p = static_provision(gpu_only, graph, catalog, JobParams{1e-9}, StaticMode::kStaRatio);
  EXPECT_EQ(p.per_type_totals, (std::vector<int>{0, 1}));
}

TEST_F(StaticProvisionTest, UnreachableLimitThrows) {
  const auto small = make_catalog({2.42}, 64, 4);
  EXPECT_THROW(static_provision(plan, graph, small, JobParams{5.0}, StaticMode::kStaRatio),
               InfeasibleError);
}

TEST(OptimizeK1Test, SingleStageTakesTheFloorCount) {
  const auto graph = make_graph({make_layer(0, {1, 0.3}, {0.1, 0.05}, {0.9, 0.95}, {0.5, 0.6})},
                                100000, 1, 64, 64);
  const auto catalog = make_catalog({2.42});
  const JobParams params{20000.0};
  for (TypeId t : {0, 1}) {
    const SchedulingPlan plan({t});
    const auto p = optimize_k1(plan, graph, catalog, params);
    const double bound = min_k1(build_stages(plan, graph)[0], graph, params);
    EXPECT_EQ(p.per_stage_k[0], static_cast<int>(std::floor(bound)) + 1);
    // Grid check: every larger count costs more.
    const double best = cost_of(plan, p, graph, catalog, params);
    for (int k = p.per_stage_k[0] + 1; k < p.per_stage_k[0] + 20; ++k) {
      auto bigger = add_ps_cores(make_provisioning(build_stages(plan, graph), {k}, 0, -1, 2),
                                 build_stages(plan, graph), catalog, {});
      EXPECT_GT(cost_of(plan, bigger, graph, catalog, params), best);
    }
  }
}

TEST(OptimizeK1Test, IdenticalStagesGetEqualCounts) {
  const auto layer = [](int i) { return make_layer(i, {1, 1}, {0.1, 0.1}, {0.95, 0.95}, {0.5, 0.5}); };
  const auto graph = make_graph({layer(0), layer(1), layer(2)}, 100000, 1, 64, 64);
  const auto catalog = make_catalog({0.04});
  const auto p = optimize_k1(SchedulingPlan({0, 1, 0}), graph, catalog, JobParams{500.0});
  ASSERT_EQ(p.per_stage_k.size(), 3u);
  EXPECT_EQ(p.per_stage_k[0], p.per_stage_k[1]);
  EXPECT_EQ(p.per_stage_k[1], p.per_stage_k[2]);
}

TEST(OptimizeK1Test, QuotaTooSmallNamesTheQuota) {
  const auto graph = make_graph({make_layer(0, {1, 0.3}, {0.1, 0.05}, {0.9, 0.95}, {0.5, 0.6})},
                                100000, 1, 64, 64);
  const auto catalog = make_catalog({2.42}, 2, 2);
  try {
    optimize_k1(SchedulingPlan({0}), graph, catalog, JobParams{20000.0});
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("quota"), std::string::npos) << e.what();
  }
}

// Random instances whose quotas keep the integer grid small.
testing::RandomInstance small_quota_instance(Rng& rng, int layers, int types) {
  auto inst = testing::random_instance(rng, layers, types);
  for (auto& t : inst.catalog.types) t.quota = 400;
  return inst;
}

TEST(OptimizeK1Test, MatchesTheIntegerOptimum) {
  Rng rng(21);
  int compared = 0;
  double worst = 0.0;
  for (int i = 0; i < 60; ++i) {
    const int layers = 1 + rng.below(6);
    const int types = 2 + rng.below(3);
    const auto inst = small_quota_instance(rng, layers, types);
    const auto plan = testing::random_plan(rng, layers, types);
    const ProvisionerConfig config;
    const auto optimum = testing::min_provisioning_cost(
        plan, inst.graph, inst.catalog, inst.params.throughput_limit, config.ps_cores_per_gpu);
    ProvisionResult r;
    try {
      r = optimize_k1_detailed(plan, inst.graph, inst.catalog, inst.params, config);
    } catch (const InfeasibleError&) {
      EXPECT_FALSE(optimum.has_value()) << plan.to_string();
      continue;
    }
    ASSERT_TRUE(optimum.has_value()) << plan.to_string();
    ++compared;
    const double cost = cost_of(plan, r.provisioning, inst.graph, inst.catalog, inst.params);
    EXPECT_GE(cost, *optimum * (1.0 - 1e-12)) << plan.to_string();
    worst = std::max(worst, cost / *optimum - 1.0);
  }
  EXPECT_GE(compared, 30);
  EXPECT_LE(worst, 1e-9);
}

TEST(OptimizeK1PropertyTest, FeasibleOrThrows) {
  Rng rng(22);
  for (int i = 0; i < 300; ++i) {
    const int layers = 1 + rng.below(6);
    const int types = 2 + rng.below(3);
    auto inst = testing::random_instance(rng, layers, types);
    if (i % 3 == 0) {
      for (auto& t : inst.catalog.types) t.quota = 1 + rng.below(40);
    }
    const auto plan = testing::random_plan(rng, layers, types);
    try {
      const auto p = optimize_k1(plan, inst.graph, inst.catalog, inst.params);
      const auto report = evaluate(plan, p, inst.graph, inst.catalog, inst.params);
      ASSERT_TRUE(report.feasible) << plan.to_string() << ": " << report.violation.value_or("");
      for (int k : p.per_stage_k) ASSERT_GE(k, 1);
    } catch (const InfeasibleError&) {
    }
  }
}

TEST(OptimizeK1PropertyTest, Deterministic) {
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto inst = testing::random_instance(rng, 5, 3);
    const auto plan = testing::random_plan(rng, 5, 3);
    EXPECT_EQ(optimize_k1(plan, inst.graph, inst.catalog, inst.params),
              optimize_k1(plan, inst.graph, inst.catalog, inst.params));
  }
}

TEST(OptimizeK1PropertyTest, NoDearerThanStaticRatios) {
  Rng rng(24);
  ProvisionerConfig no_ps;
  no_ps.include_ps_cores = false;
  for (int i = 0; i < 100; ++i) {
    const auto inst = testing::random_instance(rng, 4, 2);
    const auto plan = testing::random_plan(rng, 4, 2);
    const double with_ps =
        cost_of(plan, optimize_k1(plan, inst.graph, inst.catalog, inst.params), inst.graph,
                inst.catalog, inst.params);
    const double without_ps =
        cost_of(plan, optimize_k1(plan, inst.graph, inst.catalog, inst.params, no_ps),
                inst.graph, inst.catalog, inst.params);
    const auto sta = static_provision(plan, inst.graph, inst.catalog, inst.params,
                                      StaticMode::kStaRatio);
    const auto staps = static_provision(plan, inst.graph, inst.catalog, inst.params,
                                        StaticMode::kStaPSRatio);
    EXPECT_LE(without_ps, cost_of(plan, sta, inst.graph, inst.catalog, inst.params))
        << plan.to_string();
    EXPECT_LE(with_ps, cost_of(plan, staps, inst.graph, inst.catalog, inst.params))
        << plan.to_string();
  }
}

}  // namespace
}  // namespace hetsched
