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


#include "hetsched/cost_model.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hetsched/errors.h"
#include "hetsched/provisioner.h"
#include "hetsched/rng.h"
#include "hetsched/scoring.h"
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

TEST(ComputeCtTest, Examples) {
  EXPECT_DOUBLE_EQ(compute_ct(stage_with(4, 0, 0.0, 0), 1, 2), 2.0);
  EXPECT_DOUBLE_EQ(compute_ct(stage_with(4, 0, 0.0, 0), 37, 2), 2.0);
  EXPECT_DOUBLE_EQ(compute_ct(stage_with(8, 0, 1.0, 0), 4, 2), 1.0);
  EXPECT_NEAR(compute_ct(stage_with(10, 0, 0.9, 0), 10, 1), 1.9, 1e-12);
}

TEST(ComputeCtTest, RejectsZeroUnits) {
  EXPECT_THROW(compute_ct(stage_with(4, 0, 0.5, 0), 0, 1), NumericError);
}

TEST(ComputeDtTest, Examples) {
  EXPECT_DOUBLE_EQ(compute_dt(stage_with(0, 3, 0, 0.0), 100, 1), 3.0);
  EXPECT_DOUBLE_EQ(compute_dt(stage_with(0, 6, 0, 1.0), 3, 2), 1.0);
  EXPECT_DOUBLE_EQ(compute_dt(stage_with(0, 4, 0, 0.5), 2, 2), 1.5);
  EXPECT_THROW(compute_dt(stage_with(0, 4, 0, 0.5), 0, 2), NumericError);
}

TEST(StageExecTimeTest, Examples) {
  EXPECT_EQ(stage_exec_time(1.0, 2.0), 2.0);
  EXPECT_EQ(stage_exec_time(2.0, 2.0), 2.0);
  EXPECT_EQ(stage_exec_time(1.9, 0.3), 1.9);
}

TEST(StageThroughputTest, Examples) {
  EXPECT_DOUBLE_EQ(stage_throughput(2.0, 512), 256.0);
  EXPECT_DOUBLE_EQ(stage_throughput(1.0, 1), 1.0);
  EXPECT_DOUBLE_EQ(stage_throughput(0.5, 64), 128.0);
  EXPECT_THROW(stage_throughput(0.0, 64), NumericError);
}

TEST(PipelineThroughputTest, Examples) {
  const std::vector<double> three{256, 300, 280};
  const std::vector<double> one{100};
  const std::vector<double> flat{5, 5, 5};
  EXPECT_EQ(pipeline_throughput(three), 256.0);
  EXPECT_EQ(pipeline_throughput(one), 100.0);
  EXPECT_EQ(pipeline_throughput(flat), 5.0);
  EXPECT_THROW(pipeline_throughput(std::vector<double>{}), NumericError);
}

TEST(TotalExecTimeTest, Examples) {
  auto graph = make_graph({make_layer(0, {1}, {1}, {0.5}, {0.5})}, 1000, 1);
  EXPECT_DOUBLE_EQ(total_exec_time(graph, 100), 10.0);
  graph.total_samples = 500;
  graph.epochs = 2;
  EXPECT_DOUBLE_EQ(total_exec_time(graph, 50), 20.0);
}

TEST(MonetaryCostTest, Examples) {
  const auto catalog = make_catalog({2.42});
  ProvisioningPlan mixed;
  mixed.per_type_totals = {6, 1};
  EXPECT_NEAR(monetary_cost(3600, mixed, catalog), 2.66, 1e-12);
  EXPECT_EQ(monetary_cost(0, mixed, catalog), 0.0);
  ProvisioningPlan one_core;
  one_core.per_type_totals = {1, 0};
  EXPECT_NEAR(monetary_cost(7200, one_core, catalog), 0.08, 1e-12);
}

class EvaluateTest : public ::testing::Test {
 protected:
  ModelGraph graph = make_graph({make_layer(0, {2.0, 0.5}, {0.2, 0.1}, {0.9, 0.8}, {0.5, 0.5}),
                                 make_layer(1, {4.0, 0.2}, {0.1, 0.3}, {0.95, 0.9}, {0.6, 0.4}),
                                 make_layer(2, {1.0, 0.3}, {0.4, 0.2}, {0.8, 0.7}, {0.5, 0.5})},
                                10000, 2, 8, 4);
  ResourceCatalog catalog = make_catalog({2.42}, 64, 8);
  JobParams params{10.0};
};

TEST_F(EvaluateTest, MatchesIndependentOracle) {
  const SchedulingPlan plan({0, 1, 0});
  const std::vector<int> ks{5, 2, 3};
  const auto p = make_provisioning(build_stages(plan, graph), ks, 12, 0, 2);
  const auto report = evaluate(plan, p, graph, catalog, params);
  const auto oracle = testing::oracle_evaluate(plan, ks, 12, graph, catalog, params.throughput_limit);
  EXPECT_NEAR(report.pipeline_throughput, oracle.throughput, 1e-12 * oracle.throughput);
  EXPECT_NEAR(report.total_exec_time, oracle.exec_time, 1e-12 * oracle.exec_time);
  EXPECT_NEAR(report.monetary_cost, oracle.cost, 1e-12 * oracle.cost);
  EXPECT_EQ(report.feasible, oracle.meets_limit && oracle.within_quota);
  ASSERT_EQ(report.per_stage_throughput.size(), 3u);
  for (double tp : report.per_stage_throughput) EXPECT_LE(report.pipeline_throughput, tp);
}

TEST_F(EvaluateTest, QuotaViolationIsNamed) {
  const SchedulingPlan plan({0, 0, 0});
  const auto p = make_provisioning(build_stages(plan, graph), {100}, 0, -1, 2);
  const auto report = evaluate(plan, p, graph, catalog, params);
  EXPECT_FALSE(report.feasible);
  ASSERT_TRUE(report.violation.has_value());
  EXPECT_NE(report.violation->find("quota"), std::string::npos) << *report.violation;
}

TEST_F(EvaluateTest, ThroughputEqualToLimitIsInfeasible) {
  const SchedulingPlan plan({1, 1, 1});
  const auto p = make_provisioning(build_stages(plan, graph), {1}, 0, -1, 2);
  const auto first = evaluate(plan, p, graph, catalog, params);
  JobParams at_limit{first.pipeline_throughput};
  EXPECT_FALSE(evaluate(plan, p, graph, catalog, at_limit).feasible);
  JobParams below{std::nextafter(first.pipeline_throughput, 0.0)};
  EXPECT_TRUE(evaluate(plan, p, graph, catalog, below).feasible);
}

TEST_F(EvaluateTest, ProvisionerOutputIsFeasible) {
  for (const auto& plan : {SchedulingPlan({0, 0, 0}), SchedulingPlan({0, 1, 0}),
                           SchedulingPlan({1, 1, 1}), SchedulingPlan({1, 0, 1})}) {
    const auto p = optimize_k1(plan, graph, catalog, params);
    EXPECT_TRUE(evaluate(plan, p, graph, catalog, params).feasible) << plan.to_string();
  }
}

TEST_F(EvaluateTest, DoublingOneStageChangesCost) {
  const SchedulingPlan plan({0, 1, 0});
  const auto stages = build_stages(plan, graph);
  const auto base = evaluate(plan, make_provisioning(stages, {4, 2, 3}, 0, -1, 2), graph,
                             catalog, params);
  const auto doubled = evaluate(plan, make_provisioning(stages, {8, 2, 3}, 0, -1, 2), graph,
                                catalog, params);
  EXPECT_NE(base.monetary_cost, doubled.monetary_cost);
}

TEST_F(EvaluateTest, IsPure) {
  const SchedulingPlan plan({0, 1, 1});
  const auto p = optimize_k1(plan, graph, catalog, params);
  const auto a = evaluate(plan, p, graph, catalog, params);
  const auto b = evaluate(plan, p, graph, catalog, params);
  EXPECT_EQ(a.per_stage_et, b.per_stage_et);
  EXPECT_EQ(a.pipeline_throughput, b.pipeline_throughput);
  EXPECT_EQ(a.monetary_cost, b.monetary_cost);
}

TEST(CostModelPropertyTest, TimesAreNonIncreasingInUnits) {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const double alpha = trial % 10 == 0 ? 0.0 : rng.uniform();
    const Stage s = stage_with(rng.uniform(0.01, 10), rng.uniform(0.01, 10), alpha, alpha);
    const double b_o = 1 + rng.below(512);
    double prev_ct = compute_ct(s, 1, b_o);
    double prev_dt = compute_dt(s, 1, b_o);
    for (int k = 2; k <= 64; ++k) {
      const double ct = compute_ct(s, k, b_o);
      const double dt = compute_dt(s, k, b_o);
      if (alpha > 0.0) {
        ASSERT_LT(ct, prev_ct);
        ASSERT_LT(dt, prev_dt);
      } else {
        ASSERT_EQ(ct, prev_ct);
        ASSERT_EQ(dt, prev_dt);
      }
      prev_ct = ct;
      prev_dt = dt;
    }
  }
}

TEST(CostModelPropertyTest, ComputeTimeApproachesSerialFloor) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const double oct = rng.uniform(0.01, 10);
    const double b_o = 1 + rng.below(512);
    // At k = 1e6 the remaining alpha / k term is below 1e-6 of the floor
    // whenever alpha <= 0.5.
    const double alpha = rng.uniform(0.0, 0.5);
    const double floor = (1.0 - alpha) * oct / b_o;
    EXPECT_LE(testing::relative_error(compute_ct(stage_with(oct, 0, alpha, 0), 1e6, b_o), floor, 0),
              1e-6);
    const double steep = rng.uniform(0.5, 0.999);
    const double steep_floor = (1.0 - steep) * oct / b_o;
    EXPECT_LE(testing::relative_error(compute_ct(stage_with(oct, 0, steep, 0), 1e9, b_o),
                                      steep_floor, 0),
              1e-6);
  }
}

TEST(CostModelPropertyTest, PriceScalingScalesCostAndKeepsOrder) {
  Rng rng(13);
  const auto inst = testing::random_instance(rng, 6, 3);
  const double scales[] = {0.5, 3.0, 1000.0};
  for (int pair = 0; pair < 1000; ++pair) {
    const auto a = testing::random_plan(rng, 6, 3);
    const auto b = testing::random_plan(rng, 6, 3);
    const auto pa = optimize_k1(a, inst.graph, inst.catalog, inst.params);
    const auto pb = optimize_k1(b, inst.graph, inst.catalog, inst.params);
    const double ca = evaluate(a, pa, inst.graph, inst.catalog, inst.params).monetary_cost;
    const double cb = evaluate(b, pb, inst.graph, inst.catalog, inst.params).monetary_cost;
    for (double c : scales) {
      auto scaled = inst.catalog;
      for (auto& t : scaled.types) t.price_per_hour *= c;
      const double sa = evaluate(a, pa, inst.graph, scaled, inst.params).monetary_cost;
      const double sb = evaluate(b, pb, inst.graph, scaled, inst.params).monetary_cost;
      ASSERT_NEAR(sa, c * ca, 1e-12 * c * ca);
      ASSERT_EQ(sa < sb, ca < cb) << a.to_string() << " vs " << b.to_string();
    }
  }
}

}  // namespace
}  // namespace hetsched
