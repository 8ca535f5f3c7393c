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

#ifndef HETSCHED_SCORING_H_
#define HETSCHED_SCORING_H_

#include <optional>
#include <string>
#include <string_view>

#include "hetsched/cost_model.h"
#include "hetsched/model.h"
#include "hetsched/provisioner.h"

namespace hetsched {

enum class ProvisionMode { kOptimal, kStaRatio, kStaPSRatio };

std::string_view to_string(ProvisionMode mode);
ProvisionMode parse_provision_mode(std::string_view text);

// A plan with its provisioning and score. Infeasible plans carry a penalty
// cost that is larger than the cost of any feasible plan on the instance.
struct ScoredPlan {
  SchedulingPlan plan;
  std::optional<ProvisioningPlan> provisioning;
  CostReport report;  // best-effort evaluation when infeasible
  double cost = 0.0;
  bool feasible = false;
  std::string violation;
};

// True when `a` ranks strictly ahead of `b`: lower cost, then the
// lexicographically smaller plan.
bool ranks_before(const ScoredPlan& a, const ScoredPlan& b);

// Provisions and scores plans for one instance. Cheap to copy; holds
// references to the graph and catalog, which must outlive it.
class PlanScorer {
 public:
  PlanScorer(const ModelGraph& graph, const ResourceCatalog& catalog, JobParams params,
             ProvisionMode mode = ProvisionMode::kOptimal, ProvisionerConfig config = {});

  ScoredPlan score(const SchedulingPlan& plan) const;

  // Upper bound on the cost of any feasible plan: the longest admissible
  // run time with every unit of every quota rented.
  double feasible_cost_bound() const { return feasible_cost_bound_; }
  double penalty(double violation) const { return feasible_cost_bound_ * (1.0 + violation); }

  const ModelGraph& graph() const { return *graph_; }
  const ResourceCatalog& catalog() const { return *catalog_; }
  const JobParams& params() const { return params_; }
  ProvisionMode mode() const { return mode_; }
  const ProvisionerConfig& config() const { return config_; }

 private:
  ScoredPlan infeasible(const SchedulingPlan& plan, std::string why) const;

  const ModelGraph* graph_;
  const ResourceCatalog* catalog_;
  JobParams params_;
  ProvisionMode mode_;
  ProvisionerConfig config_;
  double feasible_cost_bound_ = 0.0;
};

}  // namespace hetsched

#endif  // HETSCHED_SCORING_H_
