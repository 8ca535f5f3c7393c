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

#include "hetsched/scoring.h"

#include <algorithm>
#include <cmath>

#include "hetsched/errors.h"

namespace hetsched {

std::string_view to_string(ProvisionMode mode) {
  switch (mode) {
    case ProvisionMode::kOptimal:
      return "optimal";
    case ProvisionMode::kStaRatio:
      return "staratio";
    case ProvisionMode::kStaPSRatio:
      return "stapsratio";
  }
  return "optimal";
}

ProvisionMode parse_provision_mode(std::string_view text) {
  if (text == "optimal") return ProvisionMode::kOptimal;
  if (text == "staratio") return ProvisionMode::kStaRatio;
  if (text == "stapsratio") return ProvisionMode::kStaPSRatio;
  throw ConfigError("unknown provisioning mode '" + std::string(text) +
                    "' (expected optimal|staratio|stapsratio)");
}

bool ranks_before(const ScoredPlan& a, const ScoredPlan& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.plan < b.plan;
}

PlanScorer::PlanScorer(const ModelGraph& graph, const ResourceCatalog& catalog, JobParams params,
                       ProvisionMode mode, ProvisionerConfig config)
    : graph_(&graph), catalog_(&catalog), params_(params), mode_(mode), config_(config) {
  if (!(params_.throughput_limit > 0.0)) throw ConfigError("throughput limit must be > 0");
  config_.validate();
  double full_rate = 0.0;
  for (const ResourceType& type : catalog.types) full_rate += type.price_per_second() * type.quota;
  const double longest_run = static_cast<double>(graph.epochs) *
                             static_cast<double>(graph.total_samples) / params_.throughput_limit;
  feasible_cost_bound_ = longest_run * full_rate;
}

ScoredPlan PlanScorer::score(const SchedulingPlan& plan) const {
  validate_plan(plan, *graph_, *catalog_);
  try {
    ProvisioningPlan provisioning;
    switch (mode_) {
      case ProvisionMode::kOptimal:
        provisioning = optimize_k1(plan, *graph_, *catalog_, params_, config_);
        break;
      case ProvisionMode::kStaRatio:
        provisioning =
            static_provision(plan, *graph_, *catalog_, params_, StaticMode::kStaRatio, config_);
        break;
      case ProvisionMode::kStaPSRatio:
        provisioning =
            static_provision(plan, *graph_, *catalog_, params_, StaticMode::kStaPSRatio, config_);
        break;
    }
    ScoredPlan out;
    out.plan = plan;
    out.report = evaluate(plan, provisioning, *graph_, *catalog_, params_);
    out.provisioning = std::move(provisioning);
    out.feasible = out.report.feasible;
    out.cost = out.report.monetary_cost;
    if (!out.feasible) return infeasible(plan, out.report.violation.value_or("infeasible"));
    return out;
  } catch (const InfeasibleError& e) {
    return infeasible(plan, e.what());
  }
}

ScoredPlan PlanScorer::infeasible(const SchedulingPlan& plan, std::string why) const {
  // Best effort: split every quota evenly over the stages of that type.
  const std::vector<Stage> stages = build_stages(plan, *graph_);
  std::vector<int> stage_count(catalog_->size(), 0);
  for (const Stage& s : stages) ++stage_count[static_cast<std::size_t>(s.type_id)];
  std::vector<int> ks;
  for (const Stage& s : stages) {
    const auto t = static_cast<std::size_t>(s.type_id);
    ks.push_back(std::max(1, catalog_->types[t].quota / stage_count[t]));
  }
  ProvisioningPlan provisioning = make_provisioning(stages, std::move(ks), 0, -1, catalog_->size());

  ScoredPlan out;
  out.plan = plan;
  out.report = evaluate_stages(stages, provisioning, *graph_, *catalog_, params_);

  if (mode_ == ProvisionMode::kOptimal && out.report.feasible) {
    // The balanced search found nothing, but the whole quota does meet the
    // limit; charge it honestly instead of penalizing a feasible plan.
    try {
      if (config_.include_ps_cores) {
        provisioning = add_ps_cores(provisioning, stages, *catalog_, config_);
        out.report = evaluate_stages(stages, provisioning, *graph_, *catalog_, params_);
      }
      if (out.report.feasible) {
        out.provisioning = std::move(provisioning);
        out.feasible = true;
        out.cost = out.report.monetary_cost;
        return out;
      }
    } catch (const InfeasibleError& e) {
      why = e.what();
    }
  }

  double violation = 0.0;
  if (out.report.pipeline_throughput < params_.throughput_limit) {
    violation += (params_.throughput_limit - out.report.pipeline_throughput) /
                 params_.throughput_limit;
  }
  for (std::size_t t = 0; t < provisioning.per_type_totals.size(); ++t) {
    const int quota = catalog_->types[t].quota;
    if (provisioning.per_type_totals[t] > quota) {
      violation += static_cast<double>(provisioning.per_type_totals[t] - quota) / quota;
    }
  }
  out.feasible = false;
  out.violation = std::move(why);
  out.cost = penalty(violation);
  return out;
}

}  // namespace hetsched
