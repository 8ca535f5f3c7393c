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

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

#include "hetsched/errors.h"

namespace hetsched {

double amdahl_time(double seconds, double fraction, double k, double profile_batch) {
  if (!(k >= 1.0)) throw NumericError("resource count must be >= 1, got " + std::to_string(k));
  if (!(profile_batch >= 1.0)) throw NumericError("profile batch size must be >= 1");
  return seconds / profile_batch * (1.0 - fraction + fraction / k);
}

double stage_throughput(double et, double batch_size) {
  if (!(et > 0.0)) throw NumericError("stage execution time must be > 0");
  return batch_size / et;
}

double pipeline_throughput(std::span<const double> stage_throughputs) {
  if (stage_throughputs.empty()) throw NumericError("pipeline has no stages");
  return *std::min_element(stage_throughputs.begin(), stage_throughputs.end());
}

double total_exec_time(const ModelGraph& graph, double throughput) {
  if (!(throughput > 0.0)) throw NumericError("throughput must be > 0");
  return static_cast<double>(graph.epochs) * static_cast<double>(graph.total_samples) /
         throughput;
}

double monetary_cost(double et, const ProvisioningPlan& provisioning,
                     const ResourceCatalog& catalog) {
  double rate = 0.0;
  for (std::size_t t = 0; t < provisioning.per_type_totals.size(); ++t) {
    rate += catalog.types.at(t).price_per_second() * provisioning.per_type_totals[t];
  }
  return et * rate;
}

CostReport evaluate_stages(const std::vector<Stage>& stages, const ProvisioningPlan& provisioning,
                           const ModelGraph& graph, const ResourceCatalog& catalog,
                           const JobParams& params) {
  CostReport report;
  if (provisioning.per_stage_k.size() != stages.size()) {
    report.violation = "provisioning covers " + std::to_string(provisioning.per_stage_k.size()) +
                       " stages but the plan has " + std::to_string(stages.size());
    return report;
  }
  const double b_o = graph.profile_batch_size;
  const double batch = graph.batch_size;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const int k = provisioning.per_stage_k[i];
    if (k < 1) {
      report.violation = "stage " + std::to_string(i) + " has no resources";
      return report;
    }
    const double ct = compute_ct(stages[i], k, b_o);
    const double dt = compute_dt(stages[i], k, b_o);
    const double et = stage_exec_time(ct, dt);
    report.per_stage_ct.push_back(ct);
    report.per_stage_dt.push_back(dt);
    report.per_stage_et.push_back(et);
    // A stage with no profiled work never limits the pipeline.
    report.per_stage_throughput.push_back(et > 0.0 ? stage_throughput(et, batch)
                                                   : std::numeric_limits<double>::infinity());
  }
  report.pipeline_throughput = pipeline_throughput(report.per_stage_throughput);
  if (std::isinf(report.pipeline_throughput)) {
    report.total_exec_time = 0.0;
  } else {
    report.total_exec_time = total_exec_time(graph, report.pipeline_throughput);
  }
  report.monetary_cost = monetary_cost(report.total_exec_time, provisioning, catalog);

  std::ostringstream why;
  for (std::size_t t = 0; t < provisioning.per_type_totals.size(); ++t) {
    const ResourceType& type = catalog.types.at(t);
    if (provisioning.per_type_totals[t] > type.quota) {
      why << (why.tellp() > 0 ? "; " : "") << "quota of type " << t << " (" << type.name
          << ") exceeded: " << provisioning.per_type_totals[t] << " > " << type.quota;
    }
  }
  if (!(report.pipeline_throughput > params.throughput_limit)) {
    why << (why.tellp() > 0 ? "; " : "") << "throughput " << report.pipeline_throughput
        << " does not exceed limit " << params.throughput_limit;
  }
  report.feasible = why.tellp() == 0;
  if (!report.feasible) report.violation = why.str();
  return report;
}

CostReport evaluate(const SchedulingPlan& plan, const ProvisioningPlan& provisioning,
                    const ModelGraph& graph, const ResourceCatalog& catalog,
                    const JobParams& params) {
  validate_plan(plan, graph, catalog);
  return evaluate_stages(build_stages(plan, graph), provisioning, graph, catalog, params);
}

}  // namespace hetsched
