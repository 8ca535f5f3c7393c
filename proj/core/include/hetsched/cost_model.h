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

#ifndef HETSCHED_COST_MODEL_H_
#define HETSCHED_COST_MODEL_H_

#include <span>

#include "hetsched/model.h"

// Analytical pipeline cost model. Stage times follow Amdahl's law on the
// per-sample profile (oct / B_o), a stage runs at max(compute, transfer),
// the pipeline runs at its slowest stage, and money is wall time times the
// summed unit prices.
namespace hetsched {

struct JobParams {
  double throughput_limit = 1.0;  // samples / second, must be exceeded strictly
};

// Amdahl time for `seconds` of profiled work with parallel share `fraction`
// spread over `k` units. Throws NumericError for k < 1.
double amdahl_time(double seconds, double fraction, double k, double profile_batch);

inline double compute_ct(const Stage& stage, double k, double profile_batch) {
  return amdahl_time(stage.oct, stage.alpha, k, profile_batch);
}
inline double compute_dt(const Stage& stage, double k, double profile_batch) {
  return amdahl_time(stage.odt, stage.beta, k, profile_batch);
}

// Compute and transfer overlap.
inline double stage_exec_time(double ct, double dt) { return ct > dt ? ct : dt; }

// batch / et. Throws NumericError for et <= 0.
double stage_throughput(double et, double batch_size);

// Minimum over stages. Throws NumericError on an empty list.
double pipeline_throughput(std::span<const double> stage_throughputs);

// epochs * samples / throughput.
double total_exec_time(const ModelGraph& graph, double throughput);

// et * sum_t price_per_second(t) * N_t.
double monetary_cost(double et, const ProvisioningPlan& provisioning,
                     const ResourceCatalog& catalog);

// Full evaluation of a plan under a provisioning. Never throws for an
// infeasible configuration; the report carries the reason instead.
CostReport evaluate(const SchedulingPlan& plan, const ProvisioningPlan& provisioning,
                    const ModelGraph& graph, const ResourceCatalog& catalog,
                    const JobParams& params);

// Same, for callers that already hold the stage list.
CostReport evaluate_stages(const std::vector<Stage>& stages, const ProvisioningPlan& provisioning,
                           const ModelGraph& graph, const ResourceCatalog& catalog,
                           const JobParams& params);

}  // namespace hetsched

#endif  // HETSCHED_COST_MODEL_H_
