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

#ifndef HETSCHED_PROVISIONER_H_
#define HETSCHED_PROVISIONER_H_

#include <optional>
#include <vector>

#include "hetsched/cost_model.h"
#include "hetsched/model.h"

namespace hetsched {

struct ProvisionerConfig {
  double ps_cores_per_gpu = 6.0;
  int newton_max_iters = 50;
  double newton_tol = 1e-3;
  double fd_step = 1e-3;
  // Charge parameter-server cores inside the optimal provisioning.
  bool include_ps_cores = true;
  // CPU training cores per accelerator for the static ratio baselines.
  double static_cpu_per_gpu = 6.0;
  // After the continuous search, each stage's smallest `pace_window` counts
  // are also tried as the pace of the whole pipeline.
  int pace_window = 32;

  void validate() const;
};

// Seconds per sample a stage may take for the pipeline to beat the limit.
double stage_time_budget(const ModelGraph& graph, const JobParams& params);

// Lower bound on the anchor stage's unit count: both compute and transfer
// must fit the time budget, so the larger of the two bounds is returned. The
// count must exceed the bound strictly. Throws InfeasibleError when the
// serial part alone exceeds the budget.
double min_k1(const Stage& anchor, const ModelGraph& graph, const JobParams& params);

// Units stage_i needs for its compute time to equal the anchor's at k1.
// nullopt when no count can match. Never below 1.
std::optional<double> derive_ki(double k1, const Stage& anchor, const Stage& stage_i);

// Smallest real count making both compute and transfer of `stage` take at
// most `target` seconds per sample. Generalizes derive_ki to transfer-bound
// stages; nullopt when the serial floor exceeds the target.
std::optional<double> units_for_target(const Stage& stage, double target, double profile_batch);

struct ProvisionResult {
  ProvisioningPlan provisioning;
  std::size_t anchor_stage = 0;
  int k1_lo = 1;  // smallest integer count meeting the limit
  int k1_hi = 1;  // largest integer count whose balanced sizing fits the quotas
  double k1_continuous = 1.0;
  int newton_iterations = 0;
  bool used_golden_fallback = false;
};

// Balanced provisioning that minimizes monetary cost over the anchor count.
// The returned plan always evaluates feasible; otherwise InfeasibleError.
ProvisionResult optimize_k1_detailed(const SchedulingPlan& plan, const ModelGraph& graph,
                                     const ResourceCatalog& catalog, const JobParams& params,
                                     const ProvisionerConfig& config = {});

ProvisioningPlan optimize_k1(const SchedulingPlan& plan, const ModelGraph& graph,
                             const ResourceCatalog& catalog, const JobParams& params,
                             const ProvisionerConfig& config = {});

// Cost of the balanced sizing at a real anchor count, without rounding.
// Infinite when some stage cannot match the anchor. Exposed for oracles.
double relaxed_cost(const std::vector<Stage>& stages, std::size_t anchor, double k1,
                    const ModelGraph& graph, const ResourceCatalog& catalog,
                    const ProvisionerConfig& config);

// Balanced sizing at an integer anchor count with every count rounded up.
// nullopt when some stage cannot match the anchor.
std::optional<ProvisioningPlan> balanced_provisioning(const std::vector<Stage>& stages,
                                                      std::size_t anchor, int k1,
                                                      const ModelGraph& graph,
                                                      const ResourceCatalog& catalog,
                                                      const ProvisionerConfig& config);

// Replaces the parameter-server cores: ceil(ratio * accelerator units) on the
// cheapest CPU type. Throws InfeasibleError if that breaks a quota.
ProvisioningPlan add_ps_cores(const ProvisioningPlan& provisioning,
                              const std::vector<Stage>& stages, const ResourceCatalog& catalog,
                              const ProvisionerConfig& config);

enum class StaticMode { kStaRatio, kStaPSRatio };

// Fixed GPU:CPU (:PS) ratio scaled up from one accelerator per accelerator
// stage until the limit is met.
ProvisioningPlan static_provision(const SchedulingPlan& plan, const ModelGraph& graph,
                                  const ResourceCatalog& catalog, const JobParams& params,
                                  StaticMode mode, const ProvisionerConfig& config = {});

}  // namespace hetsched

#endif  // HETSCHED_PROVISIONER_H_
