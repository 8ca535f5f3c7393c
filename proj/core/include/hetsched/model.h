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

#ifndef HETSCHED_MODEL_H_
#define HETSCHED_MODEL_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hetsched {

using TypeId = int;

// Profiling record of one layer. The per-type tables are indexed by resource
// type id and hold the measurements taken on a single unit of that type at
// the profiling batch size.
struct LayerSpec {
  int index = 0;
  std::string kind;
  double input_size = 0.0;   // bytes per sample
  double weight_size = 0.0;  // bytes
  std::vector<double> oct;    // seconds, forward + backward
  std::vector<double> odt;    // seconds, outbound data transfer
  std::vector<double> alpha;  // parallelizable share of oct
  std::vector<double> beta;   // parallelizable share of odt

  // Number of resource types covered by every per-type table.
  std::size_t covered_types() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// A linear chain of layers plus the job-level counts used by the cost model.
struct ModelGraph {
  std::string name;
  std::vector<LayerSpec> layers;
  std::int64_t total_samples = 1;  // M
  int epochs = 1;                  // L in the execution-time formula
  int batch_size = 1;              // B
  int profile_batch_size = 1;      // B_o

  std::size_t size() const { return layers.size(); }

  // Throws ConfigError naming the violated invariant.
  void validate() const;

  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

struct ResourceType {
  TypeId id = 0;
  std::string name;
  double price_per_hour = 0.0;
  std::string unit;
  int quota = 1;
  bool is_cpu = false;

  double price_per_second() const { return price_per_hour / 3600.0; }

  friend bool operator==(const ResourceType&, const ResourceType&) = default;
};

struct ResourceCatalog {
  std::vector<ResourceType> types;
  // Open vocabulary of layer kinds. Empty means "derive from the graph".
  std::vector<std::string> layer_kinds;

  std::size_t size() const { return types.size(); }
  const ResourceType& at(TypeId id) const { return types.at(static_cast<std::size_t>(id)); }

  // Cheapest type flagged is_cpu, lowest id on ties.
  std::optional<TypeId> cheapest_cpu() const;

  void validate() const;

  // Throws ConfigError when some layer lacks a measurement for a type.
  void check_coverage(const ModelGraph& graph) const;

  friend bool operator==(const ResourceCatalog&, const ResourceCatalog&) = default;
};

// Dense encoding of the layer -> type decision matrix.
class SchedulingPlan {
 public:
  SchedulingPlan() = default;
  explicit SchedulingPlan(std::vector<TypeId> assignment) : assignment_(std::move(assignment)) {}

  const std::vector<TypeId>& assignment() const { return assignment_; }
  std::size_t size() const { return assignment_.size(); }
  TypeId operator[](std::size_t layer) const { return assignment_[layer]; }

  // "0-1-1-0" form used in CSV files and on the command line.
  std::string to_string() const;
  // Accepts '-', ',' or whitespace separated ids.
  static SchedulingPlan parse(std::string_view text);

  friend auto operator<=>(const SchedulingPlan&, const SchedulingPlan&) = default;
  friend bool operator==(const SchedulingPlan&, const SchedulingPlan&) = default;

 private:
  std::vector<TypeId> assignment_;
};

// Maximal run of consecutive layers on one resource type.
struct Stage {
  int index = 0;
  TypeId type_id = 0;
  int first_layer = 0;
  int last_layer = 0;
  double oct = 0.0;
  double odt = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  int layer_count() const { return last_layer - first_layer + 1; }
};

struct ProvisioningPlan {
  std::vector<int> per_stage_k;
  int ps_cores = 0;
  // Type charged for the parameter-server cores; -1 when ps_cores == 0.
  TypeId ps_type = -1;
  std::vector<int> per_type_totals;

  friend bool operator==(const ProvisioningPlan&, const ProvisioningPlan&) = default;
};

// Builds a provisioning plan and fills per_type_totals from the stage counts
// and the parameter-server cores.
ProvisioningPlan make_provisioning(const std::vector<Stage>& stages, std::vector<int> per_stage_k,
                                   int ps_cores, TypeId ps_type, std::size_t type_count);

struct CostReport {
  std::vector<double> per_stage_ct;
  std::vector<double> per_stage_dt;
  std::vector<double> per_stage_et;
  std::vector<double> per_stage_throughput;
  double pipeline_throughput = 0.0;
  double total_exec_time = 0.0;
  double monetary_cost = 0.0;
  bool feasible = false;
  std::optional<std::string> violation;
};

// Throws PlanError on a length mismatch or an unknown type id.
void validate_plan(const SchedulingPlan& plan, const ModelGraph& graph,
                   const ResourceCatalog& catalog);

// Splits the layer chain into stages. Stage oct is the sum of member oct,
// stage odt is the odt of the last member (the transfer across the stage
// boundary), alpha and beta are oct- and odt-weighted means.
std::vector<Stage> build_stages(const SchedulingPlan& plan, const ModelGraph& graph);

}  // namespace hetsched

#endif  // HETSCHED_MODEL_H_
