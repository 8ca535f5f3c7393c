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

#ifndef HETSCHED_EXPERIMENT_H_
#define HETSCHED_EXPERIMENT_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hetsched/schedulers.h"
#include "hetsched/scoring.h"
#include "hetsched/trainer.h"

// Experiment harness: runs schedulers side by side and writes CSV data.
namespace hetsched {

// bf, greedy, genetic, heuristic, cpu, gpu, random, rl-lstm, rl-rnn
const std::vector<std::string>& known_methods();
bool is_known_method(std::string_view method);

struct MethodSettings {
  BruteForceConfig brute_force;
  GeneticConfig genetic;
  TrainerConfig rl;
  std::uint64_t random_budget = 256;
  bool heuristic_invert = false;
};

struct ExperimentConfig {
  std::filesystem::path model_path;
  std::filesystem::path catalog_path;
  double throughput_limit = 0.0;
  std::vector<std::string> methods;
  MethodSettings settings;
  ProvisionMode provisioning = ProvisionMode::kOptimal;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir;
  // normalized_cost = cost * cost_normalization; written to the CSV header.
  double cost_normalization = 1.0;

  void validate() const;
};

// Relative paths in the file resolve against `base_dir`. Unknown keys are
// errors. Keys: model, catalog, throughput_limit, methods, provisioning,
// seeds, output_dir, cost_normalization, brute_force{enumeration_cap,
// wall_time_cap_seconds, threads}, genetic{population, generations,
// crossover_rate, mutation_rate, tournament_size}, rl{rounds,
// plans_per_round, baseline_rate, learning_rate, hidden_size, max_layers,
// temperature, init_scale, shaping, reward_scale, reward_floor,
// standardize_advantages, entropy_weight, imitation_weight,
// threads},
// random{budget}, heuristic{invert}.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Runs one method with one seed. Methods that need no seed ignore it.
// rl-* methods return the greedy plan of the trained policy.
ScoredPlan run_method(std::string_view method, const PlanScorer& scorer,
                      const MethodSettings& settings, std::uint64_t seed);

struct ComparisonRow {
  std::string method;
  std::uint64_t seed = 0;
  std::string plan;  // "0-1-1"; empty when the method failed
  double cost = 0.0;
  double normalized_cost = 0.0;
  double throughput = 0.0;
  // throughput / limit, capped at 1 for infeasible rows so that the column
  // exceeds 1 exactly when the row is feasible.
  double normalized_throughput = 0.0;
  double scheduling_seconds = 0.0;
  bool feasible = false;
  std::string error;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

ComparisonRow make_row(std::string_view method, std::uint64_t seed, const ScoredPlan& scored,
                       double throughput_limit, double cost_normalization, double seconds);

struct ComparisonTable {
  double cost_normalization = 1.0;
  double throughput_limit = 0.0;
  std::string provisioning;
  std::vector<ComparisonRow> rows;
};

std::string format_comparison(const ComparisonTable& table);
ComparisonTable parse_comparison(std::string_view text);

// Schedules every (method, seed) pair in order. A failing method yields a
// row with `error` set and the run continues. With an output directory the
// table goes to comparison.csv and each plan to plans/<method>-seed<s>.json.
ComparisonTable run_experiment(const ExperimentConfig& config);
ComparisonTable run_experiment(const ExperimentConfig& config, const ModelGraph& graph,
                               const ResourceCatalog& catalog);

// ---------------------------------------------------------------------------
// Scaling study

struct ScalingConfig {
  std::vector<int> layer_counts{8, 12, 16, 20};
  std::vector<int> type_counts{2, 4};
  std::uint64_t seed = 1;
  // The enumeration stops after this long and the total is extrapolated.
  std::chrono::duration<double> wall_time_cap{60.0};
  int threads = 1;
  TrainerConfig rl;
};

struct ScalingRow {
  int layers = 0;
  int types = 0;
  std::uint64_t enumerations = 0;  // T^L
  std::uint64_t bf_evaluated = 0;
  double bf_seconds = 0.0;  // measured, or extrapolated when estimated
  bool bf_estimated = false;
  double rl_seconds = 0.0;
  std::string bf_plan;
  std::string rl_plan;
};

std::vector<ScalingRow> scaling_study(const ScalingConfig& config);
std::string format_scaling(const std::vector<ScalingRow>& rows);

// ---------------------------------------------------------------------------
// Provisioning study

struct ProvisioningRow {
  std::string mode;  // optimal, optimal-no-ps, staratio, stapsratio
  double cost = 0.0;
  bool feasible = false;
  int accelerator_units = 0;
  int cpu_units = 0;
  int ps_cores = 0;
  std::string violation;
};

// Costs of one plan under each provisioning mode. "optimal-no-ps" leaves the
// parameter-server cores out, matching what StaRatio provisions.
std::vector<ProvisioningRow> provisioning_study(const SchedulingPlan& plan,
                                                const ModelGraph& graph,
                                                const ResourceCatalog& catalog,
                                                const JobParams& params,
                                                const std::vector<std::string>& modes);
std::string format_provisioning(const std::vector<ProvisioningRow>& rows);

// ---------------------------------------------------------------------------
// Plot data

// File name -> gnuplot-friendly CSV: cost_by_method.csv and
// throughput_by_method.csv (rows grouped by method in first-seen order, one
// data row per seed), cost_by_model.csv (model x method means). Keys of
// `tables` name the models.
std::map<std::string, std::string> emit_plot_data(
    const std::vector<std::pair<std::string, ComparisonTable>>& tables);

}  // namespace hetsched

#endif  // HETSCHED_EXPERIMENT_H_
