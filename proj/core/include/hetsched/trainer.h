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

#ifndef HETSCHED_TRAINER_H_
#define HETSCHED_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetsched/model.h"
#include "hetsched/policy.h"
#include "hetsched/scoring.h"

namespace hetsched {

enum class RewardShaping { kLinear, kLog };

std::string_view to_string(RewardShaping shaping);
RewardShaping parse_reward_shaping(std::string_view text);

// Learning signal for one cost; see TrainerConfig.
double shaped_signal(double cost, RewardShaping shaping, double scale,
                     std::optional<double> floor);

struct TrainerConfig {
  int rounds = 300;               // I
  int plans_per_round = 32;       // G
  double baseline_rate = 0.1;     // gamma
  double learning_rate = 0.01;    // eta
  int hidden_size = 64;
  int max_layers = 64;
  std::uint64_t seed = 1;
  double temperature = 1.0;
  double init_scale = 0.1;
  PolicyArch arch = PolicyArch::kLstm;

  // Learning signal derived from reward = -cost, with s = reward_scale:
  //   kLinear  max(reward_floor, -cost * s)
  //   kLog     max(reward_floor, -log(cost * s))
  // Both keep the ordering of plans. A scale of 0 picks 1 / (median cost of
  // the first round) so the signal does not depend on price units. The
  // floor keeps penalty costs of infeasible plans from swamping the gradient.
  RewardShaping shaping = RewardShaping::kLog;
  double reward_scale = 0.0;
  std::optional<double> reward_floor = -4.0;

  // Divide each round's advantages R - b by the round's reward standard
  // deviation (at least 0.05), so the step size does not depend on the
  // reward spread.
  bool standardize_advantages = false;
  // Weight of the entropy bonus; 0 is plain REINFORCE.
  double entropy_weight = 0.0;
  // Above 0, each round adds one trace replaying the cheapest plan seen so
  // far, with its advantage (never negative) multiplied by this weight.
  double imitation_weight = 0.0;

  // Concurrent scoring of the sampled plans; results do not depend on it.
  int threads = 1;

  void validate() const;
};

// Cost of a plan; must be pure when threads > 1.
using CostFunction = std::function<double(const SchedulingPlan&)>;

// -cost; infeasible plans carry the scorer's penalty cost.
double reward(const ScoredPlan& scored);

// b' = (1 - gamma) b + gamma * mean(rewards)
double update_baseline(double baseline, double gamma, std::span<const double> rewards);

struct TrainingRound {
  int round = 0;
  double mean_cost = 0.0;
  double best_cost = 0.0;  // best ever, non-increasing
  double baseline = 0.0;   // in learning-signal units, after the update
  double entropy = 0.0;    // mean over the round's traces
};

struct TrainingResult {
  PolicyParams params;
  std::vector<TrainingRound> log;
  std::optional<SchedulingPlan> best_plan;  // cheapest sampled plan
  double best_cost = 0.0;
  double reward_scale = 0.0;  // resolved value
  std::uint64_t distinct_plans = 0;
};

// The loop itself: sample G plans per round, score them, ascend along the baselined score-function estimate, move the baseline.
// Throws NumericError naming the round if the parameters stop being finite.
TrainingResult train(const FeatureMatrix& features, PolicyParams params0,
                     const TrainerConfig& config, const CostFunction& cost);

// Everything a trained policy needs to schedule again.
struct PolicyCheckpoint {
  PolicyParams params;
  FeatureSpec spec;
  FeatureNormalizer normalizer;
  TrainerConfig config;
};

// Builds features for the scorer's instance, initializes parameters from the
// seed and trains against scorer costs.
struct PolicyTraining {
  PolicyCheckpoint checkpoint;
  TrainingResult result;
};
PolicyTraining train_policy(const PlanScorer& scorer, const TrainerConfig& config);

// Greedy plan of a checkpoint on a (possibly different) instance; the
// normalizer is refitted to that graph.
SchedulingPlan schedule_with(const PolicyCheckpoint& checkpoint, const ModelGraph& graph,
                             const ResourceCatalog& catalog);

std::string serialize_checkpoint(const PolicyCheckpoint& checkpoint);
PolicyCheckpoint parse_checkpoint(const std::string& text);
void save_checkpoint(const std::string& path, const PolicyCheckpoint& checkpoint);
PolicyCheckpoint load_checkpoint(const std::string& path);

// CSV with columns round, mean_cost, best_cost, baseline_b, entropy.
std::string format_training_log(const std::vector<TrainingRound>& log);
std::vector<TrainingRound> parse_training_log(const std::string& text);

}  // namespace hetsched

#endif  // HETSCHED_TRAINER_H_
