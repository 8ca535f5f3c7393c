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

#include "hetsched/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "hetsched/csv.h"
#include "hetsched/errors.h"
#include "hetsched/io.h"
#include "json.hpp"

namespace hetsched {
namespace {

using json = nlohmann::json;

constexpr const char* kCheckpointFormat = "hetsched-policy";
constexpr int kCheckpointVersion = 1;

// Scores the distinct unseen plans of a round, optionally in parallel, and
// inserts them in first-seen order so the cache contents are deterministic.
void score_round(const std::vector<EpisodeTrace>& traces, std::map<SchedulingPlan, double>& cache,
                 const CostFunction& cost, int threads) {
  std::vector<const SchedulingPlan*> fresh;
  for (const EpisodeTrace& t : traces) {
    if (cache.contains(t.plan)) continue;
    if (std::none_of(fresh.begin(), fresh.end(), [&](const SchedulingPlan* p) { return *p == t.plan; })) {
      fresh.push_back(&t.plan);
    }
  }
  std::vector<double> costs(fresh.size());
  const int workers = std::min<int>(std::max(1, threads), static_cast<int>(fresh.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < fresh.size(); ++i) costs[i] = cost(*fresh[i]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < fresh.size();
             i += static_cast<std::size_t>(workers)) {
          costs[i] = cost(*fresh[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < fresh.size(); ++i) cache.emplace(*fresh[i], costs[i]);
}

double resolve_scale(std::vector<double> costs) {
  // Median, so a few penalty costs do not set the scale.
  std::erase_if(costs, [](double c) { return !(std::isfinite(c) && c > 0.0); });
  if (costs.empty()) return 1.0;
  const auto mid = costs.begin() + static_cast<std::ptrdiff_t>(costs.size() / 2);
  std::nth_element(costs.begin(), mid, costs.end());
  return 1.0 / *mid;
}

// A converged round has almost no spread; dividing R - b by it would blow up
// the step, so the divisor never drops below this (about 5% in cost).
constexpr double kMinSignalSpread = 0.05;

}  // namespace

void TrainerConfig::validate() const {
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (plans_per_round < 1) throw ConfigError("plans_per_round must be >= 1");
  if (!(baseline_rate > 0.0 && baseline_rate <= 1.0)) {
    throw ConfigError("baseline_rate must lie in (0, 1]");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (max_layers < 1) throw ConfigError("max_layers must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
  if (!(reward_scale >= 0.0) || !std::isfinite(reward_scale)) {
    throw ConfigError("reward_scale must be finite and >= 0");
  }
  if (reward_floor && !std::isfinite(*reward_floor)) throw ConfigError("reward_floor must be finite");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(entropy_weight >= 0.0) || !std::isfinite(entropy_weight)) {
    throw ConfigError("entropy_weight must be finite and >= 0");
  }
  if (!(imitation_weight >= 0.0) || !std::isfinite(imitation_weight)) {
    throw ConfigError("imitation_weight must be finite and >= 0");
  }
}

double reward(const ScoredPlan& scored) { return -scored.cost; }

std::string_view to_string(RewardShaping shaping) {
  return shaping == RewardShaping::kLinear ? "linear" : "log";
}

RewardShaping parse_reward_shaping(std::string_view text) {
  if (text == "linear") return RewardShaping::kLinear;
  if (text == "log") return RewardShaping::kLog;
  throw ConfigError("unknown reward shaping '" + std::string(text) + "'");
}

double shaped_signal(double cost, RewardShaping shaping, double scale,
                     std::optional<double> floor) {
  double r = shaping == RewardShaping::kLinear ? -cost * scale : -std::log(cost * scale);
  if (std::isnan(r)) r = -std::numeric_limits<double>::infinity();
  if (floor) r = std::max(*floor, r);
  return r;
}

double update_baseline(double baseline, double gamma, std::span<const double> rewards) {
  if (rewards.empty()) return baseline;
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return (1.0 - gamma) * baseline + gamma / static_cast<double>(rewards.size()) * sum;
}

TrainingResult train(const FeatureMatrix& features, PolicyParams params0,
                     const TrainerConfig& config, const CostFunction& cost) {
  config.validate();
  TrainingResult result;
  result.params = std::move(params0);
  result.reward_scale = config.reward_scale;
  result.best_cost = std::numeric_limits<double>::infinity();
  Rng rng(config.seed);
  std::map<SchedulingPlan, double> cache;
  double baseline = 0.0;
  const auto G = static_cast<std::size_t>(config.plans_per_round);

  for (int round = 0; round < config.rounds; ++round) {
    std::vector<EpisodeTrace> traces(G);
    std::vector<PolicyForward> forwards(G);
    for (std::size_t g = 0; g < G; ++g) {
      traces[g] = sample_plan(result.params, features, rng, config.temperature, forwards[g]);
    }
    score_round(traces, cache, cost, config.threads);

    std::vector<double> costs(G);
    for (std::size_t g = 0; g < G; ++g) costs[g] = cache.at(traces[g].plan);
    if (result.reward_scale == 0.0) result.reward_scale = resolve_scale(costs);

    TrainingRound entry;
    entry.round = round;
    std::vector<double> signal(G);
    for (std::size_t g = 0; g < G; ++g) {
      const double c = costs[g];
      entry.mean_cost += c / static_cast<double>(G);
      entry.entropy += traces[g].entropy / static_cast<double>(G);
      if (!result.best_plan || c < result.best_cost ||
          (c == result.best_cost && traces[g].plan < *result.best_plan)) {
        result.best_cost = c;
        result.best_plan = traces[g].plan;
      }
      const double r = shaped_signal(c, config.shaping, result.reward_scale, config.reward_floor);
      traces[g].reward = r;
      signal[g] = r;
    }

    double sd = 1.0;
    if (config.standardize_advantages && G > 1) {
      double mean = 0.0, var = 0.0;
      for (double r : signal) mean += r / static_cast<double>(G);
      for (double r : signal) var += (r - mean) * (r - mean) / static_cast<double>(G);
      sd = std::max(std::sqrt(var), kMinSignalSpread);
      for (std::size_t g = 0; g < G; ++g) {
        traces[g].reward = baseline + (traces[g].reward - baseline) / sd;
      }
    }
    if (config.imitation_weight > 0.0) {
      // One extra trace replays the cheapest plan seen so far.
      double r = shaped_signal(result.best_cost, config.shaping, result.reward_scale,
                               config.reward_floor);
      if (config.standardize_advantages && G > 1) r = baseline + (r - baseline) / sd;
      EpisodeTrace replay;
      replay.plan = *result.best_plan;
      replay.reward = baseline + config.imitation_weight * std::max(0.0, r - baseline);
      forwards.push_back(
          policy_forward(result.params, features, replay.plan, config.temperature));
      traces.push_back(std::move(replay));
    }
    const auto grad =
        policy_gradient(result.params, forwards, traces, baseline, config.entropy_weight);
    auto theta = result.params.values();
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += config.learning_rate * grad[i];
    if (!result.params.all_finite()) {
      throw NumericError("policy parameters became non-finite in round " + std::to_string(round));
    }
    baseline = update_baseline(baseline, config.baseline_rate, signal);

    entry.best_cost = result.best_cost;
    entry.baseline = baseline;
    result.log.push_back(entry);
  }
  result.distinct_plans = cache.size();
  return result;
}

PolicyTraining train_policy(const PlanScorer& scorer, const TrainerConfig& config) {
  config.validate();
  PolicyTraining out;
  PolicyCheckpoint& cp = out.checkpoint;
  cp.config = config;
  cp.spec = make_feature_spec(scorer.graph(), scorer.catalog(), config.max_layers);
  cp.normalizer = fit_normalizer(scorer.graph(), scorer.catalog());
  const FeatureMatrix features =
      to_matrix(encode_features(scorer.graph(), scorer.catalog(), cp.spec, cp.normalizer));
  // Initialization draws from its own stream so the sampling stream is the
  // same for every architecture.
  Rng init_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  PolicyParams params0 =
      PolicyParams::uniform(config.arch, cp.spec.dim(), config.hidden_size,
                            static_cast<int>(scorer.catalog().size()), config.init_scale, init_rng);
  out.result = train(features, std::move(params0), config,
                     [&scorer](const SchedulingPlan& plan) { return scorer.score(plan).cost; });
  cp.params = out.result.params;
  return out;
}

SchedulingPlan schedule_with(const PolicyCheckpoint& checkpoint, const ModelGraph& graph,
                             const ResourceCatalog& catalog) {
  if (static_cast<int>(catalog.size()) != checkpoint.params.num_types()) {
    throw ConfigError("policy was trained for " + std::to_string(checkpoint.params.num_types()) +
                      " resource types, catalog has " + std::to_string(catalog.size()));
  }
  const FeatureNormalizer norm = fit_normalizer(graph, catalog);
  return greedy_plan(checkpoint.params,
                     to_matrix(encode_features(graph, catalog, checkpoint.spec, norm)));
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string serialize_checkpoint(const PolicyCheckpoint& cp) {
  const TrainerConfig& c = cp.config;
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["arch"] = std::string(to_string(cp.params.arch()));
  j["input_dim"] = cp.params.input_dim();
  j["hidden_size"] = cp.params.hidden_size();
  j["num_types"] = cp.params.num_types();
  j["values"] = std::vector<double>(cp.params.values().begin(), cp.params.values().end());
  j["feature_spec"] = {{"max_layers", cp.spec.max_layers}, {"kinds", cp.spec.kinds}};
  j["normalizer"] = {{"mean", cp.normalizer.mean}, {"stddev", cp.normalizer.stddev}};
  j["config"] = {{"rounds", c.rounds},
                 {"plans_per_round", c.plans_per_round},
                 {"baseline_rate", c.baseline_rate},
                 {"learning_rate", c.learning_rate},
                 {"hidden_size", c.hidden_size},
                 {"max_layers", c.max_layers},
                 {"seed", c.seed},
                 {"temperature", c.temperature},
                 {"init_scale", c.init_scale},
                 {"arch", std::string(to_string(c.arch))},
                 {"shaping", std::string(to_string(c.shaping))},
                 {"reward_scale", c.reward_scale},
                 {"reward_floor", c.reward_floor ? json(*c.reward_floor) : json(nullptr)},
                 {"standardize_advantages", c.standardize_advantages},
                 {"entropy_weight", c.entropy_weight},
                 {"imitation_weight", c.imitation_weight},
                 {"threads", c.threads}};
  return j.dump(1) + "\n";
}

PolicyCheckpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw ConfigError("checkpoint: unexpected format tag");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    }
    PolicyCheckpoint cp;
    cp.params = PolicyParams(parse_policy_arch(j.at("arch").get<std::string>()),
                             j.at("input_dim").get<int>(), j.at("hidden_size").get<int>(),
                             j.at("num_types").get<int>());
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != cp.params.size()) {
      throw ConfigError("checkpoint: expected " + std::to_string(cp.params.size()) +
                        " parameters, found " + std::to_string(values.size()));
    }
    std::copy(values.begin(), values.end(), cp.params.values().begin());
    if (!cp.params.all_finite()) throw ConfigError("checkpoint: non-finite parameter");
    cp.spec.max_layers = j.at("feature_spec").at("max_layers").get<int>();
    cp.spec.kinds = j.at("feature_spec").at("kinds").get<std::vector<std::string>>();
    if (cp.spec.dim() != cp.params.input_dim()) {
      throw ConfigError("checkpoint: feature width does not match the parameters");
    }
    cp.normalizer.mean = j.at("normalizer").at("mean").get<std::array<double, 3>>();
    cp.normalizer.stddev = j.at("normalizer").at("stddev").get<std::array<double, 3>>();
    const json& c = j.at("config");
    TrainerConfig& tc = cp.config;
    tc.rounds = c.at("rounds").get<int>();
    tc.plans_per_round = c.at("plans_per_round").get<int>();
    tc.baseline_rate = c.at("baseline_rate").get<double>();
    tc.learning_rate = c.at("learning_rate").get<double>();
    tc.hidden_size = c.at("hidden_size").get<int>();
    tc.max_layers = c.at("max_layers").get<int>();
    tc.seed = c.at("seed").get<std::uint64_t>();
    tc.temperature = c.at("temperature").get<double>();
    tc.init_scale = c.at("init_scale").get<double>();
    tc.arch = parse_policy_arch(c.at("arch").get<std::string>());
    tc.shaping = parse_reward_shaping(c.at("shaping").get<std::string>());
    tc.reward_scale = c.at("reward_scale").get<double>();
    tc.reward_floor = c.at("reward_floor").is_null()
                          ? std::nullopt
                          : std::optional<double>(c.at("reward_floor").get<double>());
    tc.standardize_advantages = c.at("standardize_advantages").get<bool>();
    tc.entropy_weight = c.at("entropy_weight").get<double>();
    tc.imitation_weight = c.at("imitation_weight").get<double>();
    tc.threads = c.at("threads").get<int>();
    tc.validate();
    return cp;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const PolicyCheckpoint& checkpoint) {
  write_text_file(path, serialize_checkpoint(checkpoint));
}

PolicyCheckpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Training log

std::string format_training_log(const std::vector<TrainingRound>& log) {
  csv::Table table;
  table.header = {"round", "mean_cost", "best_cost", "baseline_b", "entropy"};
  for (const TrainingRound& r : log) {
    table.rows.push_back({std::to_string(r.round), csv::format_double(r.mean_cost),
                          csv::format_double(r.best_cost), csv::format_double(r.baseline),
                          csv::format_double(r.entropy)});
  }
  return csv::format(table);
}

std::vector<TrainingRound> parse_training_log(const std::string& text) {
  const csv::Table table = csv::parse(text);
  const std::size_t c_round = table.column("round");
  const std::size_t c_mean = table.column("mean_cost");
  const std::size_t c_best = table.column("best_cost");
  const std::size_t c_b = table.column("baseline_b");
  const std::size_t c_ent = table.column("entropy");
  std::vector<TrainingRound> log;
  for (const auto& row : table.rows) {
    TrainingRound r;
    r.round = static_cast<int>(csv::parse_int(row[c_round]));
    r.mean_cost = csv::parse_double(row[c_mean]);
    r.best_cost = csv::parse_double(row[c_best]);
    r.baseline = csv::parse_double(row[c_b]);
    r.entropy = csv::parse_double(row[c_ent]);
    log.push_back(r);
  }
  return log;
}

}  // namespace hetsched
