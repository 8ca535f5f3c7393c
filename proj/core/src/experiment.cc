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

#include "hetsched/experiment.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hetsched/csv.h"
#include "hetsched/errors.h"
#include "hetsched/io.h"
#include "hetsched/synthetic.h"
#include "json.hpp"

namespace hetsched {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

void reject_unknown_keys(const json& obj, std::string_view where,
                         std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::string plan_file_json(const ComparisonRow& row, const ScoredPlan* scored) {
  json j;
  j["method"] = row.method;
  j["seed"] = row.seed;
  j["plan"] = row.plan;
  j["feasible"] = row.feasible;
  j["cost"] = row.cost;
  if (!row.error.empty()) j["error"] = row.error;
  if (scored && scored->provisioning) {
    const ProvisioningPlan& p = *scored->provisioning;
    j["provisioning"] = {{"per_stage_k", p.per_stage_k},
                         {"ps_cores", p.ps_cores},
                         {"ps_type", p.ps_type},
                         {"per_type_totals", p.per_type_totals}};
  }
  if (scored && !scored->violation.empty()) j["violation"] = scored->violation;
  return j.dump(2) + "\n";
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

std::string comment_value(const csv::Table& table, std::string_view key) {
  for (const std::string& c : table.comments) {
    if (c.starts_with(key) && c.size() > key.size() && c[key.size()] == '=') {
      return c.substr(key.size() + 1);
    }
  }
  throw ConfigError("CSV header lacks '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> kMethods = {"bf",  "greedy", "genetic", "heuristic", "cpu",
                                                    "gpu", "random", "rl-lstm", "rl-rnn"};
  return kMethods;
}

bool is_known_method(std::string_view method) {
  const auto& m = known_methods();
  return std::find(m.begin(), m.end(), method) != m.end();
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("experiment: at least one method is required");
  for (const std::string& m : methods) {
    if (!is_known_method(m)) throw ConfigError("experiment: unknown method '" + m + "'");
  }
  if (seeds.empty()) throw ConfigError("experiment: at least one seed is required");
  if (!(throughput_limit > 0.0)) throw ConfigError("experiment: throughput_limit must be > 0");
  if (!(cost_normalization > 0.0) || !std::isfinite(cost_normalization)) {
    throw ConfigError("experiment: cost_normalization must be finite and > 0");
  }
  settings.genetic.validate();
  settings.rl.validate();
  if (settings.random_budget == 0) throw ConfigError("experiment: random budget must be >= 1");
}

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    reject_unknown_keys(j, "experiment config",
                        {"model", "catalog", "throughput_limit", "methods", "provisioning", "seeds",
                         "output_dir", "cost_normalization", "brute_force", "genetic", "rl",
                         "random", "heuristic"});
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    if (j.contains("model")) cfg.model_path = resolve(j.at("model").get<std::string>());
    if (j.contains("catalog")) cfg.catalog_path = resolve(j.at("catalog").get<std::string>());
    if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
    read_opt(j, "throughput_limit", cfg.throughput_limit);
    read_opt(j, "methods", cfg.methods);
    read_opt(j, "seeds", cfg.seeds);
    read_opt(j, "cost_normalization", cfg.cost_normalization);
    if (j.contains("provisioning")) {
      cfg.provisioning = parse_provision_mode(j.at("provisioning").get<std::string>());
    }
    MethodSettings& s = cfg.settings;
    if (j.contains("brute_force")) {
      const json& b = j.at("brute_force");
      reject_unknown_keys(b, "brute_force", {"enumeration_cap", "wall_time_cap_seconds", "threads"});
      read_opt(b, "enumeration_cap", s.brute_force.enumeration_cap);
      read_opt(b, "threads", s.brute_force.threads);
      if (b.contains("wall_time_cap_seconds")) {
        s.brute_force.wall_time_cap =
            std::chrono::duration<double>(b.at("wall_time_cap_seconds").get<double>());
      }
    }
    if (j.contains("genetic")) {
      const json& g = j.at("genetic");
      reject_unknown_keys(g, "genetic", {"population", "generations", "crossover_rate",
                                         "mutation_rate", "tournament_size"});
      read_opt(g, "population", s.genetic.population);
      read_opt(g, "generations", s.genetic.generations);
      read_opt(g, "crossover_rate", s.genetic.crossover_rate);
      read_opt(g, "mutation_rate", s.genetic.mutation_rate);
      read_opt(g, "tournament_size", s.genetic.tournament_size);
    }
    if (j.contains("rl")) {
      const json& r = j.at("rl");
      reject_unknown_keys(r, "rl", {"rounds", "plans_per_round", "baseline_rate", "learning_rate",
                                    "hidden_size", "max_layers", "temperature", "init_scale",
                                    "shaping", "reward_scale", "reward_floor",
                                    "standardize_advantages", "entropy_weight",
                                    "imitation_weight", "threads"});
      read_opt(r, "rounds", s.rl.rounds);
      read_opt(r, "plans_per_round", s.rl.plans_per_round);
      read_opt(r, "baseline_rate", s.rl.baseline_rate);
      read_opt(r, "learning_rate", s.rl.learning_rate);
      read_opt(r, "hidden_size", s.rl.hidden_size);
      read_opt(r, "max_layers", s.rl.max_layers);
      read_opt(r, "temperature", s.rl.temperature);
      read_opt(r, "init_scale", s.rl.init_scale);
      read_opt(r, "reward_scale", s.rl.reward_scale);
      if (r.contains("shaping")) s.rl.shaping = parse_reward_shaping(r.at("shaping").get<std::string>());
      read_opt(r, "threads", s.rl.threads);
      read_opt(r, "standardize_advantages", s.rl.standardize_advantages);
      read_opt(r, "entropy_weight", s.rl.entropy_weight);
      read_opt(r, "imitation_weight", s.rl.imitation_weight);
      if (r.contains("reward_floor")) {
        s.rl.reward_floor = r.at("reward_floor").is_null()
                                ? std::nullopt
                                : std::optional<double>(r.at("reward_floor").get<double>());
      }
    }
    if (j.contains("random")) {
      reject_unknown_keys(j.at("random"), "random", {"budget"});
      read_opt(j.at("random"), "budget", s.random_budget);
    }
    if (j.contains("heuristic")) {
      reject_unknown_keys(j.at("heuristic"), "heuristic", {"invert"});
      read_opt(j.at("heuristic"), "invert", s.heuristic_invert);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text_file(path), path.parent_path());
}

ScoredPlan run_method(std::string_view method, const PlanScorer& scorer,
                      const MethodSettings& settings, std::uint64_t seed) {
  const ModelGraph& graph = scorer.graph();
  const ResourceCatalog& catalog = scorer.catalog();
  if (method == "bf") {
    BruteForceResult r = brute_force_search(scorer, settings.brute_force);
    if (!r.best) throw Error("brute force stopped before evaluating any plan");
    return std::move(*r.best);
  }
  if (method == "greedy") return greedy(scorer);
  if (method == "genetic") {
    GeneticConfig cfg = settings.genetic;
    cfg.seed = seed;
    return genetic(scorer, cfg);
  }
  if (method == "heuristic") {
    return scorer.score(heuristic_first_layer(graph, catalog, settings.heuristic_invert));
  }
  if (method == "cpu") return scorer.score(homogeneous(graph, catalog, default_cpu_type(graph, catalog)));
  if (method == "gpu") {
    return scorer.score(homogeneous(graph, catalog, default_accelerator_type(graph, catalog)));
  }
  if (method == "random") return random_search(scorer, settings.random_budget, seed, true);
  if (method == "rl-lstm" || method == "rl-rnn") {
    TrainerConfig cfg = settings.rl;
    cfg.seed = seed;
    cfg.arch = method == "rl-lstm" ? PolicyArch::kLstm : PolicyArch::kElman;
    const PolicyTraining trained = train_policy(scorer, cfg);
    return scorer.score(schedule_with(trained.checkpoint, graph, catalog));
  }
  throw ConfigError("unknown method '" + std::string(method) + "'");
}

ComparisonRow make_row(std::string_view method, std::uint64_t seed, const ScoredPlan& scored,
                       double throughput_limit, double cost_normalization, double seconds) {
  ComparisonRow row;
  row.method = method;
  row.seed = seed;
  row.plan = scored.plan.to_string();
  row.cost = scored.cost;
  row.normalized_cost = scored.cost * cost_normalization;
  row.throughput = scored.report.pipeline_throughput;
  row.feasible = scored.feasible;
  row.normalized_throughput = row.throughput / throughput_limit;
  if (!row.feasible) {
    row.normalized_throughput = std::min(row.normalized_throughput, 1.0);
  } else if (!(row.normalized_throughput > 1.0)) {
    // throughput > limit can still round to a ratio of exactly 1.
    row.normalized_throughput = std::nextafter(1.0, 2.0);
  }
  row.scheduling_seconds = seconds;
  if (!scored.feasible) row.error = scored.violation;
  return row;
}

std::string format_comparison(const ComparisonTable& table) {
  csv::Table t;
  t.comments = {"cost_normalization=" + csv::format_double(table.cost_normalization),
                "throughput_limit=" + csv::format_double(table.throughput_limit),
                "provisioning=" + table.provisioning};
  t.header = {"method", "seed", "plan", "cost", "normalized_cost", "throughput",
              "normalized_throughput", "scheduling_seconds", "feasible", "error"};
  for (const ComparisonRow& r : table.rows) {
    t.rows.push_back({r.method, std::to_string(r.seed), r.plan, csv::format_double(r.cost),
                      csv::format_double(r.normalized_cost), csv::format_double(r.throughput),
                      csv::format_double(r.normalized_throughput),
                      csv::format_double(r.scheduling_seconds), bool_text(r.feasible), r.error});
  }
  return csv::format(t);
}

ComparisonTable parse_comparison(std::string_view text) {
  const csv::Table t = csv::parse(text);
  ComparisonTable table;
  table.cost_normalization = csv::parse_double(comment_value(t, "cost_normalization"));
  table.throughput_limit = csv::parse_double(comment_value(t, "throughput_limit"));
  table.provisioning = comment_value(t, "provisioning");
  const std::size_t c_method = t.column("method"), c_seed = t.column("seed"),
                    c_plan = t.column("plan"), c_cost = t.column("cost"),
                    c_ncost = t.column("normalized_cost"), c_tp = t.column("throughput"),
                    c_ntp = t.column("normalized_throughput"),
                    c_sec = t.column("scheduling_seconds"), c_feas = t.column("feasible"),
                    c_err = t.column("error");
  for (const auto& f : t.rows) {
    ComparisonRow r;
    r.method = f[c_method];
    r.seed = static_cast<std::uint64_t>(csv::parse_int(f[c_seed]));
    r.plan = f[c_plan];
    r.cost = csv::parse_double(f[c_cost]);
    r.normalized_cost = csv::parse_double(f[c_ncost]);
    r.throughput = csv::parse_double(f[c_tp]);
    r.normalized_throughput = csv::parse_double(f[c_ntp]);
    r.scheduling_seconds = csv::parse_double(f[c_sec]);
    r.feasible = parse_bool(f[c_feas]);
    r.error = f[c_err];
    table.rows.push_back(std::move(r));
  }
  return table;
}

ComparisonTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ModelGraph graph = load_model_graph(config.model_path);
  const ResourceCatalog catalog = load_catalog(config.catalog_path);
  return run_experiment(config, graph, catalog);
}

ComparisonTable run_experiment(const ExperimentConfig& config, const ModelGraph& graph,
                               const ResourceCatalog& catalog) {
  config.validate();
  catalog.check_coverage(graph);
  const PlanScorer scorer(graph, catalog, JobParams{config.throughput_limit}, config.provisioning);
  ComparisonTable table;
  table.cost_normalization = config.cost_normalization;
  table.throughput_limit = config.throughput_limit;
  table.provisioning = std::string(to_string(config.provisioning));
  std::vector<std::string> plan_files;
  for (const std::string& method : config.methods) {
    for (const std::uint64_t seed : config.seeds) {
      const auto start = Clock::now();
      ComparisonRow row;
      std::optional<ScoredPlan> scored;
      try {
        scored = run_method(method, scorer, config.settings, seed);
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        row = make_row(method, seed, *scored, config.throughput_limit, config.cost_normalization,
                       seconds);
      } catch (const Error& e) {
        row.method = method;
        row.seed = seed;
        row.cost = std::numeric_limits<double>::quiet_NaN();
        row.normalized_cost = row.cost;
        row.scheduling_seconds = std::chrono::duration<double>(Clock::now() - start).count();
        row.error = e.what();
      }
      plan_files.push_back(plan_file_json(row, scored ? &*scored : nullptr));
      table.rows.push_back(std::move(row));
    }
  }
  if (!config.output_dir.empty()) {
    write_text_file(config.output_dir / "comparison.csv", format_comparison(table));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const ComparisonRow& r = table.rows[i];
      write_text_file(config.output_dir / "plans" /
                          (r.method + "-seed" + std::to_string(r.seed) + ".json"),
                      plan_files[i]);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Scaling study

std::vector<ScalingRow> scaling_study(const ScalingConfig& config) {
  config.rl.validate();
  std::vector<ScalingRow> rows;
  for (const int types : config.type_counts) {
    for (const int layers : config.layer_counts) {
      const Instance inst = make_synthetic_instance(layers, types, config.seed);
      const PlanScorer scorer(inst.graph, inst.catalog, inst.params);
      ScalingRow row;
      row.layers = layers;
      row.types = types;

      BruteForceConfig bf;
      bf.enumeration_cap = std::numeric_limits<std::uint64_t>::max();
      bf.wall_time_cap = config.wall_time_cap;
      bf.threads = config.threads;
      const BruteForceResult r = brute_force_search(scorer, bf);
      row.enumerations = r.total_plans;
      row.bf_evaluated = r.evaluated;
      row.bf_estimated = !r.completed;
      row.bf_seconds = r.estimated_seconds;
      if (r.best && r.completed) row.bf_plan = r.best->plan.to_string();

      TrainerConfig rl = config.rl;
      rl.seed = config.seed;
      const auto start = Clock::now();
      const PolicyTraining trained = train_policy(scorer, rl);
      const SchedulingPlan plan = schedule_with(trained.checkpoint, inst.graph, inst.catalog);
      row.rl_seconds = std::chrono::duration<double>(Clock::now() - start).count();
      row.rl_plan = plan.to_string();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_scaling(const std::vector<ScalingRow>& rows) {
  csv::Table t;
  t.comments = {"bf_seconds is extrapolated from the per-plan mean when bf_estimated is true"};
  t.header = {"layers",     "types",        "enumerations", "bf_evaluated", "bf_seconds",
              "bf_estimated", "rl_seconds", "bf_plan",      "rl_plan"};
  for (const ScalingRow& r : rows) {
    t.rows.push_back({std::to_string(r.layers), std::to_string(r.types),
                      std::to_string(r.enumerations), std::to_string(r.bf_evaluated),
                      csv::format_double(r.bf_seconds), bool_text(r.bf_estimated),
                      csv::format_double(r.rl_seconds), r.bf_plan, r.rl_plan});
  }
  return csv::format(t);
}

// ---------------------------------------------------------------------------
// Provisioning study

std::vector<ProvisioningRow> provisioning_study(const SchedulingPlan& plan,
                                                const ModelGraph& graph,
                                                const ResourceCatalog& catalog,
                                                const JobParams& params,
                                                const std::vector<std::string>& modes) {
  validate_plan(plan, graph, catalog);
  std::vector<ProvisioningRow> rows;
  for (const std::string& mode : modes) {
    ProvisionerConfig pc;
    ProvisionMode pm;
    if (mode == "optimal-no-ps") {
      pm = ProvisionMode::kOptimal;
      pc.include_ps_cores = false;
    } else {
      pm = parse_provision_mode(mode);
    }
    const ScoredPlan scored = PlanScorer(graph, catalog, params, pm, pc).score(plan);
    ProvisioningRow row;
    row.mode = mode;
    row.cost = scored.cost;
    row.feasible = scored.feasible;
    row.violation = scored.violation;
    if (scored.provisioning) {
      const ProvisioningPlan& p = *scored.provisioning;
      row.ps_cores = p.ps_cores;
      for (std::size_t t = 0; t < p.per_type_totals.size(); ++t) {
        (catalog.types[t].is_cpu ? row.cpu_units : row.accelerator_units) += p.per_type_totals[t];
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_provisioning(const std::vector<ProvisioningRow>& rows) {
  csv::Table t;
  t.header = {"mode", "cost", "feasible", "accelerator_units", "cpu_units", "ps_cores", "violation"};
  for (const ProvisioningRow& r : rows) {
    t.rows.push_back({r.mode, csv::format_double(r.cost), bool_text(r.feasible),
                      std::to_string(r.accelerator_units), std::to_string(r.cpu_units),
                      std::to_string(r.ps_cores), r.violation});
  }
  return csv::format(t);
}

// ---------------------------------------------------------------------------
// Plot data

std::map<std::string, std::string> emit_plot_data(
    const std::vector<std::pair<std::string, ComparisonTable>>& tables) {
  csv::Table cost, throughput, by_model;
  cost.header = {"model", "method", "seed", "cost", "normalized_cost"};
  throughput.header = {"model", "method", "seed", "normalized_throughput", "feasible"};
  by_model.header = {"model", "method", "mean_cost", "mean_normalized_cost", "runs"};
  for (const auto& [model, table] : tables) {
    std::vector<std::string> order;
    for (const ComparisonRow& r : table.rows) {
      if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
    }
    for (const std::string& method : order) {
      double sum = 0.0, nsum = 0.0;
      int runs = 0;
      for (const ComparisonRow& r : table.rows) {
        if (r.method != method) continue;
        cost.rows.push_back({model, r.method, std::to_string(r.seed), csv::format_double(r.cost),
                             csv::format_double(r.normalized_cost)});
        throughput.rows.push_back({model, r.method, std::to_string(r.seed),
                                   csv::format_double(r.normalized_throughput),
                                   bool_text(r.feasible)});
        if (!r.plan.empty()) {
          sum += r.cost;
          nsum += r.normalized_cost;
          ++runs;
        }
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      by_model.rows.push_back({model, method, csv::format_double(runs ? sum / runs : nan),
                               csv::format_double(runs ? nsum / runs : nan),
                               std::to_string(runs)});
    }
  }
  return {{"cost_by_method.csv", csv::format(cost)},
          {"throughput_by_method.csv", csv::format(throughput)},
          {"cost_by_model.csv", csv::format(by_model)}};
}

}  // namespace hetsched
