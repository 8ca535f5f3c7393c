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

// hetsched: schedule model layers onto heterogeneous resource types.
//
// Exit codes: 0 success, 2 infeasible, 3 configuration error, 4 numeric
// failure, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetsched/cost_model.h"
#include "hetsched/csv.h"
#include "hetsched/errors.h"
#include "hetsched/experiment.h"
#include "hetsched/io.h"
#include "hetsched/provisioner.h"
#include "hetsched/schedulers.h"
#include "hetsched/scoring.h"
#include "hetsched/trainer.h"

namespace fs = std::filesystem;
using namespace hetsched;

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

struct Globals {
  std::string model;
  std::string catalog;
  double throughput_limit = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
};

// Global flags fill in whatever the experiment file leaves open and win
// where both are given.
ExperimentConfig resolve(const Globals& g) {
  ExperimentConfig cfg;
  if (!g.config.empty()) cfg = load_experiment_config(g.config);
  if (!g.model.empty()) cfg.model_path = g.model;
  if (!g.catalog.empty()) cfg.catalog_path = g.catalog;
  if (g.throughput_limit > 0.0) cfg.throughput_limit = g.throughput_limit;
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (cfg.model_path.empty()) throw ConfigError("--model is required");
  if (cfg.catalog_path.empty()) throw ConfigError("--catalog is required");
  if (!(cfg.throughput_limit > 0.0)) throw ConfigError("--throughput-limit must be > 0");
  return cfg;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void print_report(const SchedulingPlan& plan, const ProvisioningPlan& prov,
                  const CostReport& report) {
  std::printf("plan              %s\n", plan.to_string().c_str());
  std::printf("per_stage_k       %s\n", join_ints(prov.per_stage_k).c_str());
  std::printf("ps_cores          %d\n", prov.ps_cores);
  std::printf("per_type_totals   %s\n", join_ints(prov.per_type_totals).c_str());
  std::printf("throughput        %.6g samples/s\n", report.pipeline_throughput);
  std::printf("total_exec_time   %.6g s\n", report.total_exec_time);
  std::printf("monetary_cost     %.6f\n", report.monetary_cost);
  std::printf("feasible          %s\n", report.feasible ? "yes" : "no");
  if (report.violation) std::printf("violation         %s\n", report.violation->c_str());
}

void print_scored(const ScoredPlan& s) {
  std::printf("plan              %s\n", s.plan.to_string().c_str());
  if (s.provisioning) {
    std::printf("per_stage_k       %s\n", join_ints(s.provisioning->per_stage_k).c_str());
    std::printf("ps_cores          %d\n", s.provisioning->ps_cores);
  }
  std::printf("throughput        %.6g samples/s\n", s.report.pipeline_throughput);
  std::printf("cost              %.6f\n", s.cost);
  std::printf("feasible          %s\n", s.feasible ? "yes" : "no");
  if (!s.violation.empty()) std::printf("violation         %s\n", s.violation.c_str());
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<int>(csv::parse_int(item)));
  }
  return out;
}

void print_table(const ComparisonTable& t) {
  std::printf("%-10s %6s %14s %10s %10s  %s\n", "method", "seed", "cost", "norm_tput", "seconds",
              "plan");
  for (const ComparisonRow& r : t.rows) {
    std::printf("%-10s %6llu %14.6f %10.4f %10.3f  %s%s%s\n", r.method.c_str(),
                static_cast<unsigned long long>(r.seed), r.cost, r.normalized_throughput,
                r.scheduling_seconds, r.plan.c_str(), r.error.empty() ? "" : "  ! ",
                r.error.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-driven layer scheduling on heterogeneous resources"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--model", g.model, "model graph JSON");
  app.add_option("--catalog", g.catalog, "resource catalog JSON");
  app.add_option("--throughput-limit", g.throughput_limit, "samples/s the pipeline must exceed");
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--out", g.out, "output file or directory");
  app.add_option("--config", g.config, "experiment JSON");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate a plan with given counts");
  std::string plan_text;
  std::string counts_text;
  int ps_cores = 0;
  evaluate_cmd->add_option("--plan", plan_text, "per-layer type ids, e.g. 0-1-1")->required();
  evaluate_cmd->add_option("--counts", counts_text, "per-stage unit counts, e.g. 4,2")->required();
  evaluate_cmd->add_option("--ps-cores", ps_cores, "parameter-server cores on the cheapest CPU");

  // provision
  auto* provision_cmd = app.add_subcommand("provision", "size the stages of a plan");
  std::string mode_text = "optimal";
  bool no_ps = false;
  provision_cmd->add_option("--plan", plan_text, "per-layer type ids")->required();
  provision_cmd->add_option("--mode", mode_text, "optimal | staratio | stapsratio");
  provision_cmd->add_flag("--no-ps", no_ps, "leave parameter-server cores out (optimal mode)");

  // schedule
  auto* schedule_cmd = app.add_subcommand("schedule", "run one scheduling method");
  std::string method;
  bool invert = false;
  schedule_cmd->add_option("method", method, "bf|greedy|genetic|heuristic|cpu|gpu|random|rl-lstm|rl-rnn")
      ->required();
  schedule_cmd->add_option("--mode", mode_text, "provisioning mode");
  schedule_cmd->add_flag("--invert", invert, "heuristic: first layer on the accelerator");

  // train-policy
  auto* train_cmd = app.add_subcommand("train-policy", "train a scheduling policy");
  std::string arch_text = "lstm";
  int rounds = -1;
  int plans_per_round = -1;
  double learning_rate = -1.0;
  train_cmd->add_option("--arch", arch_text, "lstm | elman");
  train_cmd->add_option("--rounds", rounds, "training rounds");
  train_cmd->add_option("--plans-per-round", plans_per_round, "sampled plans per round");
  train_cmd->add_option("--learning-rate", learning_rate, "step size");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "run every configured method and seed");
  std::string methods_text;
  compare_cmd->add_option("--methods", methods_text, "comma separated, overrides the config");

  // scaling-study
  auto* scaling_cmd = app.add_subcommand("scaling-study", "brute force vs policy timing");
  std::string layers_text = "8,12,16,20";
  std::string types_text = "2,4";
  double cap_seconds = 60.0;
  int threads = 1;
  scaling_cmd->add_option("--layers", layers_text, "layer counts");
  scaling_cmd->add_option("--types", types_text, "type counts");
  scaling_cmd->add_option("--cap", cap_seconds, "brute-force wall-time cap in seconds");
  scaling_cmd->add_option("--threads", threads, "brute-force worker threads");
  scaling_cmd->add_option("--rounds", rounds, "policy training rounds");

  // provisioning-study
  auto* prov_study_cmd = app.add_subcommand("provisioning-study", "optimal vs static provisioning");
  prov_study_cmd->add_option("--plan", plan_text, "plan to provision; default: trained policy");
  prov_study_cmd->add_option("--rounds", rounds, "policy training rounds when --plan is absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*evaluate_cmd) {
      const ExperimentConfig cfg = resolve(g);
      const ModelGraph graph = load_model_graph(cfg.model_path);
      const ResourceCatalog catalog = load_catalog(cfg.catalog_path);
      const SchedulingPlan plan = SchedulingPlan::parse(plan_text);
      validate_plan(plan, graph, catalog);
      const auto stages = build_stages(plan, graph);
      const auto ps_type = catalog.cheapest_cpu();
      if (ps_cores > 0 && !ps_type) throw ConfigError("--ps-cores needs a CPU type in the catalog");
      const ProvisioningPlan prov = make_provisioning(stages, parse_int_list(counts_text), ps_cores,
                                                      ps_cores > 0 ? *ps_type : -1, catalog.size());
      const CostReport report = evaluate(plan, prov, graph, catalog, {cfg.throughput_limit});
      print_report(plan, prov, report);
      return report.feasible ? 0 : kExitInfeasible;
    }

    if (*provision_cmd) {
      const ExperimentConfig cfg = resolve(g);
      const ModelGraph graph = load_model_graph(cfg.model_path);
      const ResourceCatalog catalog = load_catalog(cfg.catalog_path);
      const SchedulingPlan plan = SchedulingPlan::parse(plan_text);
      ProvisionerConfig pc;
      pc.include_ps_cores = !no_ps;
      const JobParams params{cfg.throughput_limit};
      ProvisioningPlan prov;
      if (mode_text == "optimal") {
        prov = optimize_k1(plan, graph, catalog, params, pc);
      } else {
        const ProvisionMode mode = parse_provision_mode(mode_text);
        prov = static_provision(plan, graph, catalog, params,
                                mode == ProvisionMode::kStaRatio ? StaticMode::kStaRatio
                                                                 : StaticMode::kStaPSRatio,
                                pc);
      }
      const CostReport report = evaluate(plan, prov, graph, catalog, params);
      print_report(plan, prov, report);
      return report.feasible ? 0 : kExitInfeasible;
    }

    if (*schedule_cmd) {
      const ExperimentConfig cfg = resolve(g);
      const ModelGraph graph = load_model_graph(cfg.model_path);
      const ResourceCatalog catalog = load_catalog(cfg.catalog_path);
      catalog.check_coverage(graph);
      const ProvisionMode mode =
          schedule_cmd->count("--mode") ? parse_provision_mode(mode_text) : cfg.provisioning;
      const PlanScorer scorer(graph, catalog, {cfg.throughput_limit}, mode);
      MethodSettings settings = cfg.settings;
      settings.heuristic_invert = settings.heuristic_invert || invert;
      if (!is_known_method(method)) throw ConfigError("unknown method '" + method + "'");
      const ScoredPlan scored = run_method(method, scorer, settings, g.seed);
      print_scored(scored);
      if (!g.out.empty()) write_text_file(g.out, scored.plan.to_string() + "\n");
      return scored.feasible ? 0 : kExitInfeasible;
    }

    if (*train_cmd) {
      const ExperimentConfig cfg = resolve(g);
      const ModelGraph graph = load_model_graph(cfg.model_path);
      const ResourceCatalog catalog = load_catalog(cfg.catalog_path);
      catalog.check_coverage(graph);
      const PlanScorer scorer(graph, catalog, {cfg.throughput_limit}, cfg.provisioning);
      TrainerConfig tc = cfg.settings.rl;
      tc.seed = g.seed;
      tc.arch = parse_policy_arch(arch_text);
      if (rounds >= 0) tc.rounds = rounds;
      if (plans_per_round > 0) tc.plans_per_round = plans_per_round;
      if (learning_rate > 0.0) tc.learning_rate = learning_rate;
      const PolicyTraining trained = train_policy(scorer, tc);
      const ScoredPlan scored = scorer.score(schedule_with(trained.checkpoint, graph, catalog));
      print_scored(scored);
      if (!trained.result.log.empty()) {
        std::printf("best_sampled_cost %.6f\n", trained.result.best_cost);
      }
      if (!g.out.empty()) {
        const fs::path dir(g.out);
        save_checkpoint((dir / "policy.json").string(), trained.checkpoint);
        write_text_file(dir / "training_log.csv", format_training_log(trained.result.log));
        std::printf("wrote %s and %s\n", (dir / "policy.json").c_str(),
                    (dir / "training_log.csv").c_str());
      }
      return scored.feasible ? 0 : kExitInfeasible;
    }

    if (*compare_cmd) {
      ExperimentConfig cfg = resolve(g);
      if (!methods_text.empty()) {
        cfg.methods.clear();
        std::stringstream ss(methods_text);
        std::string m;
        while (std::getline(ss, m, ',')) cfg.methods.push_back(m);
      }
      if (app.get_option("--seed")->count()) cfg.seeds = {g.seed};
      const ComparisonTable table = run_experiment(cfg);
      print_table(table);
      if (!cfg.output_dir.empty()) {
        const std::string model = load_model_graph(cfg.model_path).name;
        for (const auto& [name, text] : emit_plot_data({{model, table}})) {
          write_text_file(cfg.output_dir / "plots" / name, text);
        }
        std::printf("wrote %s\n", (cfg.output_dir / "comparison.csv").c_str());
      }
      return 0;
    }

    if (*scaling_cmd) {
      ScalingConfig sc;
      sc.layer_counts = parse_int_list(layers_text);
      sc.type_counts = parse_int_list(types_text);
      sc.seed = g.seed;
      sc.wall_time_cap = std::chrono::duration<double>(cap_seconds);
      sc.threads = threads;
      if (!g.config.empty()) sc.rl = load_experiment_config(g.config).settings.rl;
      if (rounds >= 0) sc.rl.rounds = rounds;
      const auto rows = scaling_study(sc);
      const std::string text = format_scaling(rows);
      std::cout << text;
      if (!g.out.empty()) write_text_file(g.out, text);
      return 0;
    }

    if (*prov_study_cmd) {
      const ExperimentConfig cfg = resolve(g);
      const ModelGraph graph = load_model_graph(cfg.model_path);
      const ResourceCatalog catalog = load_catalog(cfg.catalog_path);
      catalog.check_coverage(graph);
      const JobParams params{cfg.throughput_limit};
      SchedulingPlan plan;
      if (!plan_text.empty()) {
        plan = SchedulingPlan::parse(plan_text);
      } else {
        TrainerConfig tc = cfg.settings.rl;
        tc.seed = g.seed;
        if (rounds >= 0) tc.rounds = rounds;
        const PlanScorer scorer(graph, catalog, params);
        plan = schedule_with(train_policy(scorer, tc).checkpoint, graph, catalog);
      }
      std::printf("# plan %s\n", plan.to_string().c_str());
      const std::string text = format_provisioning(provisioning_study(
          plan, graph, catalog, params, {"optimal", "optimal-no-ps", "staratio", "stapsratio"}));
      std::cout << text;
      if (!g.out.empty()) write_text_file(g.out, text);
      return 0;
    }
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const PlanError& e) {
    std::fprintf(stderr, "invalid plan: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
