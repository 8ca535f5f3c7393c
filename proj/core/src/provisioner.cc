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

#include "hetsched/provisioner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "hetsched/errors.h"

namespace hetsched {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Counts beyond this are treated as unreachable rather than overflowing int.
constexpr double kMaxCount = 1e9;

// Rounds a real unit count up, ignoring float noise just above an integer.
std::optional<int> ceil_count(double x) {
  if (!std::isfinite(x) || x > kMaxCount) return std::nullopt;
  const double snapped = std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)));
  return std::max(1, static_cast<int>(snapped));
}

std::optional<double> units_for_time(double seconds, double fraction, double target,
                                     double profile_batch) {
  if (seconds <= 0.0) return 1.0;
  const double denominator = target * profile_batch / seconds - (1.0 - fraction);
  if (!(denominator > 0.0)) return std::nullopt;
  return std::max(1.0, fraction / denominator);
}

double stage_time(const Stage& stage, double k, double profile_batch) {
  return stage_exec_time(compute_ct(stage, k, profile_batch), compute_dt(stage, k, profile_batch));
}

// The stage with the slowest serial floor bounds the pipeline from below, so
// every other stage can match it at any count.
std::size_t pick_anchor(const std::vector<Stage>& stages, double profile_batch) {
  std::size_t best = 0;
  double best_floor = -1.0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const double floor = stage_time(stages[i], kMaxCount, profile_batch);
    if (floor > best_floor) {
      best_floor = floor;
      best = i;
    }
  }
  return best;
}

bool within_quotas(const ProvisioningPlan& p, const ResourceCatalog& catalog) {
  for (std::size_t t = 0; t < p.per_type_totals.size(); ++t) {
    if (p.per_type_totals[t] > catalog.types[t].quota) return false;
  }
  return true;
}

std::string quota_breach(const ProvisioningPlan& p, const ResourceCatalog& catalog) {
  for (std::size_t t = 0; t < p.per_type_totals.size(); ++t) {
    if (p.per_type_totals[t] > catalog.types[t].quota) {
      return "quota of type " + std::to_string(t) + " (" + catalog.types[t].name + ") needs " +
             std::to_string(p.per_type_totals[t]) + " > " + std::to_string(catalog.types[t].quota);
    }
  }
  return {};
}

int accelerator_units(const std::vector<Stage>& stages, const std::vector<int>& ks,
                      const ResourceCatalog& catalog) {
  int total = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (!catalog.at(stages[i].type_id).is_cpu) total += ks[i];
  }
  return total;
}

// ps cores for `accelerators` units; nullopt when no CPU type can host them.
std::optional<std::pair<int, TypeId>> ps_allocation(double accelerators,
                                                    const ResourceCatalog& catalog,
                                                    double ratio) {
  if (accelerators <= 0.0 || ratio <= 0.0) return std::make_pair(0, TypeId{-1});
  const auto cpu = catalog.cheapest_cpu();
  if (!cpu) return std::nullopt;
  const double raw = ratio * accelerators;
  const auto cores = ceil_count(raw);
  if (!cores) return std::nullopt;
  return std::make_pair(*cores, *cpu);
}

std::optional<ProvisioningPlan> with_ps(const std::vector<Stage>& stages, std::vector<int> ks,
                                        const ResourceCatalog& catalog, bool include_ps,
                                        double ratio) {
  int ps_cores = 0;
  TypeId ps_type = -1;
  if (include_ps) {
    const auto ps = ps_allocation(accelerator_units(stages, ks, catalog), catalog, ratio);
    if (!ps) return std::nullopt;
    ps_cores = ps->first;
    ps_type = ps->second;
  }
  return make_provisioning(stages, std::move(ks), ps_cores, ps_type, catalog.size());
}

// Smallest counts that bring every stage to `target` seconds per sample.
std::optional<ProvisioningPlan> sized_for_target(const std::vector<Stage>& stages, double target,
                                                 double profile_batch,
                                                 const ResourceCatalog& catalog,
                                                 const ProvisionerConfig& config) {
  std::vector<int> ks(stages.size(), 1);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto need = units_for_target(stages[i], target, profile_batch);
    if (!need) return std::nullopt;
    const auto count = ceil_count(*need);
    if (!count) return std::nullopt;
    ks[i] = *count;
  }
  return with_ps(stages, std::move(ks), catalog, config.include_ps_cores,
                 config.ps_cores_per_gpu);
}

}  // namespace

void ProvisionerConfig::validate() const {
  if (!(ps_cores_per_gpu >= 0.0)) throw ConfigError("ps_cores_per_gpu must be >= 0");
  if (newton_max_iters < 1) throw ConfigError("newton_max_iters must be >= 1");
  if (!(newton_tol > 0.0)) throw ConfigError("newton_tol must be > 0");
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be > 0");
  if (!(static_cpu_per_gpu >= 0.0)) throw ConfigError("static_cpu_per_gpu must be >= 0");
  if (pace_window < 0) throw ConfigError("pace_window must be >= 0");
}

double stage_time_budget(const ModelGraph& graph, const JobParams& params) {
  if (!(params.throughput_limit > 0.0)) throw ConfigError("throughput limit must be > 0");
  return static_cast<double>(graph.batch_size) / params.throughput_limit;
}

double min_k1(const Stage& anchor, const ModelGraph& graph, const JobParams& params) {
  const double budget = stage_time_budget(graph, params) * graph.profile_batch_size;
  auto bound = [&](double seconds, double fraction, const char* what) {
    if (seconds <= 0.0) return 0.0;
    const double denominator = budget - (1.0 - fraction) * seconds;
    if (!(denominator > 0.0)) {
      throw InfeasibleError("stage " + std::to_string(anchor.index) +
                            " cannot reach the throughput limit at any k (serial " + what +
                            " exceeds the budget)");
    }
    return fraction * seconds / denominator;
  };
  return std::max(bound(anchor.oct, anchor.alpha, "compute"),
                  bound(anchor.odt, anchor.beta, "communication"));
}

std::optional<double> derive_ki(double k1, const Stage& anchor, const Stage& stage_i) {
  if (stage_i.oct <= 0.0) return 1.0;
  const double denominator = anchor.oct / stage_i.oct * (1.0 - anchor.alpha + anchor.alpha / k1) -
                             (1.0 - stage_i.alpha);
  if (!(denominator > 0.0)) return std::nullopt;
  return std::max(1.0, stage_i.alpha / denominator);
}

std::optional<double> units_for_target(const Stage& stage, double target, double profile_batch) {
  const auto compute = units_for_time(stage.oct, stage.alpha, target, profile_batch);
  const auto transfer = units_for_time(stage.odt, stage.beta, target, profile_batch);
  if (!compute || !transfer) return std::nullopt;
  return std::max(*compute, *transfer);
}

double relaxed_cost(const std::vector<Stage>& stages, std::size_t anchor, double k1,
                    const ModelGraph& graph, const ResourceCatalog& catalog,
                    const ProvisionerConfig& config) {
  const double b_o = graph.profile_batch_size;
  if (!(k1 >= 1.0)) return kInf;
  const double target = stage_time(stages[anchor], k1, b_o);
  double rate = 0.0;
  double accelerators = 0.0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    double k = k1;
    if (i != anchor) {
      const auto need = units_for_target(stages[i], target, b_o);
      if (!need) return kInf;
      k = *need;
    }
    const ResourceType& type = catalog.at(stages[i].type_id);
    rate += type.price_per_second() * k;
    if (!type.is_cpu) accelerators += k;
  }
  if (config.include_ps_cores && accelerators > 0.0 && config.ps_cores_per_gpu > 0.0) {
    const auto cpu = catalog.cheapest_cpu();
    if (!cpu) return kInf;
    rate += catalog.at(*cpu).price_per_second() * config.ps_cores_per_gpu * accelerators;
  }
  const double exec_time = static_cast<double>(graph.epochs) *
                           static_cast<double>(graph.total_samples) * target / graph.batch_size;
  return exec_time * rate;
}

std::optional<ProvisioningPlan> balanced_provisioning(const std::vector<Stage>& stages,
                                                      std::size_t anchor, int k1,
                                                      const ModelGraph& graph,
                                                      const ResourceCatalog& catalog,
                                                      const ProvisionerConfig& config) {
  const double b_o = graph.profile_batch_size;
  const double target = stage_time(stages[anchor], k1, b_o);
  std::vector<int> ks(stages.size(), 1);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i == anchor) {
      ks[i] = k1;
      continue;
    }
    const auto need = units_for_target(stages[i], target, b_o);
    if (!need) return std::nullopt;
    const auto count = ceil_count(*need);
    if (!count) return std::nullopt;
    ks[i] = *count;
  }
  return with_ps(stages, std::move(ks), catalog, config.include_ps_cores,
                 config.ps_cores_per_gpu);
}

ProvisioningPlan add_ps_cores(const ProvisioningPlan& provisioning,
                              const std::vector<Stage>& stages, const ResourceCatalog& catalog,
                              const ProvisionerConfig& config) {
  const int accelerators = accelerator_units(stages, provisioning.per_stage_k, catalog);
  const auto ps = ps_allocation(accelerators, catalog, config.ps_cores_per_gpu);
  if (!ps) {
    throw InfeasibleError("no CPU type available to host " + std::to_string(accelerators) +
                          " accelerators' parameter servers");
  }
  ProvisioningPlan out =
      make_provisioning(stages, provisioning.per_stage_k, ps->first, ps->second, catalog.size());
  if (!within_quotas(out, catalog)) {
    throw InfeasibleError("parameter-server cores break a quota: " + quota_breach(out, catalog));
  }
  return out;
}

ProvisionResult optimize_k1_detailed(const SchedulingPlan& plan, const ModelGraph& graph,
                                     const ResourceCatalog& catalog, const JobParams& params,
                                     const ProvisionerConfig& config) {
  validate_plan(plan, graph, catalog);
  const std::vector<Stage> stages = build_stages(plan, graph);

  // Every stage must be able to reach the budget on its own.
  std::vector<int> floor_counts(stages.size(), 1);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const double bound = min_k1(stages[i], graph, params);
    const auto count = ceil_count(std::floor(bound) + 1.0);
    if (!count) throw InfeasibleError("stage " + std::to_string(i) + " needs unbounded resources");
    floor_counts[i] = *count;
  }

  ProvisionResult result;
  result.anchor_stage = pick_anchor(stages, graph.profile_batch_size);
  const Stage& anchor = stages[result.anchor_stage];
  const int anchor_quota = catalog.at(anchor.type_id).quota;
  result.k1_lo = floor_counts[result.anchor_stage];

  auto fits = [&](int k1) {
    const auto p = balanced_provisioning(stages, result.anchor_stage, k1, graph, catalog, config);
    return p && within_quotas(*p, catalog);
  };

  std::vector<int> candidates;
  const bool balanced_ok = result.k1_lo <= anchor_quota && fits(result.k1_lo);
  if (balanced_ok) {
    // Sizing grows with k1, so the fitting counts form an interval.
    int lo = result.k1_lo;
    int hi = anchor_quota;
    while (lo < hi) {
      const int mid = lo + (hi - lo + 1) / 2;
      if (fits(mid)) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    result.k1_hi = lo;

    const double a = result.k1_lo;
    const double b = result.k1_hi;
    auto f = [&](double x) {
      return relaxed_cost(stages, result.anchor_stage, x, graph, catalog, config);
    };

    double best_x = a;
    if (b > a) {
      bool converged = false;
      double x = 0.5 * (a + b);
      for (int it = 0; it < config.newton_max_iters; ++it) {
        result.newton_iterations = it + 1;
        const double h = config.fd_step * std::max(1.0, x);
        const double fm = f(x - h);
        const double f0 = f(x);
        const double fp = f(x + h);
        if (!std::isfinite(fm) || !std::isfinite(f0) || !std::isfinite(fp)) break;
        const double d1 = (fp - fm) / (2.0 * h);
        const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
        if (!(d2 > 0.0)) break;
        const double next = x - d1 / d2;
        if (!(next >= a && next <= b)) break;
        const bool done = std::abs(next - x) < config.newton_tol;
        x = next;
        if (done) {
          converged = true;
          break;
        }
      }
      if (converged) {
        best_x = x;
      } else {
        result.used_golden_fallback = true;
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = a;
        double hi = b;
        double x1 = hi - inv_phi * (hi - lo);
        double x2 = lo + inv_phi * (hi - lo);
        double f1 = f(x1);
        double f2 = f(x2);
        while (hi - lo > config.newton_tol) {
          if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
          } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
          }
        }
        best_x = 0.5 * (lo + hi);
      }
      // The objective is often monotone, so the ends compete with the interior.
      for (double end : {a, b}) {
        if (f(end) <= f(best_x)) {
          best_x = end;
          break;
        }
      }
    }
    result.k1_continuous = best_x;

    const int center = static_cast<int>(std::ceil(best_x));
    std::set<int> seen;
    for (int k : {result.k1_lo, result.k1_lo + 1, center - 1, center, center + 1, result.k1_hi}) {
      const int clamped = std::clamp(k, result.k1_lo, result.k1_hi);
      if (seen.insert(clamped).second) candidates.push_back(clamped);
    }
  } else {
    result.k1_hi = result.k1_lo - 1;
    result.k1_continuous = result.k1_lo;
  }

  std::optional<ProvisioningPlan> best;
  double best_cost = kInf;
  std::string last_violation = "no balanced sizing fits";
  auto consider = [&](std::optional<ProvisioningPlan> p) {
    if (!p) return;
    const CostReport report = evaluate_stages(stages, *p, graph, catalog, params);
    if (!report.feasible) {
      if (report.violation) last_violation = *report.violation;
      return;
    }
    if (report.monetary_cost < best_cost) {
      best_cost = report.monetary_cost;
      best = std::move(p);
    }
  };
  for (int k1 : candidates) {
    consider(balanced_provisioning(stages, result.anchor_stage, k1, graph, catalog, config));
  }
  // Rounding makes small counts of dear stages matter most, so each stage's
  // first few counts also set the pace for the rest.
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const int quota = catalog.at(stages[i].type_id).quota;
    for (int extra = 0; extra < config.pace_window; ++extra) {
      const int k = floor_counts[i] + extra;
      if (k > quota) break;
      consider(sized_for_target(stages, stage_time(stages[i], k, graph.profile_batch_size),
                                graph.profile_batch_size, catalog, config));
    }
  }
  if (balanced_ok) {
    // Rounding the other stages up can cost more than rounding the anchor, so
    // each stage's neighbouring counts at the continuous optimum also set the
    // pace.
    const double b_o = graph.profile_batch_size;
    const double target = stage_time(anchor, result.k1_continuous, b_o);
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (i == result.anchor_stage) continue;
      const auto need = units_for_target(stages[i], target, b_o);
      if (!need || *need > kMaxCount) continue;
      const double base = std::floor(*need);
      for (double k : {base, base + 1.0, base + 2.0}) {
        if (k < floor_counts[i]) continue;
        consider(sized_for_target(stages, stage_time(stages[i], k, b_o), b_o, catalog, config));
      }
    }
  }
  // Every stage at its own minimum count; covers anchors that are fast at k = 1.
  consider(with_ps(stages, floor_counts, catalog, config.include_ps_cores,
                   config.ps_cores_per_gpu));

  if (!best) {
    if (!balanced_ok && result.k1_lo > anchor_quota) {
      last_violation = "anchor stage needs " + std::to_string(result.k1_lo) + " units of type " +
                       std::to_string(anchor.type_id) + " (" + catalog.at(anchor.type_id).name +
                       ") but the quota is " + std::to_string(anchor_quota);
    }
    throw InfeasibleError("no feasible provisioning: " + last_violation);
  }
  result.provisioning = std::move(*best);
  return result;
}

ProvisioningPlan optimize_k1(const SchedulingPlan& plan, const ModelGraph& graph,
                             const ResourceCatalog& catalog, const JobParams& params,
                             const ProvisionerConfig& config) {
  return optimize_k1_detailed(plan, graph, catalog, params, config).provisioning;
}

ProvisioningPlan static_provision(const SchedulingPlan& plan, const ModelGraph& graph,
                                  const ResourceCatalog& catalog, const JobParams& params,
                                  StaticMode mode, const ProvisionerConfig& config) {
  validate_plan(plan, graph, catalog);
  const std::vector<Stage> stages = build_stages(plan, graph);
  std::vector<std::size_t> accelerator_stages;
  std::vector<std::size_t> cpu_stages;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    (catalog.at(stages[i].type_id).is_cpu ? cpu_stages : accelerator_stages).push_back(i);
  }
  int max_quota = 0;
  for (const ResourceType& type : catalog.types) max_quota = std::max(max_quota, type.quota);

  std::string last = "no count was tried";
  for (int g = 1; g <= max_quota; ++g) {
    std::vector<int> ks(stages.size(), g);
    int ps_cores = 0;
    TypeId ps_type = -1;
    if (!accelerator_stages.empty()) {
      const double accelerators = static_cast<double>(g) * accelerator_stages.size();
      if (!cpu_stages.empty()) {
        const auto cpu_total = ceil_count(config.static_cpu_per_gpu * accelerators);
        const int per_stage = cpu_total ? (*cpu_total + static_cast<int>(cpu_stages.size()) - 1) /
                                              static_cast<int>(cpu_stages.size())
                                        : 1;
        for (std::size_t i : cpu_stages) ks[i] = std::max(1, per_stage);
      }
      if (mode == StaticMode::kStaPSRatio) {
        const auto ps = ps_allocation(accelerators, catalog, config.ps_cores_per_gpu);
        if (!ps) throw InfeasibleError("no CPU type available to host parameter servers");
        ps_cores = ps->first;
        ps_type = ps->second;
      }
    }
    const ProvisioningPlan p = make_provisioning(stages, ks, ps_cores, ps_type, catalog.size());
    if (!within_quotas(p, catalog)) {
      throw InfeasibleError("static ratio provisioning exhausts a quota before meeting the limit (" +
                            quota_breach(p, catalog) + ")");
    }
    const CostReport report = evaluate_stages(stages, p, graph, catalog, params);
    if (report.feasible) return p;
    if (report.violation) last = *report.violation;
  }
  throw InfeasibleError("static ratio provisioning cannot meet the limit: " + last);
}

}  // namespace hetsched
