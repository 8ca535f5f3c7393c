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

#include "hetsched/model.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "hetsched/errors.h"

namespace hetsched {
namespace {

std::string layer_prefix(const LayerSpec& layer) {
  return "layer " + std::to_string(layer.index) + ": ";
}

void check_fractions(const LayerSpec& layer, const std::vector<double>& values,
                     const char* name) {
  for (std::size_t t = 0; t < values.size(); ++t) {
    const double v = values[t];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ConfigError(layer_prefix(layer) + name + "[" + std::to_string(t) +
                        "] must lie in [0,1]");
    }
  }
}

void check_times(const LayerSpec& layer, const std::vector<double>& values, const char* name) {
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isfinite(values[t]) || values[t] < 0.0) {
      throw ConfigError(layer_prefix(layer) + name + "[" + std::to_string(t) +
                        "] must be a finite non-negative time");
    }
  }
}

double weighted_mean(const std::vector<double>& weights, const std::vector<double>& values) {
  double total_weight = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total_weight += weights[i];
    acc += weights[i] * values[i];
  }
  if (total_weight > 0.0) return acc / total_weight;
  // All weights zero: the fraction scales nothing, plain mean keeps it in [0,1].
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

}  // namespace

std::size_t LayerSpec::covered_types() const {
  return std::min({oct.size(), odt.size(), alpha.size(), beta.size()});
}

void ModelGraph::validate() const {
  if (layers.empty()) throw ConfigError("model '" + name + "': layer list is empty");
  if (profile_batch_size < 1) throw ConfigError("profile_batch_size must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (total_samples < batch_size) throw ConfigError("total_samples must be >= batch_size");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    if (layer.index != static_cast<int>(i)) {
      throw ConfigError("layer indices must be 0..L-1 in order; found " +
                        std::to_string(layer.index) + " at position " + std::to_string(i));
    }
    if (!std::isfinite(layer.input_size) || layer.input_size < 0.0) {
      throw ConfigError(layer_prefix(layer) + "input_size must be >= 0");
    }
    if (!std::isfinite(layer.weight_size) || layer.weight_size < 0.0) {
      throw ConfigError(layer_prefix(layer) + "weight_size must be >= 0");
    }
    if (layer.oct.size() != layer.odt.size() || layer.oct.size() != layer.alpha.size() ||
        layer.oct.size() != layer.beta.size()) {
      throw ConfigError(layer_prefix(layer) + "oct/odt/alpha/beta must cover the same types");
    }
    if (layer.oct.empty()) throw ConfigError(layer_prefix(layer) + "no per-type profile");
    check_times(layer, layer.oct, "oct");
    check_times(layer, layer.odt, "odt");
    check_fractions(layer, layer.alpha, "alpha");
    check_fractions(layer, layer.beta, "beta");
  }
}

std::optional<TypeId> ResourceCatalog::cheapest_cpu() const {
  std::optional<TypeId> best;
  for (const ResourceType& type : types) {
    if (!type.is_cpu) continue;
    if (!best || type.price_per_hour < at(*best).price_per_hour) best = type.id;
  }
  return best;
}

void ResourceCatalog::validate() const {
  if (types.empty()) throw ConfigError("catalog: at least one resource type is required");
  for (std::size_t i = 0; i < types.size(); ++i) {
    const ResourceType& type = types[i];
    if (type.id != static_cast<TypeId>(i)) {
      throw ConfigError("catalog: type ids must be unique and contiguous 0..T-1; found " +
                        std::to_string(type.id) + " at position " + std::to_string(i));
    }
    if (!std::isfinite(type.price_per_hour) || type.price_per_hour <= 0.0) {
      throw ConfigError("catalog: type " + std::to_string(type.id) +
                        " price_per_hour must be > 0");
    }
    if (type.quota < 1) {
      throw ConfigError("catalog: type " + std::to_string(type.id) + " quota must be >= 1");
    }
  }
  std::set<std::string> kinds(layer_kinds.begin(), layer_kinds.end());
  if (kinds.size() != layer_kinds.size()) {
    throw ConfigError("catalog: layer_kinds contains duplicates");
  }
}

void ResourceCatalog::check_coverage(const ModelGraph& graph) const {
  for (const LayerSpec& layer : graph.layers) {
    if (layer.covered_types() < types.size()) {
      throw ConfigError(layer_prefix(layer) + "profile covers " +
                        std::to_string(layer.covered_types()) + " types but the catalog has " +
                        std::to_string(types.size()));
    }
    if (!layer_kinds.empty() &&
        std::find(layer_kinds.begin(), layer_kinds.end(), layer.kind) == layer_kinds.end()) {
      throw ConfigError(layer_prefix(layer) + "kind '" + layer.kind +
                        "' is not declared in the catalog");
    }
  }
}

std::string SchedulingPlan::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(assignment_[i]);
  }
  return out;
}

SchedulingPlan SchedulingPlan::parse(std::string_view text) {
  std::vector<TypeId> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '-' || c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ConfigError("plan: unexpected character '" + std::string(1, c) + "' in '" +
                        std::string(text) + "'");
    }
    TypeId value = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      value = value * 10 + (text[pos] - '0');
      ++pos;
    }
    ids.push_back(value);
  }
  if (ids.empty()) throw ConfigError("plan: empty assignment");
  return SchedulingPlan(std::move(ids));
}

ProvisioningPlan make_provisioning(const std::vector<Stage>& stages, std::vector<int> per_stage_k,
                                   int ps_cores, TypeId ps_type, std::size_t type_count) {
  ProvisioningPlan out;
  out.per_type_totals.assign(type_count, 0);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    out.per_type_totals.at(static_cast<std::size_t>(stages[i].type_id)) += per_stage_k.at(i);
  }
  if (ps_cores > 0) out.per_type_totals.at(static_cast<std::size_t>(ps_type)) += ps_cores;
  out.per_stage_k = std::move(per_stage_k);
  out.ps_cores = ps_cores;
  out.ps_type = ps_cores > 0 ? ps_type : -1;
  return out;
}

void validate_plan(const SchedulingPlan& plan, const ModelGraph& graph,
                   const ResourceCatalog& catalog) {
  if (plan.size() != graph.size()) {
    throw PlanError("plan has " + std::to_string(plan.size()) + " entries but the model has " +
                    std::to_string(graph.size()) + " layers");
  }
  const auto type_count = static_cast<TypeId>(catalog.size());
  for (std::size_t l = 0; l < plan.size(); ++l) {
    if (plan[l] < 0 || plan[l] >= type_count) {
      throw PlanError("layer " + std::to_string(l) + " is assigned unknown type " +
                      std::to_string(plan[l]) + " (catalog has " + std::to_string(type_count) +
                      " types)");
    }
  }
}

std::vector<Stage> build_stages(const SchedulingPlan& plan, const ModelGraph& graph) {
  if (plan.size() != graph.size()) {
    throw PlanError("plan length " + std::to_string(plan.size()) + " does not match " +
                    std::to_string(graph.size()) + " layers");
  }
  std::vector<Stage> stages;
  std::size_t first = 0;
  while (first < plan.size()) {
    const TypeId type = plan[first];
    if (type < 0) throw PlanError("negative type id in plan");
    std::size_t last = first;
    while (last + 1 < plan.size() && plan[last + 1] == type) ++last;

    const auto t = static_cast<std::size_t>(type);
    std::vector<double> octs, odts, alphas, betas;
    for (std::size_t l = first; l <= last; ++l) {
      const LayerSpec& layer = graph.layers[l];
      if (t >= layer.covered_types()) {
        throw PlanError("layer " + std::to_string(l) + " has no profile for type " +
                        std::to_string(type));
      }
      octs.push_back(layer.oct[t]);
      odts.push_back(layer.odt[t]);
      alphas.push_back(layer.alpha[t]);
      betas.push_back(layer.beta[t]);
    }

    Stage stage;
    stage.index = static_cast<int>(stages.size());
    stage.type_id = type;
    stage.first_layer = static_cast<int>(first);
    stage.last_layer = static_cast<int>(last);
    for (double v : octs) stage.oct += v;
    stage.odt = odts.back();
    stage.alpha = weighted_mean(octs, alphas);
    stage.beta = weighted_mean(odts, betas);
    stages.push_back(stage);
    first = last + 1;
  }
  return stages;
}

}  // namespace hetsched
