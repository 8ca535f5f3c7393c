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


#include "support/fixtures.h"

#include <utility>

namespace hetsched::testing {

LayerSpec make_layer(int index, std::vector<double> oct, std::vector<double> odt,
                     std::vector<double> alpha, std::vector<double> beta, std::string kind) {
  LayerSpec layer;
  layer.index = index;
  layer.kind = std::move(kind);
  layer.input_size = 1024.0;
  layer.weight_size = 4096.0;
  layer.oct = std::move(oct);
  layer.odt = std::move(odt);
  layer.alpha = std::move(alpha);
  layer.beta = std::move(beta);
  return layer;
}

ModelGraph make_graph(std::vector<LayerSpec> layers, std::int64_t total_samples, int epochs,
                      int batch_size, int profile_batch_size) {
  ModelGraph graph;
  graph.name = "fixture";
  graph.layers = std::move(layers);
  graph.total_samples = total_samples;
  graph.epochs = epochs;
  graph.batch_size = batch_size;
  graph.profile_batch_size = profile_batch_size;
  return graph;
}

ResourceCatalog make_catalog(std::vector<double> gpu_prices, int cpu_quota, int gpu_quota) {
  ResourceCatalog catalog;
  catalog.types.push_back({0, "cpu", 0.04, "core", cpu_quota, true});
  for (std::size_t i = 0; i < gpu_prices.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    catalog.types.push_back({id, "gpu" + std::to_string(id), gpu_prices[i], "card", gpu_quota,
                             false});
  }
  return catalog;
}

RandomInstance random_instance(Rng& rng, int layers, int types) {
  RandomInstance inst;
  std::vector<double> prices;
  for (int t = 1; t < types; ++t) prices.push_back(rng.uniform(0.5, 4.0));
  inst.catalog = make_catalog(prices, 100000, 100000);
  std::vector<LayerSpec> specs;
  double worst_floor = 0.0;
  for (int l = 0; l < layers; ++l) {
    std::vector<double> oct, odt, alpha, beta;
    for (int t = 0; t < types; ++t) {
      oct.push_back(rng.uniform(0.05, 2.0));
      odt.push_back(rng.uniform(0.01, 0.5));
      alpha.push_back(rng.uniform(0.9, 0.99));
      beta.push_back(rng.uniform(0.6, 0.95));
    }
    specs.push_back(make_layer(l, oct, odt, alpha, beta, rng.bernoulli(0.5) ? "fc" : "embedding"));
  }
  inst.graph = make_graph(std::move(specs), 1'000'000, 1, 64, 64);
  // Every stage, even one holding all layers, stays feasible: its serial
  // floor is at most the sum of (1 - alpha) * oct over the layers.
  for (int t = 0; t < types; ++t) {
    double floor = 0.0;
    for (const auto& layer : inst.graph.layers) {
      floor += std::max((1.0 - layer.alpha[t]) * layer.oct[t], (1.0 - layer.beta[t]) * layer.odt[t]);
    }
    worst_floor = std::max(worst_floor, floor);
  }
  const double budget = 3.0 * worst_floor / inst.graph.profile_batch_size;
  inst.params.throughput_limit = inst.graph.batch_size / budget;
  return inst;
}

SchedulingPlan random_plan(Rng& rng, int layers, int types) {
  std::vector<TypeId> a(static_cast<std::size_t>(layers));
  for (auto& t : a) t = rng.below(types);
  return SchedulingPlan(std::move(a));
}

std::filesystem::path data_path(const std::string& relative) {
  return std::filesystem::path(HETSCHED_TEST_DATA_DIR) / relative;
}

CraftedInstance greedy_trap() {
  CraftedInstance inst;
  inst.catalog = make_catalog({2.84});
  inst.graph = make_graph({make_layer(0, {1.74, 0.25}, {0.064, 0.060}, {0.95, 0.90}, {0.74, 0.70}),
                           make_layer(1, {0.75, 0.12}, {0.100, 0.060}, {0.92, 0.99}, {0.60, 0.57}),
                           make_layer(2, {1.31, 0.24}, {0.253, 0.156}, {0.93, 0.86}, {0.66, 0.66})},
                          100'000'000, 1, 512, 512);
  inst.params.throughput_limit = 1.74e6;
  return inst;
}

TrainerConfig tuned_trainer_config(std::uint64_t seed, int rounds) {
  TrainerConfig config;
  config.rounds = rounds;
  config.plans_per_round = 64;
  config.learning_rate = 0.03;
  config.hidden_size = 16;
  config.baseline_rate = 0.1;
  config.standardize_advantages = true;
  config.entropy_weight = 0.03;
  config.imitation_weight = 16.0;
  config.seed = seed;
  return config;
}

}  // namespace hetsched::testing
