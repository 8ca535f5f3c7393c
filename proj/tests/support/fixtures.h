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

#ifndef HETSCHED_TESTS_SUPPORT_FIXTURES_H_
#define HETSCHED_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hetsched/cost_model.h"
#include "hetsched/model.h"
#include "hetsched/rng.h"
#include "hetsched/trainer.h"

namespace hetsched::testing {

// One layer with the same kind and sizes; the per-type vectors must agree in
// length.
LayerSpec make_layer(int index, std::vector<double> oct, std::vector<double> odt,
                     std::vector<double> alpha, std::vector<double> beta,
                     std::string kind = "fc");

ModelGraph make_graph(std::vector<LayerSpec> layers, std::int64_t total_samples = 1000,
                      int epochs = 1, int batch_size = 1, int profile_batch_size = 1);

// Type 0: CPU core at 0.04/h. Type 1..: accelerators at `gpu_prices`.
ResourceCatalog make_catalog(std::vector<double> gpu_prices = {2.42}, int cpu_quota = 4096,
                             int gpu_quota = 256);

// Random instance with T types and L layers whose limit is reachable by
// every single-type stage; used by the property tests.
struct RandomInstance {
  ModelGraph graph;
  ResourceCatalog catalog;
  JobParams params;
};
RandomInstance random_instance(Rng& rng, int layers, int types);

// Random plan over `types` for `layers` layers.
SchedulingPlan random_plan(Rng& rng, int layers, int types);

std::filesystem::path data_path(const std::string& relative);

// Three layers where layer-by-layer choice is led astray.
struct CraftedInstance {
  ModelGraph graph;
  ResourceCatalog catalog;
  JobParams params;
};
CraftedInstance greedy_trap();

// Trainer settings used wherever a test expects the policy to find the
// optimum: standardized advantages, an entropy bonus and replay of the best
// plan on top of the defaults.
TrainerConfig tuned_trainer_config(std::uint64_t seed, int rounds = 1000);

}  // namespace hetsched::testing

#endif  // HETSCHED_TESTS_SUPPORT_FIXTURES_H_
