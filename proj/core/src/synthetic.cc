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

#include "hetsched/synthetic.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetsched/errors.h"
#include "hetsched/rng.h"

namespace hetsched {

Instance make_synthetic_instance(int layers, int types, std::uint64_t seed) {
  if (layers < 1) throw ConfigError("synthetic instance needs at least one layer");
  if (types < 2) throw ConfigError("synthetic instance needs a CPU and an accelerator type");
  Rng rng(seed);
  Instance inst;
  const auto T = static_cast<std::size_t>(types);

  ResourceCatalog& cat = inst.catalog;
  cat.layer_kinds = {"dense", "sparse"};
  cat.types.push_back({0, "cpu", 0.04, "core", 4096, true});
  for (int t = 1; t < types; ++t) {
    cat.types.push_back({t, "gpu" + std::to_string(t), 2.42 * rng.uniform(0.5, 1.5), "card", 256,
                         false});
  }

  ModelGraph& g = inst.graph;
  g.name = "synthetic-L" + std::to_string(layers) + "-T" + std::to_string(types) + "-s" +
           std::to_string(seed);
  g.total_samples = 100'000'000;
  g.epochs = 1;
  g.batch_size = 512;
  g.profile_batch_size = 512;

  // Per-type speedup factors for each kind, fixed across layers.
  std::vector<double> dense_speedup(T, 1.0), sparse_speedup(T, 1.0);
  for (std::size_t t = 1; t < T; ++t) {
    dense_speedup[t] = rng.uniform(5.0, 25.0);
    sparse_speedup[t] = rng.uniform(0.3, 1.5);
  }

  double floor_sum = 0.0;
  for (int l = 0; l < layers; ++l) {
    LayerSpec layer;
    layer.index = l;
    const bool sparse = rng.bernoulli(0.4);
    layer.kind = sparse ? "sparse" : "dense";
    layer.input_size = std::round(rng.uniform(1e3, 1e6));
    layer.weight_size = std::round(rng.uniform(1e4, 1e8));
    const double cpu_oct = rng.uniform(0.2, 2.0);
    const double cpu_odt = cpu_oct * rng.uniform(0.01, 0.2);
    double best_oct = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double speedup = sparse ? sparse_speedup[t] : dense_speedup[t];
      const double oct = cpu_oct / speedup * rng.uniform(0.8, 1.2);
      layer.oct.push_back(oct);
      layer.odt.push_back(cpu_odt * rng.uniform(0.5, 1.5));
      layer.alpha.push_back(rng.uniform(0.85, 0.99));
      layer.beta.push_back(rng.uniform(0.5, 0.9));
      best_oct = t == 0 ? oct : std::min(best_oct, oct);
    }
    floor_sum += best_oct;
    g.layers.push_back(std::move(layer));
  }

  const double budget = 0.25 * floor_sum / g.profile_batch_size;
  inst.params.throughput_limit = g.batch_size / budget;
  g.validate();
  cat.validate();
  return inst;
}

}  // namespace hetsched
