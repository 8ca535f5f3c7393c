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

#ifndef HETSCHED_SYNTHETIC_H_
#define HETSCHED_SYNTHETIC_H_

#include <cstdint>

#include "hetsched/cost_model.h"
#include "hetsched/model.h"

namespace hetsched {

struct Instance {
  ModelGraph graph;
  ResourceCatalog catalog;
  JobParams params;
};

// Random but plausible instance: type 0 is a CPU core, types 1.. are
// accelerators with random prices. Layers are "sparse" (little accelerator
// speedup) or "dense" (large speedup). The throughput limit leaves the
// cheapest-per-layer placement about four times its serial floor.
Instance make_synthetic_instance(int layers, int types, std::uint64_t seed);

}  // namespace hetsched

#endif  // HETSCHED_SYNTHETIC_H_
