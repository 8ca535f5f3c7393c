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

#ifndef HETSCHED_IO_H_
#define HETSCHED_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "hetsched/model.h"

namespace hetsched {

// JSON model graph:
//   {name, total_samples, epochs, batch_size, profile_batch_size,
//    layers: [{index, kind, input_size, weight_size,
//              oct: {"<type id>": sec}, odt: {...}, alpha: {...}, beta: {...}}]}
// Per-type maps must use the ids 0..n-1 without gaps.
ModelGraph parse_model_graph(std::string_view json_text, std::string_view origin = "<string>");
ModelGraph load_model_graph(const std::filesystem::path& path);
std::string serialize_model_graph(const ModelGraph& graph);

// JSON catalog:
//   {types: [{id, name, price_per_hour, unit, quota, is_cpu}], layer_kinds: [...]}
// layer_kinds is optional.
ResourceCatalog parse_catalog(std::string_view json_text, std::string_view origin = "<string>");
ResourceCatalog load_catalog(const std::filesystem::path& path);
std::string serialize_catalog(const ResourceCatalog& catalog);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace hetsched

#endif  // HETSCHED_IO_H_
