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

#include "hetsched/io.h"

#include <fstream>
#include <sstream>

#include "hetsched/errors.h"
#include "json.hpp"

namespace hetsched {
namespace {

using nlohmann::json;

// Maps a byte offset to "line:column" for parse diagnostics.
std::string location_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < text.size() && i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

json parse_json(std::string_view text, std::string_view origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError(std::string(origin) + ":" + location_of(text, byte) +
                      ": JSON parse error: " + e.what());
  }
}

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& require(const char* key) const {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) throw ConfigError(path_ + "." + key + ": missing field");
    return *it;
  }

  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  template <typename T>
  T get(const char* key) const {
    const json& value = require(key);
    try {
      return value.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type (" + value.type_name() + ")");
    }
  }

  double number(const char* key) const {
    const json& value = require(key);
    if (!value.is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
    return value.get<double>();
  }

  std::int64_t integer(const char* key) const {
    const json& value = require(key);
    if (!value.is_number_integer()) throw ConfigError(path_ + "." + key + ": expected an integer");
    return value.get<std::int64_t>();
  }

  std::vector<double> per_type(const char* key) const {
    const json& value = require(key);
    const std::string where = path_ + "." + key;
    if (!value.is_object()) throw ConfigError(where + ": expected an object keyed by type id");
    std::vector<double> out(value.size(), 0.0);
    std::vector<bool> seen(value.size(), false);
    for (auto it = value.begin(); it != value.end(); ++it) {
      std::size_t id = 0;
      try {
        std::size_t used = 0;
        const long parsed = std::stol(it.key(), &used);
        if (used != it.key().size() || parsed < 0) throw std::invalid_argument("id");
        id = static_cast<std::size_t>(parsed);
      } catch (const std::exception&) {
        throw ConfigError(where + ": key '" + it.key() + "' is not a type id");
      }
      if (id >= out.size()) {
        throw ConfigError(where + ": type ids must be contiguous from 0; found " + it.key());
      }
      if (!it.value().is_number()) throw ConfigError(where + "." + it.key() + ": expected a number");
      out[id] = it.value().get<double>();
      seen[id] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) throw ConfigError(where + ": missing type id " + std::to_string(i));
    }
    return out;
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
};

json per_type_json(const std::vector<double>& values) {
  json out = json::object();
  for (std::size_t i = 0; i < values.size(); ++i) out[std::to_string(i)] = values[i];
  return out;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

ModelGraph parse_model_graph(std::string_view json_text, std::string_view origin) {
  const json root = parse_json(json_text, origin);
  const Reader top(root, std::string(origin));
  ModelGraph graph;
  graph.name = top.get<std::string>("name");
  graph.total_samples = top.integer("total_samples");
  graph.epochs = static_cast<int>(top.integer("epochs"));
  graph.batch_size = static_cast<int>(top.integer("batch_size"));
  graph.profile_batch_size = static_cast<int>(top.integer("profile_batch_size"));

  const json& layers = top.require("layers");
  if (!layers.is_array()) throw ConfigError(top.path() + ".layers: expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Reader r(layers[i], top.path() + ".layers[" + std::to_string(i) + "]");
    LayerSpec layer;
    layer.index = static_cast<int>(r.integer("index"));
    layer.kind = r.get<std::string>("kind");
    layer.input_size = r.number("input_size");
    layer.weight_size = r.number("weight_size");
    layer.oct = r.per_type("oct");
    layer.odt = r.per_type("odt");
    layer.alpha = r.per_type("alpha");
    layer.beta = r.per_type("beta");
    graph.layers.push_back(std::move(layer));
  }
  try {
    graph.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return graph;
}

ModelGraph load_model_graph(const std::filesystem::path& path) {
  return parse_model_graph(read_text_file(path), path.string());
}

std::string serialize_model_graph(const ModelGraph& graph) {
  json root;
  root["name"] = graph.name;
  root["total_samples"] = graph.total_samples;
  root["epochs"] = graph.epochs;
  root["batch_size"] = graph.batch_size;
  root["profile_batch_size"] = graph.profile_batch_size;
  json layers = json::array();
  for (const LayerSpec& layer : graph.layers) {
    layers.push_back({{"index", layer.index},
                      {"kind", layer.kind},
                      {"input_size", layer.input_size},
                      {"weight_size", layer.weight_size},
                      {"oct", per_type_json(layer.oct)},
                      {"odt", per_type_json(layer.odt)},
                      {"alpha", per_type_json(layer.alpha)},
                      {"beta", per_type_json(layer.beta)}});
  }
  root["layers"] = std::move(layers);
  return root.dump(2) + "\n";
}

ResourceCatalog parse_catalog(std::string_view json_text, std::string_view origin) {
  const json root = parse_json(json_text, origin);
  const Reader top(root, std::string(origin));
  ResourceCatalog catalog;
  const json& types = top.require("types");
  if (!types.is_array()) throw ConfigError(top.path() + ".types: expected an array");
  for (std::size_t i = 0; i < types.size(); ++i) {
    const Reader r(types[i], top.path() + ".types[" + std::to_string(i) + "]");
    ResourceType type;
    type.id = static_cast<TypeId>(r.integer("id"));
    type.name = r.get<std::string>("name");
    type.price_per_hour = r.number("price_per_hour");
    type.unit = r.get<std::string>("unit");
    type.quota = static_cast<int>(r.integer("quota"));
    type.is_cpu = r.get<bool>("is_cpu");
    catalog.types.push_back(std::move(type));
  }
  if (top.has("layer_kinds")) {
    catalog.layer_kinds = top.get<std::vector<std::string>>("layer_kinds");
  }
  try {
    catalog.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return catalog;
}

ResourceCatalog load_catalog(const std::filesystem::path& path) {
  return parse_catalog(read_text_file(path), path.string());
}

std::string serialize_catalog(const ResourceCatalog& catalog) {
  json root;
  json types = json::array();
  for (const ResourceType& type : catalog.types) {
    types.push_back({{"id", type.id},
                     {"name", type.name},
                     {"price_per_hour", type.price_per_hour},
                     {"unit", type.unit},
                     {"quota", type.quota},
                     {"is_cpu", type.is_cpu}});
  }
  root["types"] = std::move(types);
  if (!catalog.layer_kinds.empty()) root["layer_kinds"] = catalog.layer_kinds;
  return root.dump(2) + "\n";
}

}  // namespace hetsched
