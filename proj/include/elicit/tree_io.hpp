// Copyright 2026 The Elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Policy-tree documents. Field order is fixed, so serializing a parsed
// document reproduces the original bytes.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "elicit/error.hpp"
#include "elicit/policy.hpp"

namespace elicit {

inline constexpr int kTreeSchemaVersion = 1;

using ojson = nlohmann::ordered_json;

namespace detail {

template <class T>
T get_field(const ojson& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline ojson to_json(const PolicyConfig& c) {
  ojson j;
  j["strategy"] = to_string(c.strategy);
  j["fuzzifier"] = c.fuzzifier;
  j["epsilon"] = c.epsilon;
  j["max_iter"] = c.max_iter;
  j["seed"] = c.seed;
  j["tau"] = c.tau;
  j["x"] = c.x;
  j["manual_n"] = c.manual_n ? ojson(*c.manual_n) : ojson(nullptr);
  j["auto_n"] = c.auto_n;
  j["renormalize"] = c.renormalize;
  return j;
}

inline PolicyConfig config_from_json(const ojson& j) {
  PolicyConfig c;
  c.strategy = strategy_from_string(detail::get_field<std::string>(j, "strategy"));
  c.fuzzifier = detail::get_field<double>(j, "fuzzifier");
  c.epsilon = detail::get_field<double>(j, "epsilon");
  c.max_iter = detail::get_field<int>(j, "max_iter");
  c.seed = detail::get_field<std::uint64_t>(j, "seed");
  c.tau = detail::get_field<double>(j, "tau");
  c.x = detail::get_field<int>(j, "x");
  if (j.contains("manual_n") && !j.at("manual_n").is_null()) c.manual_n = detail::get_field<int>(j, "manual_n");
  c.auto_n = detail::get_field<bool>(j, "auto_n");
  c.renormalize = detail::get_field<bool>(j, "renormalize");
  return c;
}

inline ojson to_json(const ColumnMeta& m) {
  ojson j;
  j["name"] = m.name;
  j["kind"] = to_string(m.kind);
  j["min"] = m.min;
  j["max"] = m.max;
  j["categories"] = m.categories;
  return j;
}

inline ColumnMeta column_from_json(const ojson& j) {
  ColumnMeta m;
  m.name = detail::get_field<std::string>(j, "name");
  m.kind = column_kind_from_string(detail::get_field<std::string>(j, "kind"));
  m.min = detail::get_field<double>(j, "min");
  m.max = detail::get_field<double>(j, "max");
  m.categories = detail::get_field<std::vector<std::string>>(j, "categories");
  return m;
}

inline ojson to_json(const GranuleDescriptor& d) {
  ojson ranges = ojson::array();
  for (const auto& r : d.ranges) {
    ojson j;
    j["attribute"] = r.attribute;
    j["kind"] = to_string(r.kind);
    j["lo"] = r.lo;
    j["hi"] = r.hi;
    j["centroid"] = r.centroid;
    j["rank"] = r.rank;
    j["categories"] = r.categories;
    ranges.push_back(std::move(j));
  }
  ojson j;
  j["summary"] = d.summary();
  j["ranges"] = std::move(ranges);
  return j;
}

inline GranuleDescriptor descriptor_from_json(const ojson& j) {
  GranuleDescriptor d;
  for (const auto& r : detail::get_field<ojson>(j, "ranges")) {
    AttributeRange a;
    a.attribute = detail::get_field<std::string>(r, "attribute");
    a.kind = column_kind_from_string(detail::get_field<std::string>(r, "kind"));
    a.lo = detail::get_field<double>(r, "lo");
    a.hi = detail::get_field<double>(r, "hi");
    a.centroid = detail::get_field<double>(r, "centroid");
    a.rank = detail::get_field<int>(r, "rank");
    a.categories = detail::get_field<std::vector<std::string>>(r, "categories");
    d.ranges.push_back(std::move(a));
  }
  return d;
}

inline ojson to_json(const PolicyTree& t) {
  ojson j;
  j["schema_version"] = kTreeSchemaVersion;
  j["service_type"] = t.service_type;
  j["strategy"] = to_string(t.strategy);
  j["n"] = t.n_threshold;
  j["config"] = to_json(t.config);
  ojson cols = ojson::array();
  for (const auto& c : t.columns) cols.push_back(to_json(c));
  j["columns"] = std::move(cols);
  ojson nodes = ojson::array();
  for (const auto& n : t.nodes) {
    ojson o;
    o["id"] = n.id;
    o["depth"] = n.depth;
    o["leaf"] = n.leaf;
    o["indivisible"] = n.indivisible;
    o["candidates"] = n.candidates;
    o["inquiring"] = n.inquiring;
    ojson children = ojson::array();
    for (std::size_t c = 0; c < n.children.size(); ++c) {
      ojson ch;
      ch["node"] = n.children[c];
      ch["granule"] = to_json(n.descriptors[c]);
      children.push_back(std::move(ch));
    }
    o["children"] = std::move(children);
    nodes.push_back(std::move(o));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

inline PolicyTree tree_from_json(const ojson& j) {
  auto version = detail::get_field<int>(j, "schema_version");
  if (version != kTreeSchemaVersion) throw FormatError("unsupported tree schema version " + std::to_string(version));
  PolicyTree t;
  t.service_type = detail::get_field<std::string>(j, "service_type");
  t.strategy = strategy_from_string(detail::get_field<std::string>(j, "strategy"));
  t.n_threshold = detail::get_field<int>(j, "n");
  t.config = config_from_json(detail::get_field<ojson>(j, "config"));
  for (const auto& c : detail::get_field<ojson>(j, "columns")) t.columns.push_back(column_from_json(c));
  for (const auto& o : detail::get_field<ojson>(j, "nodes")) {
    PolicyNode n;
    n.id = detail::get_field<int>(o, "id");
    n.depth = detail::get_field<int>(o, "depth");
    n.leaf = detail::get_field<bool>(o, "leaf");
    n.indivisible = detail::get_field<bool>(o, "indivisible");
    n.candidates = detail::get_field<std::vector<std::string>>(o, "candidates");
    n.inquiring = detail::get_field<std::vector<std::string>>(o, "inquiring");
    for (const auto& ch : detail::get_field<ojson>(o, "children")) {
      n.children.push_back(detail::get_field<int>(ch, "node"));
      n.descriptors.push_back(descriptor_from_json(detail::get_field<ojson>(ch, "granule")));
    }
    if (n.id != static_cast<int>(t.nodes.size())) throw FormatError("node ids must be consecutive from 0");
    t.nodes.push_back(std::move(n));
  }
  if (t.nodes.empty()) throw FormatError("tree has no nodes");
  for (const auto& n : t.nodes)
    for (int c : n.children)
      if (c <= n.id || c >= static_cast<int>(t.nodes.size())) throw FormatError("bad child reference");
  return t;
}

inline std::string serialize_tree(const PolicyTree& t) { return to_json(t).dump(2) + "\n"; }

inline PolicyTree parse_tree(const std::string& text) {
  try {
    return tree_from_json(ojson::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("tree document is not valid JSON: ") + e.what());
  }
}

// A store holds every tree built from one catalog.
inline std::string serialize_tree_store(const std::vector<PolicyTree>& trees) {
  ojson j;
  j["schema_version"] = kTreeSchemaVersion;
  ojson arr = ojson::array();
  for (const auto& t : trees) arr.push_back(to_json(t));
  j["trees"] = std::move(arr);
  return j.dump(2) + "\n";
}

inline std::vector<PolicyTree> parse_tree_store(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("tree store is not valid JSON: ") + e.what());
  }
  if (detail::get_field<int>(j, "schema_version") != kTreeSchemaVersion)
    throw FormatError("unsupported tree store schema version");
  std::vector<PolicyTree> out;
  for (const auto& t : detail::get_field<ojson>(j, "trees")) out.push_back(tree_from_json(t));
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace elicit
