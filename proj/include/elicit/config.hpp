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

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "elicit/error.hpp"
#include "elicit/policy.hpp"

namespace elicit {

struct PathConfig {
  std::string catalog;
  std::string lexicon;
  std::string synonyms;
  std::string templates;
  std::string tree_store;  // directory holding trees_grc.json and trees_kmeans.json
};

struct ServerConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  int session_ttl_seconds = 1800;
};

struct Config {
  PathConfig paths;
  PolicyConfig policy;
  ServerConfig server;

  void validate() const {
    policy.validate();
    if (server.port < 0 || server.port > 65535) throw ConfigError("port must lie in [0, 65535]");
    if (server.session_ttl_seconds < 1) throw ConfigError("session TTL must be >= 1 second");
    if (server.bind.empty()) throw ConfigError("bind address is empty");
  }
};

namespace detail {

using config_json = nlohmann::ordered_json;

inline void reject_unknown(const config_json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown key '" + where + "." + k + "'");
}

template <class T>
void read_key(const config_json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for '" + where + "." + key + "'");
  }
}

// Relative paths in a config file are taken from the file's directory.
inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  if (p.empty() || base.empty()) return p;
  std::filesystem::path q(p);
  return q.is_absolute() ? p : (base / q).lexically_normal().string();
}

}  // namespace detail

inline Config config_from_document(const nlohmann::ordered_json& j, const std::filesystem::path& base = {}) {
  using detail::read_key;
  Config c;
  detail::reject_unknown(j, {"paths", "clustering", "policy", "server"}, "config");
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    detail::reject_unknown(p, {"catalog", "lexicon", "synonyms", "templates", "tree_store"}, "paths");
    read_key(p, "catalog", c.paths.catalog, "paths");
    read_key(p, "lexicon", c.paths.lexicon, "paths");
    read_key(p, "synonyms", c.paths.synonyms, "paths");
    read_key(p, "templates", c.paths.templates, "paths");
    read_key(p, "tree_store", c.paths.tree_store, "paths");
    for (auto* s : {&c.paths.catalog, &c.paths.lexicon, &c.paths.synonyms, &c.paths.templates, &c.paths.tree_store})
      *s = detail::resolve_path(*s, base);
  }
  if (j.contains("clustering")) {
    const auto& k = j["clustering"];
    detail::reject_unknown(k, {"fuzzifier", "epsilon", "max_iter", "seed", "renormalize"}, "clustering");
    read_key(k, "fuzzifier", c.policy.fuzzifier, "clustering");
    read_key(k, "epsilon", c.policy.epsilon, "clustering");
    read_key(k, "max_iter", c.policy.max_iter, "clustering");
    read_key(k, "seed", c.policy.seed, "clustering");
    read_key(k, "renormalize", c.policy.renormalize, "clustering");
  }
  if (j.contains("policy")) {
    const auto& p = j["policy"];
    detail::reject_unknown(p, {"x", "n", "tau", "strategy", "auto_n"}, "policy");
    read_key(p, "x", c.policy.x, "policy");
    read_key(p, "tau", c.policy.tau, "policy");
    read_key(p, "auto_n", c.policy.auto_n, "policy");
    if (p.contains("n") && !p["n"].is_null()) {
      int n = 0;
      read_key(p, "n", n, "policy");
      c.policy.manual_n = n;
    }
    if (p.contains("strategy")) {
      std::string s;
      read_key(p, "strategy", s, "policy");
      c.policy.strategy = strategy_from_string(s);
    }
  }
  if (j.contains("server")) {
    const auto& s = j["server"];
    detail::reject_unknown(s, {"bind", "port", "session_ttl_seconds"}, "server");
    read_key(s, "bind", c.server.bind, "server");
    read_key(s, "port", c.server.port, "server");
    read_key(s, "session_ttl_seconds", c.server.session_ttl_seconds, "server");
  }
  c.validate();
  return c;
}

inline nlohmann::ordered_json config_document(const Config& c) {
  nlohmann::ordered_json j;
  j["paths"] = {{"catalog", c.paths.catalog},
                {"lexicon", c.paths.lexicon},
                {"synonyms", c.paths.synonyms},
                {"templates", c.paths.templates},
                {"tree_store", c.paths.tree_store}};
  j["clustering"] = {{"fuzzifier", c.policy.fuzzifier},
                     {"epsilon", c.policy.epsilon},
                     {"max_iter", c.policy.max_iter},
                     {"seed", c.policy.seed},
                     {"renormalize", c.policy.renormalize}};
  j["policy"] = {{"x", c.policy.x},
                 {"n", c.policy.manual_n ? nlohmann::ordered_json(*c.policy.manual_n) : nlohmann::ordered_json()},
                 {"tau", c.policy.tau},
                 {"strategy", to_string(c.policy.strategy)},
                 {"auto_n", c.policy.auto_n}};
  j["server"] = {{"bind", c.server.bind},
                 {"port", c.server.port},
                 {"session_ttl_seconds", c.server.session_ttl_seconds}};
  return j;
}

inline Config parse_config(const std::string& text, const std::filesystem::path& base = {}) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_document(j, base);
}

inline Config load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, std::filesystem::path(path).parent_path());
}

}  // namespace elicit
