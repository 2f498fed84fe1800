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

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "elicit/config.hpp"
#include "elicit/dialogue.hpp"
#include "elicit/http_api.hpp"
#include "elicit/pipeline.hpp"

#ifndef ELICIT_DEFAULT_DATA_DIR
#define ELICIT_DEFAULT_DATA_DIR "data"
#endif

namespace elicit::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kError = 2 };

struct Options {
  std::string config_path;
  std::string data_dir = ELICIT_DEFAULT_DATA_DIR;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<int> x;
  std::optional<int> n;
  bool auto_n = false;
  std::string preset;
  std::string catalog;
  std::string trees;
  std::string out;
  bool check = false;
  std::optional<std::string> bind;
  std::optional<int> port;
  std::optional<int> ttl;
  std::string transcript;
};

inline Config effective_config(const Options& o) {
  Config c = o.config_path.empty() ? Config{} : load_config_file(o.config_path);
  if (o.seed) c.policy.seed = *o.seed;
  if (o.x) c.policy.x = *o.x;
  if (o.n) c.policy.manual_n = *o.n;
  if (o.auto_n) c.policy.auto_n = true;
  if (o.strategy && *o.strategy != "both") c.policy.strategy = strategy_from_string(*o.strategy);
  if (!o.catalog.empty()) c.paths.catalog = o.catalog;
  if (!o.trees.empty()) c.paths.tree_store = o.trees;
  if (o.bind) c.server.bind = *o.bind;
  if (o.port) c.server.port = *o.port;
  if (o.ttl) c.server.session_ttl_seconds = *o.ttl;
  c.validate();
  return c;
}

// A catalog file named in the config or on the command line wins over a preset.
inline Catalog input_catalog(const Options& o, const Config& c, std::ostream& err) {
  if (!c.paths.catalog.empty() && o.preset.empty()) {
    auto loaded = load_catalog_file(c.paths.catalog);
    if (loaded.rejected > 0) err << "skipped " << loaded.rejected << " malformed rows\n";
    return std::move(loaded.catalog);
  }
  return preset_catalog(o.preset.empty() ? "default" : o.preset, c.policy.seed);
}

inline std::string tree_dir(const Config& c) { return c.paths.tree_store.empty() ? "trees" : c.paths.tree_store; }

inline int cmd_gen_data(const Options& o, std::ostream& out) {
  Config c = effective_config(o);
  Catalog cat = preset_catalog(o.preset.empty() ? "default" : o.preset, c.policy.seed);
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error("cannot write '" + o.out + "'");
  write_catalog(cat, f);
  out << "wrote " << cat.records.size() << " providers of " << cat.service_types().size() << " service types to "
      << o.out << "\n";
  return kOk;
}

inline int cmd_build(const Options& o, std::ostream& out, std::ostream& err) {
  Config c = effective_config(o);
  Catalog cat = input_catalog(o, c, err);
  const std::string which = o.strategy.value_or("both");
  if (which != "both") strategy_from_string(which);
  const bool grc = which == "both" || which == "grc";
  const bool km = which == "both" || which == "kmeans";
  auto built = build_trees(cat, c.policy, grc, km);
  const auto dir = tree_dir(c);
  if (grc) save_tree_store(dir, Strategy::grc, built.grc);
  if (km) save_tree_store(dir, Strategy::kmeans, built.kmeans);
  for (const auto* set : {&built.grc, &built.kmeans})
    for (const auto& t : *set)
      out << t.service_type << '\t' << to_string(t.strategy) << "\tN=" << t.n_threshold << '\t' << t.nodes.size()
          << " nodes\n";
  out << "trees written to " << dir << "\n";
  return kOk;
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
  Config c = effective_config(o);
  auto outputs = simulate_stores(tree_dir(c));
  const std::string dir = o.out.empty() ? "results" : o.out;
  write_simulation_outputs(outputs, dir);
  write_comparison(outputs.comparison, out);
  out << "outputs written to " << dir << "\n";
  if (!o.check) return kOk;
  auto r = check_thresholds(outputs.comparison);
  out << (r.rounds_ok ? "PASS" : "FAIL") << " rounds: GrC " << outputs.comparison.grc.average_rounds
      << " <= " << kMaxRoundRatio << " x k-means " << outputs.comparison.kmeans.average_rounds << "\n";
  out << (r.hits_ok ? "PASS" : "FAIL") << " hit gap: |" << outputs.comparison.hit_gap << "| <= " << kMaxHitGapPoints
      << " points\n";
  return r.ok() ? kOk : kCheckFailed;
}

inline std::shared_ptr<const Registry> serving_registry(const Options& o, const Config& c, std::ostream& err) {
  Catalog cat = input_catalog(o, c, err);
  auto trees = load_tree_store(tree_dir(c), c.policy.strategy);
  auto res = load_resources(c.paths, o.data_dir);
  return std::make_shared<const Registry>(assemble_registry(std::move(cat), std::move(trees), res));
}

// One utterance per input line. "@k" selects option k (zero-based), the
// same as an API turn carrying {"option": k}. Each reply is printed as one
// JSON document per line.
inline int cmd_chat(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  Config c = effective_config(o);
  auto reg = serving_registry(o, c, err);
  std::optional<Session> session;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Reply reply;
    if (!session || session->end_tag == 1) {
      auto st = start_session(line, *reg, "cli");
      reply = st.reply;
      session = std::move(st.session);
    } else if (line[0] == '@') {
      reply = handle_turn(*session, "", *reg, static_cast<std::size_t>(std::stoul(line.substr(1))));
    } else {
      reply = handle_turn(*session, line, *reg);
    }
    out << reply_document(reply).dump() << "\n";
  }
  return kOk;
}

inline httplib::Server* g_server = nullptr;

inline int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  Config c = effective_config(o);
  auto reg = serving_registry(o, c, err);
  std::unique_ptr<std::ofstream> transcript_file;
  std::unique_ptr<TranscriptLog> log;
  if (!o.transcript.empty()) {
    transcript_file = std::make_unique<std::ofstream>(o.transcript, std::ios::app);
    log = std::make_unique<TranscriptLog>(transcript_file.get());
  }
  ApiService api(reg, c.server, [] { return std::chrono::steady_clock::now(); }, log.get());
  httplib::Server server;
  mount_api(server, api);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  out << "serving " << reg->trees.size() << " service types on " << c.server.bind << ":" << c.server.port
      << std::endl;
  bool ok = server.listen(c.server.bind, c.server.port);
  g_server = nullptr;
  if (!ok && !server.is_running()) {
    err << "error: cannot listen on " << c.server.bind << ":" << c.server.port << "\n";
    return kError;
  }
  return kOk;
}

inline int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Requirement elicitation: policy tree building, simulation and serving"};
  app.require_subcommand(1);
  Options o;

  auto shared = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "seed for clustering and data generation");
    sub->add_option("--data-dir", o.data_dir, "directory with lexicon, synonym and template files");
  };
  auto catalog_opts = [&o](CLI::App* sub) {
    sub->add_option("--preset", o.preset, "built-in catalog")->check(CLI::IsMember({"default", "pbce", "housekeeping"}));
    sub->add_option("--catalog", o.catalog, "catalog CSV file");
  };
  auto policy_opts = [&o](CLI::App* sub) {
    sub->add_option("--x", o.x, "upper limit of one-shot recommendation");
    sub->add_option("--n", o.n, "manual leaf threshold N (1 <= N <= X)");
    sub->add_flag("--auto-n", o.auto_n, "derive N from a provisional tree");
  };

  auto* gen = app.add_subcommand("gen-data", "write a preset catalog as CSV");
  shared(gen);
  gen->add_option("--preset", o.preset, "built-in catalog")->check(CLI::IsMember({"default", "pbce", "housekeeping"}));
  gen->add_option("--out", o.out, "output CSV file")->required();

  auto* build = app.add_subcommand("build", "build policy trees for every service type");
  shared(build);
  catalog_opts(build);
  policy_opts(build);
  build->add_option("--strategy", o.strategy, "grc, kmeans or both")
      ->check(CLI::IsMember({"grc", "kmeans", "both"}));
  build->add_option("--out", o.trees, "tree store directory");

  auto* sim = app.add_subcommand("simulate", "traverse every answer path and compare strategies");
  shared(sim);
  sim->add_option("--trees", o.trees, "tree store directory");
  sim->add_option("--out", o.out, "output directory for reports, curves and the plot");
  sim->add_flag("--check", o.check, "exit 1 when the comparison misses its thresholds");

  auto* serve = app.add_subcommand("serve", "run the HTTP session API");
  shared(serve);
  catalog_opts(serve);
  serve->add_option("--trees", o.trees, "tree store directory");
  serve->add_option("--strategy", o.strategy, "which stored trees to serve")->check(CLI::IsMember({"grc", "kmeans"}));
  serve->add_option("--bind", o.bind, "bind address");
  serve->add_option("--port", o.port, "port");
  serve->add_option("--ttl", o.ttl, "session TTL in seconds");
  serve->add_option("--transcript", o.transcript, "append JSON turn records to this file");

  auto* chat = app.add_subcommand("chat", "run sessions over stdin, one JSON reply per line");
  shared(chat);
  catalog_opts(chat);
  chat->add_option("--trees", o.trees, "tree store directory");
  chat->add_option("--strategy", o.strategy, "which stored trees to use")->check(CLI::IsMember({"grc", "kmeans"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*gen) return cmd_gen_data(o, out);
    if (*build) return cmd_build(o, out, err);
    if (*sim) return cmd_simulate(o, out);
    if (*serve) return cmd_serve(o, out, err);
    if (*chat) return cmd_chat(o, in, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace elicit::cli
