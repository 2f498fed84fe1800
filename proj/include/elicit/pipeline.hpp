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

// Offline pipeline shared by the command line tool and the server: catalogs
// from presets, tree stores on disk, simulation outputs and threshold checks.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "elicit/catalog.hpp"
#include "elicit/config.hpp"
#include "elicit/dialogue.hpp"
#include "elicit/eval.hpp"
#include "elicit/nlu.hpp"
#include "elicit/synth.hpp"
#include "elicit/tree_io.hpp"

namespace elicit {

inline Catalog preset_catalog(const std::string& name, std::uint64_t seed = 1) {
  if (name == "default") {
    SyntheticCatalogSpec spec;
    spec.seed = seed;
    return generate_catalog(spec).catalog;
  }
  if (name == "pbce") return pbce_fixture();
  if (name == "housekeeping") return housekeeping_fixture();
  throw ConfigError("unknown preset '" + name + "' (expected default, pbce or housekeeping)");
}

struct BuiltTrees {
  std::vector<PolicyTree> grc;
  std::vector<PolicyTree> kmeans;
};

// One tree per service type. The k-means baseline reuses the threshold the
// configuration resolves to, so both strategies stop at the same N.
inline BuiltTrees build_trees(const Catalog& catalog, const PolicyConfig& config, bool with_grc = true,
                              bool with_kmeans = true) {
  config.validate();
  BuiltTrees out;
  for (const auto& type : catalog.service_types()) {
    auto m = attribute_matrix(catalog, type);
    const int n = resolve_threshold(m, config);
    if (with_grc) {
      PolicyConfig g = config;
      g.strategy = Strategy::grc;
      out.grc.push_back(build_tree_with_threshold(m, g, n, type));
    }
    if (with_kmeans) {
      PolicyConfig k = config;
      k.strategy = Strategy::kmeans;
      out.kmeans.push_back(build_tree_with_threshold(m, k, n, type));
    }
  }
  return out;
}

inline std::string tree_store_path(const std::string& dir, Strategy s) {
  return (std::filesystem::path(dir) / (std::string("trees_") + to_string(s) + ".json")).string();
}

inline std::vector<PolicyTree> load_tree_store(const std::string& dir, Strategy s) {
  auto path = tree_store_path(dir, s);
  if (!std::filesystem::exists(path)) throw NotFound("no " + std::string(to_string(s)) + " trees at '" + path + "'");
  auto trees = parse_tree_store(read_text_file(path));
  for (const auto& t : trees)
    if (t.strategy != s) throw FormatError("'" + path + "' holds a tree of another strategy");
  return trees;
}

inline void save_tree_store(const std::string& dir, Strategy s, const std::vector<PolicyTree>& trees) {
  std::filesystem::create_directories(dir);
  write_text_file(tree_store_path(dir, s), serialize_tree_store(trees));
}

// ---------------------------------------------------------------------------
// Acceptance thresholds for the strategy comparison.

inline constexpr double kMaxRoundRatio = 0.75;  // GrC rounds / k-means rounds
inline constexpr double kMaxHitGapPoints = 2.0;

struct CheckResult {
  bool rounds_ok = false;
  bool hits_ok = false;
  bool ok() const { return rounds_ok && hits_ok; }
};

inline CheckResult check_thresholds(const Comparison& c) {
  CheckResult r;
  r.rounds_ok = c.kmeans.average_rounds > 0.0 && c.grc.average_rounds <= kMaxRoundRatio * c.kmeans.average_rounds;
  r.hits_ok = std::fabs(c.hit_gap) <= kMaxHitGapPoints;
  return r;
}

// Both completion curves as a static line chart.
inline void write_curve_svg(const Comparison& c, std::ostream& out) {
  const double w = 640, h = 400, left = 60, right = 20, top = 30, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  int last = 1;
  for (const auto* curve : {&c.grc_curve, &c.kmeans_curve})
    for (const auto& [round, pct] : *curve) last = std::max(last, round);
  auto px = [&](int round) { return left + pw * (last > 1 ? (round - 1.0) / (last - 1.0) : 0.5); };
  auto py = [&](double pct) { return top + ph * (1.0 - pct / 100.0); };
  auto fmt = [](double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(1);
    s << v;
    return s.str();
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int r = 1; r <= last; ++r)
    out << "<text x=\"" << fmt(px(r)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << r
        << "</text>\n";
  for (int pct = 0; pct <= 100; pct += 25)
    out << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(pct) + 4) << "\" text-anchor=\"end\">" << pct
        << "%</text>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">round</text>\n";

  struct Series {
    const Curve* curve;
    const char* colour;
    const char* name;
  };
  int row = 0;
  for (const Series& s : {Series{&c.grc_curve, "#1f77b4", "GrC"}, Series{&c.kmeans_curve, "#d62728", "k-means"}}) {
    out << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"2\" points=\"";
    for (const auto& [round, pct] : *s.curve) out << fmt(px(round)) << ',' << fmt(py(pct)) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << left + pw - 90 << "\" y=\"" << top + ph - 40 + 16 * row << "\" fill=\"" << s.colour
        << "\">" << s.name << "</text>\n";
    ++row;
  }
  out << "</svg>\n";
}

struct SimulationOutputs {
  SimulationReport grc;
  SimulationReport kmeans;
  Comparison comparison;
};

inline SimulationOutputs simulate_stores(const std::string& tree_dir) {
  SimulationOutputs o;
  o.grc = simulate_all(load_tree_store(tree_dir, Strategy::grc));
  o.kmeans = simulate_all(load_tree_store(tree_dir, Strategy::kmeans));
  o.comparison = compare(o.grc, o.kmeans);
  return o;
}

// report_grc.txt, report_kmeans.txt, comparison.txt, curve_*.tsv, rounds.svg
inline void write_simulation_outputs(const SimulationOutputs& o, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw Error("cannot write '" + (std::filesystem::path(dir) / name).string() + "'");
    return f;
  };
  {
    auto f = open("report_grc.txt");
    write_report(o.grc, f);
  }
  {
    auto f = open("report_kmeans.txt");
    write_report(o.kmeans, f);
  }
  {
    auto f = open("comparison.txt");
    write_comparison(o.comparison, f);
  }
  {
    auto f = open("curve_grc.tsv");
    write_curve(o.comparison.grc_curve, f);
  }
  {
    auto f = open("curve_kmeans.tsv");
    write_curve(o.comparison.kmeans_curve, f);
  }
  {
    auto f = open("rounds.svg");
    write_curve_svg(o.comparison, f);
  }
}

// ---------------------------------------------------------------------------
// Registry assembly from configured paths, falling back to a data directory.

struct Resources {
  SlotLexicon lexicon;
  Templates templates;
  std::string synonyms_path;
};

inline Resources load_resources(const PathConfig& paths, const std::string& data_dir) {
  auto pick = [&](const std::string& configured, const char* file) {
    return configured.empty() ? (std::filesystem::path(data_dir) / file).string() : configured;
  };
  Resources r;
  r.lexicon = load_slot_lexicon_file(pick(paths.lexicon, "slot_lexicon.tsv"));
  r.templates = load_templates_file(pick(paths.templates, "templates.tsv"));
  r.synonyms_path = pick(paths.synonyms, "synonyms.tsv");
  if (!std::filesystem::exists(r.synonyms_path)) throw NotFound("cannot open '" + r.synonyms_path + "'");
  return r;
}

inline Registry assemble_registry(Catalog catalog, std::vector<PolicyTree> trees, const Resources& res) {
  std::ifstream syn(res.synonyms_path);
  return registry_from_trees(std::move(catalog), res.lexicon, res.templates, std::move(trees), &syn);
}

}  // namespace elicit
