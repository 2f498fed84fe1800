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


#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "elicit/catalog.hpp"
#include "elicit/eval.hpp"
#include "elicit/synth.hpp"
#include "support/oracles.hpp"

namespace elicit {
namespace {

// ---- hit rate ---------------------------------------------------------------

TEST(HitRate, ClosedFormExhaustive) {
  for (int l = 1; l <= 64; ++l)
    for (int n = 1; n <= l; ++n) {
      double expected = static_cast<double>(n) / static_cast<double>(l);
      EXPECT_NEAR(hit_rate(l, n), expected, 1e-12) << l << "," << n;
      EXPECT_NEAR(oracle::binomial(l - 1, n - 1) / oracle::binomial(l, n), expected, 1e-12);
    }
}

TEST(HitRate, NamedCases) {
  EXPECT_DOUBLE_EQ(hit_rate(8, 8), 1.0);
  EXPECT_NEAR(hit_rate(9, 8), 8.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(hit_rate(1, 1), 1.0);
}

TEST(HitRate, MonteCarloNineChooseEight) {
  Rng rng(99);
  std::vector<int> leaf = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  const int trials = 1000000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    // Partial Fisher-Yates: the first 8 slots are a uniform 8-subset.
    for (int k = 0; k < 8; ++k) std::swap(leaf[static_cast<std::size_t>(k)], leaf[k + rng.index(9 - static_cast<std::size_t>(k))]);
    hits += std::find(leaf.begin(), leaf.begin() + 8, 0) != leaf.begin() + 8;
  }
  EXPECT_NEAR(static_cast<double>(hits) / trials, hit_rate(9, 8), 1e-3);
}

TEST(HitRate, Errors) {
  EXPECT_THROW(hit_rate(3, 4), ConfigError);
  EXPECT_THROW(hit_rate(3, 0), ConfigError);
  EXPECT_THROW(hit_rate(0, 0), ConfigError);
}

// ---- path simulation --------------------------------------------------------

PolicyTree single_leaf(int services, int n) {
  PolicyTree t;
  t.service_type = "x";
  t.n_threshold = n;
  PolicyNode root;
  for (int k = 0; k < services; ++k) root.candidates.push_back("s" + std::to_string(k));
  t.nodes.push_back(root);
  return t;
}

TEST(SimulateAllPaths, SingleLeaf) {
  auto s = summarize(simulate_all_paths(single_leaf(5, 8)));
  EXPECT_EQ(s.cases, 5);
  EXPECT_EQ(s.histogram, (std::map<int, long long>{{1, 5}}));
  EXPECT_DOUBLE_EQ(s.average_rounds, 1.0);
  EXPECT_DOUBLE_EQ(s.average_hit, 1.0);
}

TEST(SimulateAllPaths, OversizedLeafUsesN) {
  auto s = summarize(simulate_all_paths(single_leaf(9, 8)));
  EXPECT_NEAR(s.average_hit, 8.0 / 9.0, 1e-12);
}

TEST(SimulateAllPaths, PbceEndsInRoundSeven) {
  auto cat = pbce_fixture();
  auto tree = build_policy_tree(attribute_matrix(cat, "nursery_teacher"), {}, "nursery_teacher");
  auto s = summarize(simulate_all_paths(tree));
  EXPECT_EQ(s.max_rounds, 7);
  EXPECT_EQ(s.cases, 56);
}

struct OracleTotals {
  long long cases = 0;
  long long rounds = 0;
  double hits = 0.0;
  std::map<int, long long> histogram;
};

// Walks the tree from the root, counting rounds by recursion depth and using
// the closed form min(N, l) / l for the hit rate.
void walk(const PolicyTree& t, int id, int round, OracleTotals& acc) {
  const auto& node = t.node(id);
  if (node.children.empty()) {
    const long long l = static_cast<long long>(node.candidates.size());
    for (long long target = 0; target < l; ++target) {
      ++acc.cases;
      acc.rounds += round;
      acc.hits += static_cast<double>(std::min<long long>(t.n_threshold, l)) / static_cast<double>(l);
      ++acc.histogram[round];
    }
    return;
  }
  for (int c : node.children) walk(t, c, round + 1, acc);
}

TEST(SimulateAllPaths, MatchesRecursiveWalkOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticCatalogSpec spec;
    spec.seed = seed;
    spec.service_types = 1;
    spec.providers = 100;
    spec.profiles_per_type = 4 + static_cast<int>(seed);
    auto cat = generate_catalog(spec).catalog;
    auto type = cat.service_types().front();
    auto m = attribute_matrix(cat, type);
    for (const auto& tree : {build_policy_tree(m, {}, type), kmeans_policy_tree(m, 8, seed, type)}) {
      OracleTotals o;
      walk(tree, 0, 1, o);
      auto rep = simulate_all_paths(tree);
      auto s = summarize(rep);
      EXPECT_EQ(s.cases, 100);
      EXPECT_EQ(s.cases, o.cases);
      EXPECT_EQ(s.histogram, o.histogram);
      EXPECT_EQ(s.total_rounds, o.rounds);
      EXPECT_NEAR(s.average_hit, o.hits / static_cast<double>(o.cases), 1e-12);
    }
  }
}

TEST(SimulationInvariants, HistogramTotalsAndAverages) {
  auto synth = generate_catalog(SyntheticCatalogSpec{});
  std::vector<PolicyTree> trees;
  for (const auto& type : synth.catalog.service_types())
    trees.push_back(build_policy_tree(attribute_matrix(synth.catalog, type), {}, type));
  auto rep = simulate_all(trees);
  long long all = 0;
  for (const auto& t : rep.types) {
    auto s = summarize(t);
    long long total = 0, rounds = 0;
    for (auto [r, n] : s.histogram) {
      total += n;
      rounds += r * n;
    }
    EXPECT_EQ(total, s.cases);
    EXPECT_EQ(static_cast<long long>(synth.catalog.records_of(t.service_type).size()), s.cases);
    EXPECT_EQ(s.average_rounds, static_cast<double>(rounds) / static_cast<double>(total));
    all += total;
  }
  EXPECT_EQ(all, 827);
  EXPECT_EQ(summarize(rep).cases, 827);
}

TEST(SimulateAll, RejectsMixedStrategies) {
  auto a = single_leaf(3, 8);
  auto b = single_leaf(3, 8);
  b.strategy = Strategy::kmeans;
  EXPECT_THROW(simulate_all({a, b}), ConfigError);
}

// ---- comparison -------------------------------------------------------------

SimulationReport report_of(const PolicyTree& t) { return simulate_all({t}); }

TEST(Compare, IdenticalReports) {
  auto rep = report_of(single_leaf(5, 8));
  auto c = compare(rep, rep);
  EXPECT_DOUBLE_EQ(c.reduction, 0.0);
  EXPECT_DOUBLE_EQ(c.hit_gap, 0.0);
  EXPECT_EQ(c.grc_curve, c.kmeans_curve);
}

TEST(Compare, CatalogMismatch) {
  EXPECT_THROW(compare(report_of(single_leaf(5, 8)), report_of(single_leaf(6, 8))), ConfigError);
}

TEST(Compare, SwappingInputsNegatesTheRoundDifference) {
  auto cat = pbce_fixture();
  auto m = attribute_matrix(cat, "nursery_teacher");
  PolicyConfig cfg;
  cfg.manual_n = 3;
  auto a = simulate_all({build_policy_tree(m, cfg, "nursery_teacher")});
  auto b = simulate_all({kmeans_policy_tree(m, 3, 1, "nursery_teacher")});
  auto ab = compare(a, b), ba = compare(b, a);
  EXPECT_DOUBLE_EQ(ab.round_difference, -ba.round_difference);
  EXPECT_DOUBLE_EQ(ab.hit_gap, -ba.hit_gap);
  // The reduction is relative to the second argument, so swapping rescales it.
  EXPECT_NEAR(ab.reduction * ab.kmeans.average_rounds, -ba.reduction * ba.kmeans.average_rounds, 1e-12);
}

TEST(Compare, CurvesAreCumulativeAndEndAtHundred) {
  auto cat = housekeeping_fixture();
  auto m = attribute_matrix(cat, "housekeeping");
  auto grc = build_policy_tree(m, {}, "housekeeping");
  auto c = compare(report_of(grc), report_of(kmeans_policy_tree(m, grc.n_threshold, 1, "housekeeping")));
  for (const auto* curve : {&c.grc_curve, &c.kmeans_curve}) {
    ASSERT_FALSE(curve->empty());
    for (std::size_t i = 1; i < curve->size(); ++i) EXPECT_GE((*curve)[i].second, (*curve)[i - 1].second);
    EXPECT_NEAR(curve->back().second, 100.0, 1e-9);
  }
  EXPECT_GT(c.reduction, 0.0);
  EXPECT_GT(c.grc.terminal_hit, 0.0);
  EXPECT_GT(c.kmeans.terminal_hit, 0.0);
}

TEST(ReportText, Blocks) {
  auto rep = report_of(single_leaf(5, 8));
  std::ostringstream out;
  write_report(rep, out);
  auto text = out.str();
  EXPECT_NE(text.find("strategy grc\n"), std::string::npos);
  EXPECT_NE(text.find("[type x]\n"), std::string::npos);
  EXPECT_NE(text.find("[overall]\n"), std::string::npos);
  EXPECT_NE(text.find("histogram 1:5\n"), std::string::npos);
  std::ostringstream curve;
  write_curve({{1, 50.0}, {2, 100.0}}, curve);
  EXPECT_EQ(curve.str(), "# round cumulative_percent\n1 50.000000\n2 100.000000\n");
}

// ---- synthetic catalog ------------------------------------------------------

std::string catalog_text(const Catalog& c) {
  std::ostringstream out;
  write_catalog(c, out);
  return out.str();
}

TEST(GenerateCatalog, DeterministicUnderSeed) {
  SyntheticCatalogSpec spec;
  EXPECT_EQ(catalog_text(generate_catalog(spec).catalog), catalog_text(generate_catalog(spec).catalog));
  spec.seed = 2;
  EXPECT_NE(catalog_text(generate_catalog(spec).catalog), catalog_text(generate_catalog(SyntheticCatalogSpec{}).catalog));
}

TEST(GenerateCatalog, DefaultShape) {
  auto synth = generate_catalog(SyntheticCatalogSpec{});
  EXPECT_EQ(synth.catalog.records.size(), 827u);
  EXPECT_EQ(synth.catalog.service_types().size(), 16u);
  EXPECT_GE(synth.catalog.attributes.size(), 9u);
  std::set<ColumnKind> kinds;
  for (const auto& a : SyntheticCatalogSpec{}.attributes) kinds.insert(a.kind);
  EXPECT_EQ(kinds.size(), 3u);
}

TEST(GenerateCatalog, InconsistentSpecs) {
  SyntheticCatalogSpec spec;
  spec.providers = 20;
  EXPECT_THROW(generate_catalog(spec), ConfigError);
  spec = {};
  spec.attributes[0].modes = 1000;
  EXPECT_THROW(generate_catalog(spec), ConfigError);
  spec = {};
  spec.service_types = 0;
  EXPECT_THROW(generate_catalog(spec), ConfigError);
}

TEST(GenerateCatalog, PlantedPriceModesRecoveredByFcm) {
  SyntheticCatalogSpec spec;
  spec.service_types = 1;
  spec.providers = 120;
  for (auto& a : spec.attributes)
    if (a.name == "price") a.modes = 2;
  auto synth = generate_catalog(spec);
  auto type = synth.catalog.service_types().front();
  auto full = attribute_matrix(synth.catalog, type);
  std::size_t col = full.column_index("price");
  Matrix price(full.n(), 1);
  for (std::size_t j = 0; j < full.n(); ++j) price(j, 0) = full.values(j, col);
  auto part = fcm(price, 2, FcmOptions{});
  auto labels = hard_assignment(part.memberships);
  const auto& truth = synth.planted_mode.at("price");
  ASSERT_EQ(truth.size(), labels.size());
  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      ++pairs;
      agree += (labels[i] == labels[j]) == (truth[i] == truth[j]);
    }
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(pairs), 0.95);
}

}  // namespace
}  // namespace elicit
