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


// Acceptance criteria 1-10. Each check prints one PASS/FAIL line; the exit
// status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "elicit/clustering.hpp"
#include "elicit/dialogue.hpp"
#include "elicit/embedding.hpp"
#include "elicit/eval.hpp"
#include "elicit/pipeline.hpp"
#include "elicit/policy.hpp"
#include "elicit/synth.hpp"
#include "elicit/tree_io.hpp"
#include "support/data.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/tree_checks.hpp"

namespace elicit {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string num(double v, int precision = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

oracle::Grid to_grid(const Matrix& m) {
  oracle::Grid g(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

Matrix clouds(const std::vector<std::vector<double>>& centers, std::size_t per, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(centers.size() * per, centers[0].size());
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t k = 0; k < per; ++k)
      for (std::size_t t = 0; t < centers[c].size(); ++t) m(c * per + k, t) = centers[c][t] + rng.normal(0, sd);
  return m;
}

// ---- 1 and 2: default synthetic catalog -------------------------------------

struct DefaultRun {
  Comparison comparison;
  double seconds = 0.0;
  std::size_t providers = 0, types = 0, attributes = 0;
};

const DefaultRun& default_run() {
  static const DefaultRun run = [] {
    DefaultRun r;
    auto start = std::chrono::steady_clock::now();
    SyntheticCatalogSpec spec;
    spec.seed = 1;
    Catalog cat = generate_catalog(spec).catalog;
    PolicyConfig cfg;
    cfg.seed = 1;
    auto trees = build_trees(cat, cfg);
    r.comparison = compare(simulate_all(trees.grc), simulate_all(trees.kmeans));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.providers = cat.records.size();
    r.types = cat.service_types().size();
    r.attributes = cat.attributes.size();
    return r;
  }();
  return run;
}

Outcome catalog_shape(const DefaultRun& r) {
  Outcome o;
  if (r.providers != 827 || r.types != 16 || r.attributes < 9)
    o.fail("catalog shape " + std::to_string(r.providers) + "/" + std::to_string(r.types) + "/" +
           std::to_string(r.attributes));
  return o;
}

Outcome criterion_1() {
  const auto& r = default_run();
  Outcome o = catalog_shape(r);
  const auto& c = r.comparison;
  o.detail = "GrC " + num(c.grc.average_rounds) + " vs k-means " + num(c.kmeans.average_rounds) + " rounds, ratio " +
             num(c.grc.average_rounds / c.kmeans.average_rounds) + ", " + num(r.seconds, 2) + " s";
  if (!(c.grc.average_rounds <= kMaxRoundRatio * c.kmeans.average_rounds)) o.fail(o.detail);
  if (r.seconds >= 120.0) o.fail("build+simulate took " + num(r.seconds, 1) + " s");
  return o;
}

Outcome criterion_2() {
  const auto& r = default_run();
  Outcome o = catalog_shape(r);
  const auto& c = r.comparison;
  o.detail = "GrC " + num(100 * c.grc.average_hit, 2) + "% vs k-means " + num(100 * c.kmeans.average_hit, 2) +
             "%, gap " + num(c.hit_gap, 2) + " points";
  if (!(std::fabs(c.hit_gap) <= kMaxHitGapPoints)) o.fail(o.detail);
  return o;
}

// ---- 3: membership and objective against double-loop oracles ----------------

Outcome criterion_3() {
  Outcome o;
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t p = 1 + rng.index(6), n = 1 + rng.index(50);
    double m = rng.uniform(1.1, 4.0);
    Matrix d(p, n);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = rng.uniform(0.05, 3.0);
    auto mu = membership(d, m);
    auto ref = oracle::membership(to_grid(d), m);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::fabs(mu(i, j) - ref[i][j]));
    double j_lib = objective(mu, d, m), j_ref = oracle::objective(to_grid(mu), to_grid(d), m);
    worst = std::max(worst, std::fabs(j_lib - j_ref) / std::max(1.0, std::fabs(j_ref)));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", worst);
  o.detail = std::string("100 instances, max deviation ") + buf;
  if (!(worst <= 1e-12)) o.fail(o.detail);
  return o;
}

// ---- 4: FCM properties over 50 seeded runs ----------------------------------

Outcome criterion_4() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed * 31);
    std::size_t n = 6 + rng.index(45), na = 1 + rng.index(5);
    Matrix data(n, na);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t t = 0; t < na; ++t) data(j, t) = rng.uniform();
    int p = 2 + static_cast<int>(rng.index(5));
    FcmOptions opt;
    opt.seed = seed;
    opt.epsilon = 1e-12;
    opt.max_iter = 2000;
    auto part = fcm(data, p, opt);
    const std::string tag = "seed " + std::to_string(seed);
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (int i = 0; i < p; ++i) col += part.memberships(static_cast<std::size_t>(i), j);
      if (std::fabs(col - 1.0) > 1e-9) o.fail(tag + ": column sum " + std::to_string(col));
    }
    for (std::size_t t = 1; t < part.objective_history.size(); ++t)
      if (part.objective_history[t] > part.objective_history[t - 1] + 1e-12) o.fail(tag + ": objective rose");
    auto remu = membership(centroid_distances(data, part.centroids), opt.fuzzifier);
    for (std::size_t k = 0; k < remu.data().size(); ++k)
      if (std::fabs(remu.data()[k] - part.memberships.data()[k]) > 1e-6) o.fail(tag + ": not a fixed point");
    auto again = fcm(data, p, opt);
    if (!(again.memberships == part.memberships) || again.objective != part.objective) o.fail(tag + ": not deterministic");
  }
  if (o.pass) o.detail = "50 runs";
  return o;
}

// ---- 5: hit rate closed form ------------------------------------------------

Outcome criterion_5() {
  Outcome o;
  for (int l = 1; l <= 64; ++l)
    for (int n = 1; n <= l; ++n)
      if (std::fabs(hit_rate(l, n) - static_cast<double>(n) / l) > 1e-12)
        o.fail("l=" + std::to_string(l) + " n=" + std::to_string(n));
  Rng rng(55);
  std::vector<int> leaf = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  const int trials = 1000000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t k = 0; k < 8; ++k) std::swap(leaf[k], leaf[k + rng.index(9 - k)]);
    hits += std::find(leaf.begin(), leaf.begin() + 8, 0) != leaf.begin() + 8;
  }
  double mc = static_cast<double>(hits) / trials;
  if (o.pass) o.detail = "exhaustive to 64; Monte-Carlo (9,8) " + num(mc, 5) + " vs " + num(hit_rate(9, 8), 5);
  if (std::fabs(mc - hit_rate(9, 8)) > 1e-3) o.fail("Monte-Carlo " + num(mc, 5));
  return o;
}

// ---- 6: leaf-threshold derivation ------------------------------------------

Outcome criterion_6() {
  Outcome o;
  struct Golden {
    int x;
    std::vector<int> res;
    int expected;
  };
  const std::vector<Golden> golden = {
      {8, {3, 3, 5, 5, 5, 8, 8, 9, 9, 9}, 8},
      {8, {2, 4, 4, 6, 6, 6, 7}, 7},
      {8, {1, 2, 3, 3, 3, 4, 4, 4, 4, 4, 4, 5, 5, 6}, 4},
  };
  for (const auto& g : golden) {
    int got = auto_n(g.x, g.res);
    if (got != g.expected) o.fail("golden trace gave " + std::to_string(got) + ", want " + std::to_string(g.expected));
  }
  for (int v = 1; v <= 8; ++v)
    if (auto_n(8, std::vector<int>(5, v)) != v) o.fail("single-valued Res " + std::to_string(v));
  Rng rng(6006);
  for (int trial = 0; trial < 1000; ++trial) {
    int x = 1 + static_cast<int>(rng.index(12));
    std::vector<int> res(1 + rng.index(30));
    for (auto& r : res) r = 1 + static_cast<int>(rng.index(16));
    if (auto_n(x, res) > x) o.fail("exceeded X on trial " + std::to_string(trial));
  }
  if (o.pass) o.detail = "3 golden traces, single-valued Res, 1000 random arrays";
  return o;
}

// ---- 7: tree invariants -----------------------------------------------------

void check_tree(const PolicyTree& t, std::size_t attributes, const std::string& tag, Outcome& o) {
  auto v = fixture::tree_violations(t, attributes);
  if (!v.empty()) o.fail(tag + ": " + v.front());
  auto text = serialize_tree(t);
  if (serialize_tree(parse_tree(text)) != text) o.fail(tag + ": serialization does not round-trip");
}

Outcome criterion_7() {
  Outcome o;
  int trees = 0;
  for (const auto& cat : {pbce_fixture(), housekeeping_fixture()}) {
    auto built = build_trees(cat, PolicyConfig{});
    for (const auto* set : {&built.grc, &built.kmeans})
      for (const auto& t : *set) {
        check_tree(t, cat.attributes.size(), t.service_type + " " + to_string(t.strategy), o);
        ++trees;
      }
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 7121);
    SyntheticCatalogSpec spec;
    spec.seed = seed;
    spec.service_types = 2;
    spec.providers = 40 + static_cast<int>(rng.index(140));
    spec.profiles_per_type = 2 + static_cast<int>(rng.index(6));
    spec.spread = rng.uniform(0.03, 0.2);
    spec.category_fidelity = rng.uniform(0.6, 1.0);
    spec.min_code_distance = 1 + static_cast<int>(rng.index(3));
    Catalog cat = generate_catalog(spec).catalog;
    PolicyConfig cfg;
    cfg.seed = seed;
    cfg.auto_n = seed % 2 == 1;
    auto built = build_trees(cat, cfg);
    for (const auto* set : {&built.grc, &built.kmeans})
      for (const auto& t : *set) {
        check_tree(t, cat.attributes.size(), "seed " + std::to_string(seed) + " " + t.service_type, o);
        ++trees;
      }
  }
  if (o.pass) o.detail = std::to_string(trees) + " trees from 2 fixtures and 20 random catalogs";
  return o;
}

// ---- 8: worked example ------------------------------------------------------

Outcome criterion_8() {
  Outcome o;
  const auto& reg = fixture::housekeeping_registry();
  auto st = start_session(fixture::kHousekeeperRequest, reg, "acceptance");
  const std::string expected =
      reg.templates.fill("question", {{"attributes", *reg.templates.display_name("experience")}});
  if (!st.session) {
    o.fail("no session");
    return o;
  }
  if (st.reply.kind != ReplyKind::question || st.reply.text != expected)
    o.fail("first reply was '" + st.reply.text + "'");
  Session s = *st.session;
  Reply last = st.reply;
  for (const char* answer : {"under 5 years experience", "option 1", "option 1", "option 1"}) {
    if (s.end_tag == 1) break;
    last = handle_turn(s, answer, reg);
  }
  const auto n = static_cast<std::size_t>(s.tree->n_threshold);
  if (last.end_tag != 1 || last.kind != ReplyKind::final_recommendation) o.fail("dialogue did not finish");
  if (last.services.empty() || last.services.size() > n)
    o.fail(std::to_string(last.services.size()) + " providers for N=" + std::to_string(n));
  if (o.pass)
    o.detail = "'" + st.reply.text + "', then " + std::to_string(last.services.size()) + " providers at round " +
               std::to_string(last.round);
  return o;
}

// ---- 9: granule count recovery ----------------------------------------------

Outcome criterion_9() {
  Outcome o;
  const std::vector<std::vector<std::vector<double>>> planted = {
      {{0.15, 0.2}, {0.85, 0.8}},
      {{0.1, 0.1}, {0.9, 0.15}, {0.5, 0.9}},
      {{0.1, 0.1}, {0.9, 0.1}, {0.1, 0.9}, {0.9, 0.9}},
  };
  std::vector<std::string> found;
  for (std::size_t k = 0; k < planted.size(); ++k) {
    auto data = clouds(planted[k], 10, 0.035, 900 + k);
    auto sel = select_p(data, FcmOptions{});
    found.push_back(std::to_string(sel.p));
    if (sel.p != static_cast<int>(planted[k].size()))
      o.fail("planted " + std::to_string(planted[k].size()) + ", selected " + std::to_string(sel.p));
    for (const auto& [p, value] : sel.sweep)
      if (value < 1.0 / p - 1e-12 || value > 1.0 + 1e-12) o.fail("fpc " + num(value) + " at p=" + std::to_string(p));
  }
  if (o.pass) o.detail = "selected p = " + found[0] + ", " + found[1] + ", " + found[2];
  return o;
}

// ---- 10: embedding sanity ---------------------------------------------------

Outcome criterion_10() {
  Outcome o;
  auto kg = fixture::toy_kg();
  auto opt = fixture::toy_training();
  double before = evaluate_margin_loss(kg, initialize_embeddings(kg, opt.dim, opt.seed), opt.margin);
  auto emb = train_embeddings(kg, opt);
  double after = evaluate_margin_loss(kg, emb, opt.margin);
  double wins = fixture::true_triple_win_rate(kg, emb);
  o.detail = "loss " + num(before) + " -> " + num(after) + ", true triple wins " + num(100 * wins, 1) + "%";
  if (!(after < before) || wins < 0.9) o.fail(o.detail);
  return o;
}

}  // namespace
}  // namespace elicit

int main() {
  using namespace elicit;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"round reduction on the default catalog", criterion_1},
      {"hit-rate parity on the default catalog", criterion_2},
      {"membership and objective match oracles", criterion_3},
      {"fuzzy c-means properties", criterion_4},
      {"hit rate closed form", criterion_5},
      {"leaf threshold golden traces", criterion_6},
      {"policy tree invariants", criterion_7},
      {"worked housekeeping example", criterion_8},
      {"granule count recovery", criterion_9},
      {"embedding sanity", criterion_10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
