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

// Exhaustive dialog simulation over compiled policy trees.
//
// Every service of a tree is, in turn, the user's single best target. The
// dialog for that target ends at the leaf holding it, so its round count is
// the leaf depth, and its hit rate is the chance the target is among the
// n = min(N, l) services recommended from a leaf of size l.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "elicit/error.hpp"
#include "elicit/policy.hpp"
#include "elicit/util.hpp"

namespace elicit {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  return static_cast<double>(r);
}

// Probability that the single best target is among n services drawn from a
// leaf of l: C(l-1, n-1) / C(l, n).
inline double hit_rate(int l, int n) {
  if (n < 1 || n > l) throw ConfigError("hit rate needs 1 <= n <= l");
  return binomial(l - 1, n - 1) / binomial(l, n);
}

struct RoundStats {
  long long cases = 0;
  double hit_sum = 0.0;
};

struct TypeReport {
  std::string service_type;
  Strategy strategy = Strategy::grc;
  int n_threshold = 0;
  std::map<int, RoundStats> by_round;
  std::vector<int> leaf_sizes;
  std::string fingerprint;  // over the sorted candidate ids
};

struct SimulationReport {
  Strategy strategy = Strategy::grc;
  std::vector<TypeReport> types;

  std::map<int, RoundStats> by_round() const {
    std::map<int, RoundStats> out;
    for (const auto& t : types)
      for (const auto& [r, s] : t.by_round) {
        out[r].cases += s.cases;
        out[r].hit_sum += s.hit_sum;
      }
    return out;
  }
};

// Figures derived from a round histogram; every average is recomputed from
// the histogram itself.
struct Summary {
  std::map<int, long long> histogram;
  long long cases = 0;
  long long total_rounds = 0;
  double average_rounds = 0.0;
  double average_hit = 0.0;
  int max_rounds = 0;
  double terminal_hit = 0.0;  // mean hit rate of the cases ending at max_rounds
};

inline Summary summarize(const std::map<int, RoundStats>& by_round) {
  Summary s;
  double hits = 0.0;
  for (const auto& [r, st] : by_round) {
    if (st.cases == 0) continue;
    s.histogram[r] = st.cases;
    s.cases += st.cases;
    s.total_rounds += st.cases * r;
    hits += st.hit_sum;
    s.max_rounds = r;
    s.terminal_hit = st.hit_sum / static_cast<double>(st.cases);
  }
  if (s.cases) {
    s.average_rounds = static_cast<double>(s.total_rounds) / static_cast<double>(s.cases);
    s.average_hit = hits / static_cast<double>(s.cases);
  }
  return s;
}

inline Summary summarize(const TypeReport& t) { return summarize(t.by_round); }
inline Summary summarize(const SimulationReport& r) { return summarize(r.by_round()); }

inline std::string fnv_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// Identity of the catalog a report was computed over.
inline std::string catalog_fingerprint(const SimulationReport& r) {
  std::vector<std::string> parts;
  for (const auto& t : r.types) parts.push_back(t.service_type + ":" + t.fingerprint);
  std::sort(parts.begin(), parts.end());
  return fnv_hex(join(parts, ";"));
}

inline TypeReport simulate_all_paths(const PolicyTree& tree) {
  TypeReport rep;
  rep.service_type = tree.service_type;
  rep.strategy = tree.strategy;
  rep.n_threshold = tree.n_threshold;
  auto ids = tree.root().candidates;
  std::sort(ids.begin(), ids.end());
  rep.fingerprint = fnv_hex(join(ids, "\n"));
  for (const auto* leaf : tree.leaves()) {
    const int l = static_cast<int>(leaf->candidates.size());
    rep.leaf_sizes.push_back(l);
    if (l == 0) continue;
    const double h = hit_rate(l, std::min(tree.n_threshold, l));
    auto& st = rep.by_round[leaf->depth];
    st.cases += l;
    st.hit_sum += h * l;
  }
  return rep;
}

inline SimulationReport simulate_all(const std::vector<PolicyTree>& trees) {
  SimulationReport rep;
  if (!trees.empty()) rep.strategy = trees.front().strategy;
  for (const auto& t : trees) {
    if (t.strategy != rep.strategy) throw ConfigError("cannot mix strategies in one report");
    rep.types.push_back(simulate_all_paths(t));
  }
  return rep;
}

// Cumulative share of cases finished by each round, in percent.
using Curve = std::vector<std::pair<int, double>>;

inline Curve completion_curve(const Summary& s, int last_round) {
  Curve c;
  long long done = 0;
  for (int r = 1; r <= last_round; ++r) {
    if (auto it = s.histogram.find(r); it != s.histogram.end()) done += it->second;
    c.emplace_back(r, s.cases ? 100.0 * static_cast<double>(done) / static_cast<double>(s.cases) : 0.0);
  }
  return c;
}

struct Comparison {
  Summary grc;
  Summary kmeans;
  double reduction = 0.0;         // (km - grc) / km on average rounds
  double round_difference = 0.0;  // km - grc
  double hit_gap = 0.0;           // grc - km, in percentage points
  Curve grc_curve;
  Curve kmeans_curve;
};

inline Comparison compare(const SimulationReport& grc, const SimulationReport& km) {
  if (catalog_fingerprint(grc) != catalog_fingerprint(km))
    throw ConfigError("catalog mismatch: reports cover different services");
  Comparison c;
  c.grc = summarize(grc);
  c.kmeans = summarize(km);
  if (c.kmeans.average_rounds > 0.0)
    c.reduction = (c.kmeans.average_rounds - c.grc.average_rounds) / c.kmeans.average_rounds;
  c.round_difference = c.kmeans.average_rounds - c.grc.average_rounds;
  c.hit_gap = 100.0 * (c.grc.average_hit - c.kmeans.average_hit);
  int last = std::max(c.grc.max_rounds, c.kmeans.max_rounds);
  c.grc_curve = completion_curve(c.grc, last);
  c.kmeans_curve = completion_curve(c.kmeans, last);
  return c;
}

// ---------------------------------------------------------------------------
// Text output

namespace detail {

inline void write_summary(std::ostream& out, const Summary& s, const std::string& indent) {
  out << indent << "cases " << s.cases << '\n';
  out << indent << "average_rounds " << std::setprecision(6) << std::fixed << s.average_rounds << '\n';
  out << indent << "average_hit_percent " << 100.0 * s.average_hit << '\n';
  out << indent << "max_rounds " << s.max_rounds << '\n';
  out << indent << "terminal_hit_percent " << 100.0 * s.terminal_hit << '\n';
  out.unsetf(std::ios::floatfield);
  out << indent << "histogram";
  for (auto [r, n] : s.histogram) out << ' ' << r << ':' << n;
  out << '\n';
}

}  // namespace detail

inline void write_report(const SimulationReport& rep, std::ostream& out) {
  out << "strategy " << to_string(rep.strategy) << '\n';
  out << "catalog " << catalog_fingerprint(rep) << '\n';
  for (const auto& t : rep.types) {
    out << "[type " << t.service_type << "]\n";
    out << "  N " << t.n_threshold << '\n';
    detail::write_summary(out, summarize(t), "  ");
    out << "  leaf_sizes";
    for (int l : t.leaf_sizes) out << ' ' << l;
    out << '\n';
  }
  out << "[overall]\n";
  detail::write_summary(out, summarize(rep), "  ");
}

inline void write_comparison(const Comparison& c, std::ostream& out) {
  out << "[grc]\n";
  detail::write_summary(out, c.grc, "  ");
  out << "[kmeans]\n";
  detail::write_summary(out, c.kmeans, "  ");
  out << "[comparison]\n" << std::setprecision(6) << std::fixed;
  out << "  round_reduction_percent " << 100.0 * c.reduction << '\n';
  out << "  round_difference " << c.round_difference << '\n';
  out << "  hit_gap_points " << c.hit_gap << '\n';
  out.unsetf(std::ios::floatfield);
}

inline void write_curve(const Curve& curve, std::ostream& out) {
  out << "# round cumulative_percent\n" << std::setprecision(6) << std::fixed;
  for (auto [r, pct] : curve) out << r << ' ' << pct << '\n';
  out.unsetf(std::ios::floatfield);
}

}  // namespace elicit
