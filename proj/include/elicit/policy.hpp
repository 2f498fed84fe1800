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

// Offline compilation of dialog-policy trees. Every internal node is one
// question round over an inquiring attribute set; every edge is a granule the
// user can pick; leaves hold the recommendation sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "elicit/clustering.hpp"
#include "elicit/error.hpp"
#include "elicit/util.hpp"

namespace elicit {

enum class Strategy { grc, kmeans };

inline const char* to_string(Strategy s) { return s == Strategy::grc ? "grc" : "kmeans"; }

inline Strategy strategy_from_string(const std::string& s) {
  if (s == "grc") return Strategy::grc;
  if (s == "kmeans") return Strategy::kmeans;
  throw ConfigError("unknown strategy '" + s + "' (expected grc or kmeans)");
}

struct PolicyConfig {
  Strategy strategy = Strategy::grc;
  double fuzzifier = 2.0;
  double epsilon = 1e-6;
  int max_iter = 300;
  std::uint64_t seed = 1;
  double tau = 0.5;  // inquiry spread threshold, relative to the widest attribute
  int x = 8;         // upper limit of one-shot recommendation
  std::optional<int> manual_n;
  bool auto_n = false;
  bool renormalize = true;  // rescale each node's sub-matrix to [0, 1] before clustering

  FcmOptions fcm_options(std::uint64_t salt) const {
    FcmOptions o;
    o.fuzzifier = fuzzifier;
    o.epsilon = epsilon;
    o.max_iter = max_iter;
    o.seed = mix_seed(seed, salt);
    return o;
  }

  void validate() const {
    if (!(fuzzifier > 1.0)) throw ConfigError("fuzzifier must be > 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (x < 1) throw ConfigError("X must be >= 1");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
    if (manual_n && (*manual_n < 1 || *manual_n > x)) throw ConfigError("manual N must satisfy 1 <= N <= X");
  }
};

// Where one granule sits along one inquiring attribute.
struct AttributeRange {
  std::string attribute;
  ColumnKind kind = ColumnKind::numeric;
  double lo = 0.0;  // denormalized; category codes for categorical attributes
  double hi = 0.0;
  double centroid = 0.0;
  std::vector<std::string> categories;
  int rank = 0;  // position of this granule's centroid among its siblings
};

struct GranuleDescriptor {
  std::vector<AttributeRange> ranges;

  const AttributeRange* find(const std::string& attribute) const {
    for (const auto& r : ranges)
      if (r.attribute == attribute) return &r;
    return nullptr;
  }

  // Human-readable option text, e.g. "price 1800-2600".
  std::string summary() const {
    std::vector<std::string> parts;
    for (const auto& r : ranges) {
      if (r.kind == ColumnKind::numeric) {
        parts.push_back(r.attribute + " " + format_number(r.lo) +
                        (r.lo == r.hi ? std::string() : "-" + format_number(r.hi)));
      } else {
        parts.push_back(r.attribute + " " + join(r.categories, "/"));
      }
    }
    return join(parts, ", ");
  }
};

struct PolicyNode {
  int id = 0;
  int depth = 1;  // root is round 1: the service-type round
  std::vector<std::string> candidates;
  std::vector<std::string> inquiring;
  std::vector<int> children;
  std::vector<GranuleDescriptor> descriptors;  // parallel to children
  bool leaf = true;
  bool indivisible = false;
};

struct PolicyTree {
  std::string service_type;
  Strategy strategy = Strategy::grc;
  int n_threshold = 8;
  PolicyConfig config;
  std::vector<ColumnMeta> columns;
  std::vector<PolicyNode> nodes;  // preorder; nodes[0] is the root

  const PolicyNode& root() const { return nodes.front(); }

  const PolicyNode& node(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes.size()) throw NotFound("no policy node " + std::to_string(id));
    return nodes[static_cast<std::size_t>(id)];
  }

  const ColumnMeta* column(const std::string& name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }

  int max_depth() const {
    int d = 0;
    for (const auto& n : nodes)
      if (n.leaf) d = std::max(d, n.depth);
    return d;
  }

  std::vector<const PolicyNode*> leaves() const {
    std::vector<const PolicyNode*> out;
    for (const auto& n : nodes)
      if (n.leaf) out.push_back(&n);
    return out;
  }
};

struct InquirySelection {
  std::vector<std::size_t> attributes;  // column indices of the partition
  std::vector<std::string> names;
  bool indivisible = false;
};

// Attributes whose centroid spread reaches tau times the widest spread. The
// widest attribute is always included; zero spread everywhere marks the
// node indivisible.
inline InquirySelection choose_inquiry_attributes(const GranulePartition& partition,
                                                  const std::vector<ColumnMeta>& norm_meta, double tau = 0.5) {
  if (partition.p < 2) throw ConfigError("inquiry attributes need at least two granules");
  const Matrix& c = partition.centroids;
  if (norm_meta.size() != c.cols()) throw ShapeError("column metadata does not match centroid width");
  std::vector<double> spread(c.cols(), 0.0);
  for (std::size_t t = 0; t < c.cols(); ++t) {
    double lo = c(0, t), hi = c(0, t);
    for (std::size_t i = 1; i < c.rows(); ++i) {
      lo = std::min(lo, c(i, t));
      hi = std::max(hi, c(i, t));
    }
    spread[t] = hi - lo;
  }
  std::size_t widest = 0;
  for (std::size_t t = 1; t < spread.size(); ++t)
    if (spread[t] > spread[widest]) widest = t;
  InquirySelection sel;
  if (!(spread[widest] > 1e-12)) {
    sel.attributes = {widest};
    sel.names = {norm_meta[widest].name};
    sel.indivisible = true;
    return sel;
  }
  const double cut = tau * spread[widest];
  for (std::size_t t = 0; t < spread.size(); ++t) {
    if (t == widest || spread[t] >= cut) {
      sel.attributes.push_back(t);
      sel.names.push_back(norm_meta[t].name);
    }
  }
  return sel;
}

struct LeafSizeProfile {
  std::vector<int> sizes;
  int x = 8;
};

inline LeafSizeProfile collect_leaf_sizes(const PolicyTree& tree) {
  LeafSizeProfile prof;
  prof.x = tree.config.x;
  for (const auto* leaf : tree.leaves()) prof.sizes.push_back(static_cast<int>(leaf->candidates.size()));
  return prof;
}

// Threshold N from the leaf-size array Res under the upper limit X.
//
// Distinct leaf sizes are paired with their frequencies and sorted by size;
// the candidates are the pairs from the (lower) median position onward. The
// walk starts at the most frequent candidate (larger size on equal
// frequency) and moves right while the frequency-difference rules allow it
// and the value stays below X. A walk that lands above X is capped at X.
inline int auto_n(int x, const std::vector<int>& res) {
  if (x < 1) throw ConfigError("X must be >= 1");
  if (res.empty()) throw ConfigError("leaf size profile is empty");

  std::map<int, int> freq;
  for (int v : res) ++freq[v];
  std::vector<std::pair<int, int>> in_order(freq.begin(), freq.end());  // (value, frequency)

  const std::size_t median = (in_order.size() - 1) / 2;
  std::vector<std::pair<int, int>> cand(in_order.begin() + static_cast<std::ptrdiff_t>(median), in_order.end());

  std::size_t i = 0;
  for (std::size_t k = 1; k < cand.size(); ++k)
    if (cand[k].second >= cand[i].second) i = k;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  int v = 0;
  while (i < cand.size() && v < x) {
    v = cand[i].first;
    double d_left = 0.0, d_right = 0.0;
    auto f = [&](std::size_t k) { return static_cast<double>(cand[k].second); };
    if (i == 0) {
      d_left = kInf;
      d_right = cand.size() > 1 ? f(i) - f(i + 1) : kInf;
    } else if (i == cand.size() - 1) {
      d_right = kInf;
      d_left = f(i) - f(i - 1);
    } else {
      d_right = f(i) - f(i + 1);
      d_left = f(i) - f(i - 1);
    }
    const double a_left = std::fabs(d_left), a_right = std::fabs(d_right);
    if (d_right < 0 && d_left < 0) {
      if (a_left < a_right) {
        v = cand[i - 1].first;
        break;
      }
    } else if (d_right > 0 && d_left > 0) {
      if (a_left > a_right) break;
    } else if (d_right > 0 && d_left < 0) {
      if (a_left > a_right) v = cand[i - 1].first;
      break;
    }
    ++i;
  }
  return std::min(v, x);
}

inline int auto_n(const LeafSizeProfile& prof) { return auto_n(prof.x, prof.sizes); }

namespace detail {

inline bool has_variance(const Matrix& m, std::size_t col) {
  for (std::size_t j = 1; j < m.rows(); ++j)
    if (m(j, col) != m(0, col)) return true;
  return false;
}

// Min-max rescales every column to [0, 1] over the rows present.
inline void rescale_columns(Matrix& m) {
  for (std::size_t t = 0; t < m.cols(); ++t) {
    double lo = m(0, t), hi = m(0, t);
    for (std::size_t j = 1; j < m.rows(); ++j) {
      lo = std::min(lo, m(j, t));
      hi = std::max(hi, m(j, t));
    }
    const double span = hi - lo;
    for (std::size_t j = 0; j < m.rows(); ++j) m(j, t) = span > 0.0 ? (m(j, t) - lo) / span : 0.0;
  }
}

inline double variance(const Matrix& m, std::size_t col) {
  double mean = 0.0;
  for (std::size_t j = 0; j < m.rows(); ++j) mean += m(j, col);
  mean /= static_cast<double>(m.rows());
  double v = 0.0;
  for (std::size_t j = 0; j < m.rows(); ++j) v += (m(j, col) - mean) * (m(j, col) - mean);
  return v / static_cast<double>(m.rows());
}

// 1-D Lloyd iterations from k-means++ seeds. Returns labels and SSE.
inline std::pair<std::vector<std::size_t>, double> kmeans_1d(const std::vector<double>& x, std::size_t k,
                                                             std::uint64_t seed) {
  const std::size_t n = x.size();
  Rng rng(seed);
  std::vector<double> centers{x[rng.index(n)]};
  while (centers.size() < k) {
    std::vector<double> d2(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (x[j] - c) * (x[j] - c));
      d2[j] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(centers.back());
      continue;
    }
    double r = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t j = 0; j < n; ++j) {
      r -= d2[j];
      if (r < 0.0) {
        pick = j;
        break;
      }
    }
    centers.push_back(x[pick]);
  }
  std::vector<std::size_t> labels(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (std::fabs(x[j] - centers[c]) < std::fabs(x[j] - centers[best])) best = c;
      if (labels[j] != best || iter == 0) changed = changed || labels[j] != best;
      labels[j] = best;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      sum[labels[j]] += x[j];
      ++cnt[labels[j]];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (cnt[c]) centers[c] = sum[c] / static_cast<double>(cnt[c]);
    if (!changed && iter > 0) break;
  }
  double sse = 0.0;
  for (std::size_t j = 0; j < n; ++j) sse += (x[j] - centers[labels[j]]) * (x[j] - centers[labels[j]]);
  return {labels, sse};
}

}  // namespace detail

// Cluster count by the elbow of the within-cluster SSE curve over
// k in [1, kmax]: the k in [2, kmax] farthest below the chord joining the
// curve's end points. Smaller k wins ties.
inline std::size_t elbow_k(const std::vector<double>& sse_by_k) {
  // sse_by_k[0] is k = 1.
  const std::size_t kmax = sse_by_k.size();
  if (kmax <= 2) return 2;
  const double y1 = sse_by_k.front(), yk = sse_by_k.back();
  std::size_t best = 2;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k < kmax; ++k) {
    double t = static_cast<double>(k - 1) / static_cast<double>(kmax - 1);
    double chord = y1 + t * (yk - y1);
    double gap = chord - sse_by_k[k - 1];
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      best = k;
    }
  }
  return best_gap > 1e-12 ? best : 2;
}

namespace detail {

inline int floor_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while ((r + 1) * (r + 1) <= n) ++r;
  while (r * r > n) --r;
  return static_cast<int>(r);
}

class TreeBuilder {
 public:
  TreeBuilder(const AttributeMatrix& data, const PolicyConfig& cfg, int n_threshold)
      : data_(data), cfg_(cfg), n_(n_threshold) {}

  PolicyTree build(const std::string& service_type) {
    PolicyTree tree;
    tree.service_type = service_type;
    tree.strategy = cfg_.strategy;
    tree.n_threshold = n_;
    tree.config = cfg_;
    tree.columns = data_.columns;
    std::vector<std::size_t> rows(data_.n());
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<std::size_t> attrs(data_.attributes());
    std::iota(attrs.begin(), attrs.end(), 0);
    grow(tree, rows, attrs, 1);
    return tree;
  }

 private:
  struct Split {
    std::vector<std::size_t> inquiring;            // column indices into data_
    std::vector<std::vector<std::size_t>> groups;  // rows per child, already ordered
    bool indivisible = false;
  };

  Matrix node_matrix(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& attrs) const {
    Matrix sub = data_.values.select(rows, attrs);
    if (cfg_.renormalize) rescale_columns(sub);
    return sub;
  }

  // One GrC round: FCM over the remaining attributes with p picked by fpc.
  Split split_grc(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& attrs, int node_id) {
    Split s;
    Matrix sub = node_matrix(rows, attrs);
    bool any = false;
    for (std::size_t t = 0; t < attrs.size(); ++t) any = any || has_variance(sub, t);
    if (!any) {
      s.indivisible = true;
      return s;
    }
    auto salt = static_cast<std::uint64_t>(node_id) * 2 + 1;
    auto sel = select_p(sub, cfg_.fcm_options(salt));
    int p = std::min<int>(sel.p, static_cast<int>(rows.size()));
    auto part = fcm(sub, p, cfg_.fcm_options(salt + 1));
    std::vector<ColumnMeta> meta;
    for (std::size_t a : attrs) meta.push_back(data_.columns[a]);
    auto inquiry = choose_inquiry_attributes(part, meta, cfg_.tau);
    if (inquiry.indivisible) {
      s.indivisible = true;
      return s;
    }
    for (std::size_t a : inquiry.attributes) s.inquiring.push_back(attrs[a]);

    auto labels = hard_assignment(part.memberships);
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(p));
    for (std::size_t j = 0; j < rows.size(); ++j) groups[labels[j]].push_back(rows[j]);
    std::vector<std::size_t> order;
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (!groups[g].empty()) order.push_back(g);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      for (std::size_t q : inquiry.attributes)
        if (part.centroids(a, q) != part.centroids(b, q)) return part.centroids(a, q) < part.centroids(b, q);
      return false;
    });
    for (std::size_t g : order) s.groups.push_back(std::move(groups[g]));
    return s;
  }

  // One baseline round: the single highest-variance attribute, split by 1-D
  // k-means with k from the SSE elbow.
  Split split_kmeans(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& attrs, int node_id) {
    Split s;
    Matrix sub = node_matrix(rows, attrs);
    std::size_t best = attrs.size();
    double best_var = 0.0;
    for (std::size_t t = 0; t < attrs.size(); ++t) {
      double v = variance(sub, t);
      if (v > best_var + 1e-15) {
        best_var = v;
        best = t;
      }
    }
    if (best == attrs.size()) {
      s.indivisible = true;
      return s;
    }
    s.inquiring = {attrs[best]};
    std::vector<double> x(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) x[j] = sub(j, best);
    const auto kmax = static_cast<std::size_t>(std::max(2, floor_sqrt(rows.size())));
    std::vector<double> sse;
    std::vector<std::vector<std::size_t>> labelings;
    for (std::size_t k = 1; k <= kmax; ++k) {
      auto [labels, e] = kmeans_1d(x, std::min(k, rows.size()), mix_seed(cfg_.seed, node_id * 131 + k));
      sse.push_back(e);
      labelings.push_back(std::move(labels));
    }
    std::size_t k = elbow_k(sse);
    const auto& labels = labelings[k - 1];
    std::vector<std::vector<std::size_t>> groups(k);
    std::vector<double> center(k, 0.0);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      groups[labels[j]].push_back(rows[j]);
      center[labels[j]] += x[j];
    }
    std::vector<std::size_t> order;
    for (std::size_t g = 0; g < k; ++g)
      if (!groups[g].empty()) {
        center[g] /= static_cast<double>(groups[g].size());
        order.push_back(g);
      }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return center[a] < center[b]; });
    for (std::size_t g : order) s.groups.push_back(std::move(groups[g]));
    return s;
  }

  GranuleDescriptor describe(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& inquiring) const {
    GranuleDescriptor d;
    for (std::size_t a : inquiring) {
      const ColumnMeta& meta = data_.columns[a];
      AttributeRange r;
      r.attribute = meta.name;
      r.kind = meta.kind;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
      std::set<int> codes;
      for (std::size_t row : rows) {
        double raw = data_.raw(row, a);
        lo = std::min(lo, raw);
        hi = std::max(hi, raw);
        sum += data_.values(row, a);
        if (meta.categorical()) codes.insert(static_cast<int>(std::llround(raw)));
      }
      r.lo = lo;
      r.hi = hi;
      r.centroid = meta.denormalize(sum / static_cast<double>(rows.size()));
      for (int c : codes) r.categories.push_back(meta.category(c));
      d.ranges.push_back(std::move(r));
    }
    return d;
  }

  static void assign_ranks(std::vector<GranuleDescriptor>& ds) {
    if (ds.empty()) return;
    for (std::size_t q = 0; q < ds.front().ranges.size(); ++q) {
      std::vector<std::size_t> idx(ds.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return ds[a].ranges[q].centroid < ds[b].ranges[q].centroid; });
      for (std::size_t r = 0; r < idx.size(); ++r) ds[idx[r]].ranges[q].rank = static_cast<int>(r);
    }
  }

  int grow(PolicyTree& tree, const std::vector<std::size_t>& rows, std::vector<std::size_t> attrs, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    {
      PolicyNode& node = tree.nodes.back();
      node.id = id;
      node.depth = depth;
      for (std::size_t r : rows) node.candidates.push_back(data_.row_ids[r]);
    }
    for (;;) {
      if (rows.size() <= static_cast<std::size_t>(n_)) return id;
      if (attrs.empty()) {
        tree.nodes[static_cast<std::size_t>(id)].indivisible = true;
        return id;
      }
      Split s = cfg_.strategy == Strategy::grc ? split_grc(rows, attrs, id) : split_kmeans(rows, attrs, id);
      if (s.indivisible) {
        tree.nodes[static_cast<std::size_t>(id)].indivisible = true;
        return id;
      }
      std::vector<std::size_t> rest;
      for (std::size_t a : attrs)
        if (std::find(s.inquiring.begin(), s.inquiring.end(), a) == s.inquiring.end()) rest.push_back(a);
      if (s.groups.size() < 2) {
        // The round would offer a single option: drop its attributes and retry.
        attrs = std::move(rest);
        continue;
      }
      std::vector<GranuleDescriptor> descriptors;
      for (const auto& g : s.groups) descriptors.push_back(describe(g, s.inquiring));
      assign_ranks(descriptors);
      {
        PolicyNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.leaf = false;
        for (std::size_t a : s.inquiring) node.inquiring.push_back(data_.columns[a].name);
        node.descriptors = descriptors;
      }
      for (const auto& g : s.groups) {
        int child = grow(tree, g, rest, depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].children.push_back(child);
      }
      return id;
    }
  }

  const AttributeMatrix& data_;
  const PolicyConfig& cfg_;
  int n_;
};

}  // namespace detail

// Builds a tree with an explicit leaf threshold N.
inline PolicyTree build_tree_with_threshold(const AttributeMatrix& services, const PolicyConfig& config, int n_threshold,
                                            const std::string& service_type = {}) {
  config.validate();
  if (services.n() == 0) throw ConfigError("cannot build a policy tree without services");
  if (n_threshold < 1) throw ConfigError("N must be >= 1");
  return detail::TreeBuilder(services, config, n_threshold).build(service_type);
}

// Provisional tree at threshold X, then N read off its leaf sizes.
inline int bootstrap_n(const AttributeMatrix& services, int x, const PolicyConfig& config) {
  if (x < 1) throw ConfigError("X must be >= 1");
  PolicyConfig provisional = config;
  provisional.x = x;
  provisional.manual_n.reset();
  auto tree = build_tree_with_threshold(services, provisional, x);
  return auto_n(x, collect_leaf_sizes(tree).sizes);
}

inline int resolve_threshold(const AttributeMatrix& services, const PolicyConfig& config) {
  if (config.manual_n) return *config.manual_n;
  if (config.auto_n) return bootstrap_n(services, config.x, config);
  return config.x;
}

inline PolicyTree build_policy_tree(const AttributeMatrix& services, const PolicyConfig& config,
                                    const std::string& service_type = {}) {
  config.validate();
  if (services.n() == 0) throw ConfigError("cannot build a policy tree without services");
  return build_tree_with_threshold(services, config, resolve_threshold(services, config), service_type);
}

inline PolicyTree kmeans_policy_tree(const AttributeMatrix& services, int n_threshold, std::uint64_t seed,
                                     const std::string& service_type = {}) {
  PolicyConfig cfg;
  cfg.strategy = Strategy::kmeans;
  cfg.seed = seed;
  cfg.x = std::max(cfg.x, n_threshold);
  cfg.manual_n = n_threshold;
  return build_tree_with_threshold(services, cfg, n_threshold, service_type);
}

// ---------------------------------------------------------------------------
// Online routing

struct NumericConstraint {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static NumericConstraint exactly(double v) { return {v, v}; }
  bool exact() const { return lo == hi; }
};

// A user's answer to one round, already parsed.
struct Answer {
  std::optional<std::size_t> option;
  std::map<std::string, NumericConstraint> numeric;
  std::map<std::string, double> ordinal;  // fuzzy position in [0, 1]
  std::map<std::string, std::set<std::string>> categories;

  bool addresses(const std::string& attribute) const {
    return numeric.count(attribute) || ordinal.count(attribute) || categories.count(attribute);
  }
};

// Position of a fuzzy ordinal term along an attribute: 0 lowest, 1 highest.
inline std::optional<double> fuzzy_position(const std::string& term) {
  static const std::map<std::string, double> kTerms = {
      {"low", 0.0},      {"lowest", 0.0},   {"cheap", 0.0},     {"cheapest", 0.0},    {"inexpensive", 0.0},
      {"affordable", 0.0}, {"young", 0.0},  {"younger", 0.0},   {"youngest", 0.0},    {"few", 0.0},
      {"little", 0.0},   {"less", 0.0},     {"short", 0.0},     {"junior", 0.0},      {"novice", 0.0},
      {"small", 0.0},    {"bad", 0.0},     {"poor", 0.0},
      {"medium", 0.5},   {"middle", 0.5},   {"moderate", 0.5},  {"average", 0.5},     {"mid", 0.5},
      {"middle-aged", 0.5}, {"normal", 0.5}, {"fair", 0.5},
      {"high", 1.0},     {"highest", 1.0},  {"expensive", 1.0}, {"old", 1.0},         {"older", 1.0},
      {"elderly", 1.0},  {"senior", 1.0},   {"many", 1.0},      {"more", 1.0},        {"much", 1.0},
      {"long", 1.0},     {"experienced", 1.0}, {"large", 1.0},  {"good", 1.0},        {"best", 1.0},
      {"excellent", 1.0}, {"premium", 1.0}, {"top", 1.0}};
  auto it = kTerms.find(normalize_term(term));
  if (it == kTerms.end()) return std::nullopt;
  return it->second;
}

// Child matching an answer at an internal node, or nullopt when the answer
// addresses none of the node's inquiring attributes (the caller re-asks).
inline std::optional<int> route(const PolicyTree& tree, const PolicyNode& node, const Answer& answer) {
  if (node.leaf || node.children.empty()) return std::nullopt;
  if (answer.option) {
    if (*answer.option >= node.children.size()) return std::nullopt;
    return node.children[*answer.option];
  }
  bool addressed = false;
  for (const auto& a : node.inquiring) addressed = addressed || answer.addresses(a);
  if (!addressed) return std::nullopt;

  const double siblings = static_cast<double>(node.children.size());
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    const GranuleDescriptor& d = node.descriptors[c];
    double cost = 0.0;
    for (const auto& attr : node.inquiring) {
      const AttributeRange* r = d.find(attr);
      if (!r) continue;
      const ColumnMeta* meta = tree.column(attr);
      const double span = meta && meta->max > meta->min ? meta->max - meta->min : 1.0;
      if (auto it = answer.categories.find(attr); it != answer.categories.end()) {
        bool hit = false;
        for (const auto& label : it->second)
          hit = hit || std::find(r->categories.begin(), r->categories.end(), label) != r->categories.end();
        cost += hit ? 0.0 : 1.0;
      } else if (auto nit = answer.numeric.find(attr); nit != answer.numeric.end()) {
        const NumericConstraint& q = nit->second;
        if (q.exact()) {
          bool inside = q.lo >= r->lo && q.lo <= r->hi;
          cost += (inside ? 0.0 : 1.0) + std::fabs(q.lo - r->centroid) / span;
        } else {
          double gap = r->centroid < q.lo ? q.lo - r->centroid : (r->centroid > q.hi ? r->centroid - q.hi : 0.0);
          cost += gap > 0.0 ? 1.0 + gap / span : 0.0;
        }
      } else if (auto oit = answer.ordinal.find(attr); oit != answer.ordinal.end()) {
        double pos = siblings > 1 ? static_cast<double>(r->rank) / (siblings - 1.0) : 0.0;
        cost += std::fabs(pos - oit->second);
      }
    }
    if (cost < best_cost - 1e-12) {
      best_cost = cost;
      best = c;
    }
  }
  return node.children[best];
}

}  // namespace elicit
