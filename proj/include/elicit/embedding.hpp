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

// Translation embeddings (head + relation ~ tail, L2 distance) trained with a
// margin ranking loss against corrupted triples, and goal inference from bare
// attribute terms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "elicit/error.hpp"
#include "elicit/kg.hpp"
#include "elicit/util.hpp"

namespace elicit {

using Vec = std::vector<double>;

struct EmbeddingTable {
  std::map<EntityId, Vec> entity_vectors;
  std::map<std::string, Vec> relation_vectors;
  int dim = 0;
  std::vector<double> epoch_loss;  // summed hinge loss observed in each epoch

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

struct TransEOptions {
  int dim = 32;
  double margin = 1.0;
  int epochs = 100;
  std::uint64_t seed = 1;
  double learning_rate = 0.01;
};

namespace detail {

inline double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void normalize(Vec& v) {
  double n = norm(v);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

}  // namespace detail

// ||h + r - t||_2.
inline double translation_distance(const Vec& h, const Vec& r, const Vec& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double triple_distance(const EmbeddingTable& emb, EntityId h, const std::string& r, EntityId t) {
  return translation_distance(emb.entity_vectors.at(h), emb.relation_vectors.at(r), emb.entity_vectors.at(t));
}

// Uniform entries in [-1/sqrt(dim), 1/sqrt(dim)]; entities and relations
// start at unit length.
inline EmbeddingTable initialize_embeddings(const ServiceKG& kg, int dim, std::uint64_t seed) {
  if (dim < 2) throw ConfigError("embedding dimension must be >= 2");
  EmbeddingTable emb;
  emb.dim = dim;
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  auto draw = [&] {
    Vec v(static_cast<std::size_t>(dim));
    for (double& x : v) x = rng.uniform(-scale, scale);
    detail::normalize(v);
    return v;
  };
  for (const auto& rel : kg.relations()) emb.relation_vectors.emplace(rel, draw());
  std::vector<EntityId> ids;
  for (const auto& e : kg.entities()) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  for (EntityId id : ids) emb.entity_vectors.emplace(id, draw());
  return emb;
}

// Mean hinge loss over every triple and each of its filtered corruptions
// (head or tail swapped for any other entity). Deterministic; used to compare
// tables before and after training.
inline double evaluate_margin_loss(const ServiceKG& kg, const EmbeddingTable& emb, double margin) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& t : kg.triples()) {
    double pos = triple_distance(emb, t.head, t.relation, t.tail);
    for (const auto& e : kg.entities()) {
      if (e.id != t.head && !kg.has_triple(e.id, t.relation, t.tail)) {
        total += std::max(0.0, margin + pos - triple_distance(emb, e.id, t.relation, t.tail));
        ++count;
      }
      if (e.id != t.tail && !kg.has_triple(t.head, t.relation, e.id)) {
        total += std::max(0.0, margin + pos - triple_distance(emb, t.head, t.relation, e.id));
        ++count;
      }
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

// SGD over shuffled triples, one corrupted negative per positive (head or tail
// replaced uniformly at random). Entity vectors are renormalized after every
// epoch.
inline EmbeddingTable train_embeddings(const ServiceKG& kg, const TransEOptions& opt) {
  if (opt.dim < 2) throw ConfigError("embedding dimension must be >= 2");
  if (opt.epochs <= 0) throw ConfigError("epochs must be positive");
  if (kg.triples().empty()) throw ConfigError("cannot train embeddings on a graph without triples");

  EmbeddingTable emb = initialize_embeddings(kg, opt.dim, opt.seed);
  Rng rng(mix_seed(opt.seed, 0x7e));
  std::vector<EntityId> ids;
  for (const auto& e : kg.entities()) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());

  std::vector<std::size_t> order(kg.triples().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto dim = static_cast<std::size_t>(opt.dim);
  Vec grad_pos(dim), grad_neg(dim);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    double loss = 0.0;
    for (std::size_t idx : order) {
      const Triple& t = kg.triples()[idx];
      EntityId nh = t.head, nt = t.tail;
      if (ids.size() > 1) {
        for (int attempt = 0; attempt < 10; ++attempt) {
          bool corrupt_head = rng.coin();
          EntityId pick = ids[rng.index(ids.size())];
          nh = corrupt_head ? pick : t.head;
          nt = corrupt_head ? t.tail : pick;
          if ((nh != t.head || nt != t.tail) && !kg.has_triple(nh, t.relation, nt)) break;
        }
      }
      if (nh == t.head && nt == t.tail) continue;

      Vec& h = emb.entity_vectors.at(t.head);
      Vec& tl = emb.entity_vectors.at(t.tail);
      Vec& r = emb.relation_vectors.at(t.relation);
      Vec& h2 = emb.entity_vectors.at(nh);
      Vec& t2 = emb.entity_vectors.at(nt);

      double dp = translation_distance(h, r, tl);
      double dn = translation_distance(h2, r, t2);
      double hinge = opt.margin + dp - dn;
      if (hinge <= 0.0) continue;
      loss += hinge;
      for (std::size_t k = 0; k < dim; ++k) {
        grad_pos[k] = dp > 0.0 ? (h[k] + r[k] - tl[k]) / dp : 0.0;
        grad_neg[k] = dn > 0.0 ? (h2[k] + r[k] - t2[k]) / dn : 0.0;
      }
      const double lr = opt.learning_rate;
      for (std::size_t k = 0; k < dim; ++k) {
        h[k] -= lr * grad_pos[k];
        tl[k] += lr * grad_pos[k];
        r[k] -= lr * (grad_pos[k] - grad_neg[k]);
        h2[k] += lr * grad_neg[k];
        t2[k] -= lr * grad_neg[k];
      }
    }
    for (auto& [id, v] : emb.entity_vectors) detail::normalize(v);
    emb.epoch_loss.push_back(loss);
  }
  return emb;
}

inline EmbeddingTable train_embeddings(const ServiceKG& kg, int dim, double margin, int epochs,
                                       std::uint64_t seed) {
  TransEOptions opt;
  opt.dim = dim;
  opt.margin = margin;
  opt.epochs = epochs;
  opt.seed = seed;
  return train_embeddings(kg, opt);
}

struct GoalScore {
  EntityId service = 0;
  double score = 0.0;  // summed translation distance, lower is better
};

// Plausibility of `service` explaining attribute entity `attr`: the smallest
// translation distance over relations incident to the attribute, either
// directly (service -r-> attr) or through a provider
// (service -employ-> provider -r-> attr).
inline double goal_distance(const ServiceKG& kg, const EmbeddingTable& emb, EntityId service, EntityId attr) {
  std::set<std::string> rels;
  for (std::size_t idx : kg.incoming(attr)) rels.insert(kg.triples()[idx].relation);
  for (std::size_t idx : kg.outgoing(attr)) rels.insert(kg.triples()[idx].relation);
  const Vec& s = emb.entity_vectors.at(service);
  const Vec& a = emb.entity_vectors.at(attr);
  auto employ = emb.relation_vectors.find(kEmployRelation);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rel : rels) {
    const Vec& r = emb.relation_vectors.at(rel);
    best = std::min(best, translation_distance(s, r, a));
    if (employ != emb.relation_vectors.end() && rel != kEmployRelation) {
      Vec composed(r.size());
      for (std::size_t k = 0; k < r.size(); ++k) composed[k] = employ->second[k] + r[k];
      best = std::min(best, translation_distance(s, composed, a));
    }
  }
  return best;
}

// Scores every service entity, ascending by (score, id).
inline std::vector<GoalScore> score_goals(const std::vector<std::string>& attribute_terms, const ServiceKG& kg,
                                          const EmbeddingTable& emb) {
  std::vector<EntityId> attrs;
  for (const auto& term : attribute_terms) {
    auto id = try_map_concept(term, kg);
    if (id && kg.entity(*id).kind == EntityKind::attribute_value) attrs.push_back(*id);
  }
  if (attrs.empty()) throw NotFound("no attribute term resolves to an attribute entity");
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());

  std::vector<GoalScore> scores;
  for (EntityId svc : kg.entities_of_kind(EntityKind::service)) {
    double s = 0.0;
    for (EntityId a : attrs) s += goal_distance(kg, emb, svc, a);
    scores.push_back({svc, s});
  }
  std::sort(scores.begin(), scores.end(), [](const GoalScore& a, const GoalScore& b) {
    return a.score != b.score ? a.score < b.score : a.service < b.service;
  });
  return scores;
}

inline std::vector<EntityId> infer_goal(const std::vector<std::string>& attribute_terms, const ServiceKG& kg,
                                        const EmbeddingTable& emb, int k) {
  auto scores = score_goals(attribute_terms, kg, emb);
  std::vector<EntityId> out;
  for (const auto& s : scores) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(s.service);
  }
  return out;
}

}  // namespace elicit
