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

// Small hand-built graphs shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "elicit/embedding.hpp"
#include "elicit/kg.hpp"

namespace elicit::fixture {

// Four entities in a parallelogram: a -r1-> b, c -r1-> d, a -r2-> c,
// b -r2-> d. A translation model can satisfy all four exactly.
inline ServiceKG toy_kg() {
  ServiceKG kg;
  auto a = kg.add_entity("a", EntityKind::attribute_value);
  auto b = kg.add_entity("b", EntityKind::attribute_value);
  auto c = kg.add_entity("c", EntityKind::attribute_value);
  auto d = kg.add_entity("d", EntityKind::attribute_value);
  kg.add_triple(a, "r1", b);
  kg.add_triple(c, "r1", d);
  kg.add_triple(a, "r2", c);
  kg.add_triple(b, "r2", d);
  return kg;
}

// Fraction of triples whose distance is strictly below that of every
// filtered head or tail corruption.
inline double true_triple_win_rate(const ServiceKG& kg, const EmbeddingTable& emb) {
  std::size_t wins = 0;
  for (const auto& t : kg.triples()) {
    double pos = triple_distance(emb, t.head, t.relation, t.tail);
    bool beats_all = true;
    for (const auto& e : kg.entities()) {
      if (e.id != t.head && !kg.has_triple(e.id, t.relation, t.tail) &&
          triple_distance(emb, e.id, t.relation, t.tail) <= pos)
        beats_all = false;
      if (e.id != t.tail && !kg.has_triple(t.head, t.relation, e.id) &&
          triple_distance(emb, t.head, t.relation, e.id) <= pos)
        beats_all = false;
    }
    if (beats_all) ++wins;
  }
  return kg.triples().empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(kg.triples().size());
}

inline TransEOptions toy_training() {
  TransEOptions opt;
  opt.dim = 8;
  opt.margin = 1.0;
  opt.epochs = 400;
  opt.seed = 3;
  opt.learning_rate = 0.05;
  return opt;
}

// Concept "HouseKeeper" (336) points at service 567, whose neighborhood is two
// intermediate entities and one provider.
struct ConceptGraph {
  ServiceKG kg;
  EntityId concept_id = 336;
  EntityId service = 567;
  EntityId provider = 0;
  std::vector<EntityId> intermediates;
};

inline ConceptGraph concept_graph() {
  ConceptGraph g;
  g.kg.add_entity(Entity{g.concept_id, "HouseKeeper", EntityKind::concept_term, "housekeeping"});
  g.kg.add_entity(Entity{g.service, "housekeeping", EntityKind::service, "housekeeping"});
  g.intermediates.push_back(g.kg.add_entity(Entity{601, "home help", EntityKind::attribute_value, ""}).id);
  g.intermediates.push_back(g.kg.add_entity(Entity{602, "cleaning task", EntityKind::attribute_value, ""}).id);
  g.provider = g.kg.add_entity(Entity{700, "p0700", EntityKind::provider, "housekeeping"}).id;
  g.kg.add_triple(g.concept_id, "is_a", g.service);
  g.kg.add_triple(g.service, "related_to", g.intermediates[0]);
  g.kg.add_triple(g.intermediates[1], "related_to", g.service);
  g.kg.add_triple(g.service, kEmployRelation, g.provider);
  return g;
}

}  // namespace elicit::fixture
