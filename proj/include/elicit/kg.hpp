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

// Service knowledge graph G = (E, R, S) and the reasoning chain
// concept -> service entity -> candidate providers.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "elicit/error.hpp"
#include "elicit/intent.hpp"
#include "elicit/util.hpp"

namespace elicit {

using EntityId = std::int64_t;

// Relation linking a service entity to each provider that delivers it.
inline constexpr const char* kEmployRelation = "employ";
// Slot label naming the profession (main entity intention).
inline constexpr const char* kProfessionLabel = "pro";

enum class EntityKind { service, provider, attribute_value, concept_term };

inline const char* to_string(EntityKind k) {
  switch (k) {
    case EntityKind::service: return "service";
    case EntityKind::provider: return "provider";
    case EntityKind::attribute_value: return "attribute_value";
    case EntityKind::concept_term: return "concept";
  }
  return "concept";
}

struct Entity {
  EntityId id = 0;
  std::string name;
  EntityKind kind = EntityKind::concept_term;
  std::string domain;
};

struct Triple {
  EntityId head = 0;
  std::string relation;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

class ServiceKG {
 public:
  // Adds an entity with an explicit id.
  const Entity& add_entity(Entity e) {
    if (index_.count(e.id)) throw Error("duplicate entity id " + std::to_string(e.id));
    index_.emplace(e.id, entities_.size());
    next_id_ = std::max(next_id_, e.id + 1);
    entities_.push_back(std::move(e));
    const Entity& added = entities_.back();
    add_surface(added.name, added.id);
    return added;
  }

  // Adds an entity with the next free id.
  EntityId add_entity(std::string name, EntityKind kind, std::string domain = {}) {
    return add_entity(Entity{next_id_, std::move(name), kind, std::move(domain)}).id;
  }

  // Adds a triple; both endpoints must exist. Duplicate triples are ignored.
  bool add_triple(EntityId head, const std::string& relation, EntityId tail) {
    if (!contains(head) || !contains(tail))
      throw Error("triple endpoint does not resolve: " + std::to_string(head) + " " + relation +
                  " " + std::to_string(tail));
    if (relation.empty()) throw Error("empty relation label");
    Triple t{head, relation, tail};
    if (!triple_set_.insert(t).second) return false;
    triples_.push_back(t);
    relations_.insert(relation);
    out_[head].push_back(triples_.size() - 1);
    in_[tail].push_back(triples_.size() - 1);
    return true;
  }

  // Registers a surface form for an entity. The first registration of a
  // surface (and of its normalized form) wins.
  void add_surface(const std::string& surface, EntityId id) {
    if (!contains(id)) throw Error("lexicon target does not resolve: " + std::to_string(id));
    if (surface.empty()) return;
    lexicon_.emplace(surface, id);
    normalized_.emplace(normalize_term(surface), id);
  }

  bool contains(EntityId id) const { return index_.count(id) != 0; }

  const Entity& entity(EntityId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFound("no entity " + std::to_string(id));
    return entities_[it->second];
  }

  const std::vector<Entity>& entities() const { return entities_; }
  const std::vector<Triple>& triples() const { return triples_; }
  const std::set<std::string>& relations() const { return relations_; }
  const std::map<std::string, EntityId>& lexicon() const { return lexicon_; }

  std::optional<EntityId> lookup_exact(const std::string& surface) const {
    auto it = lexicon_.find(surface);
    if (it == lexicon_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<EntityId> lookup_normalized(const std::string& surface) const {
    auto it = normalized_.find(normalize_term(surface));
    if (it == normalized_.end()) return std::nullopt;
    return it->second;
  }

  // Triple indices leaving / entering an entity.
  const std::vector<std::size_t>& outgoing(EntityId id) const { return edges(out_, id); }
  const std::vector<std::size_t>& incoming(EntityId id) const { return edges(in_, id); }

  bool has_triple(EntityId head, const std::string& relation, EntityId tail) const {
    return triple_set_.count(Triple{head, relation, tail}) != 0;
  }

  std::vector<EntityId> entities_of_kind(EntityKind kind) const {
    std::vector<EntityId> ids;
    for (const auto& e : entities_)
      if (e.kind == kind) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // Service entity tagged with a domain, if any.
  std::optional<EntityId> service_for_domain(const std::string& domain) const {
    for (const auto& e : entities_)
      if (e.kind == EntityKind::service && e.domain == domain) return e.id;
    return std::nullopt;
  }

 private:
  static const std::vector<std::size_t>& edges(
      const std::unordered_map<EntityId, std::vector<std::size_t>>& m, EntityId id) {
    static const std::vector<std::size_t> kNone;
    auto it = m.find(id);
    return it == m.end() ? kNone : it->second;
  }

  std::vector<Entity> entities_;
  std::unordered_map<EntityId, std::size_t> index_;
  std::vector<Triple> triples_;
  std::set<Triple> triple_set_;
  std::set<std::string> relations_;
  std::unordered_map<EntityId, std::vector<std::size_t>> out_;
  std::unordered_map<EntityId, std::vector<std::size_t>> in_;
  std::map<std::string, EntityId> lexicon_;
  std::map<std::string, EntityId> normalized_;
  EntityId next_id_ = 0;
};

// Loads `surface<TAB>canonical` lines; canonical must already be a lexicon
// entry. Returns the number of lines that could not be applied.
inline std::size_t load_synonyms(std::istream& in, ServiceKG& kg) {
  std::size_t skipped = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto parts = split(line, '\t');
    if (parts.size() != 2) {
      ++skipped;
      continue;
    }
    auto target = kg.lookup_exact(parts[1]);
    if (!target) target = kg.lookup_normalized(parts[1]);
    if (!target) {
      ++skipped;
      continue;
    }
    kg.add_surface(parts[0], *target);
  }
  return skipped;
}

// One `head_id<TAB>relation<TAB>tail_id` line per triple.
inline void export_triples(const ServiceKG& kg, std::ostream& out) {
  for (const auto& t : kg.triples()) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

inline std::optional<EntityId> try_map_concept(const std::string& term, const ServiceKG& kg) {
  if (term.empty()) return std::nullopt;
  if (auto id = kg.lookup_exact(term)) return id;
  return kg.lookup_normalized(term);
}

// Exact lexicon match, then case/whitespace-normalized match.
inline EntityId map_concept(const std::string& term, const ServiceKG& kg) {
  if (term.empty()) throw Error("empty concept term");
  if (auto id = try_map_concept(term, kg)) return *id;
  throw NotFound("no entity for '" + term + "'");
}

// Candidate entities T with the triples that admitted each one.
struct CandidateSet {
  std::vector<EntityId> members;
  std::map<EntityId, std::vector<Triple>> provenance;

  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
};

// Neighbors of `service` over one hop in either direction, ascending by id.
// Concept entities are query handles, never candidates.
inline CandidateSet candidates_of_service(EntityId service, const ServiceKG& kg) {
  std::map<EntityId, std::vector<Triple>> found;
  for (std::size_t idx : kg.outgoing(service)) {
    const Triple& t = kg.triples()[idx];
    if (t.tail != service) found[t.tail].push_back(t);
  }
  for (std::size_t idx : kg.incoming(service)) {
    const Triple& t = kg.triples()[idx];
    if (t.head != service) found[t.head].push_back(t);
  }
  CandidateSet out;
  for (auto& [id, trace] : found) {
    if (kg.entity(id).kind == EntityKind::concept_term) continue;
    out.members.push_back(id);
    out.provenance.emplace(id, std::move(trace));
  }
  return out;
}

// Service entity behind a mapped concept: the entity itself when it is a
// service, otherwise its lowest-id adjacent service.
inline std::optional<EntityId> service_behind(EntityId id, const ServiceKG& kg) {
  const Entity& e = kg.entity(id);
  if (e.kind == EntityKind::service) return id;
  std::optional<EntityId> best;
  auto consider = [&](EntityId other) {
    if (kg.entity(other).kind == EntityKind::service && (!best || other < *best)) best = other;
  };
  for (std::size_t idx : kg.outgoing(id)) consider(kg.triples()[idx].tail);
  for (std::size_t idx : kg.incoming(id)) consider(kg.triples()[idx].head);
  return best;
}

// Resolves the service entity targeted by an intention. Profession slots are
// tried first, then every other slot in label order.
inline std::optional<EntityId> resolve_service(const IntentionResult& intent, const ServiceKG& kg) {
  std::vector<const RestrictSet*> order;
  if (const auto* pro = intent.find(kProfessionLabel)) order.push_back(pro);
  for (const auto& c : intent.concerns)
    for (const auto& r : c.sets())
      if (r.label != kProfessionLabel) order.push_back(&r);
  for (const auto* r : order) {
    for (const auto& term : r->attributes) {
      auto id = try_map_concept(term, kg);
      if (!id) continue;
      if (auto svc = service_behind(*id, kg)) return svc;
    }
  }
  return std::nullopt;
}

inline CandidateSet resolve_candidates(const IntentionResult& intent, const ServiceKG& kg) {
  auto svc = resolve_service(intent, kg);
  if (!svc) throw EmptyCandidates("intention does not resolve to a service entity");
  return candidates_of_service(*svc, kg);
}

// A member survives if it is a provider, or employs a provider.
inline bool provider_qualified(EntityId id, const ServiceKG& kg) {
  if (kg.entity(id).kind == EntityKind::provider) return true;
  for (std::size_t idx : kg.outgoing(id)) {
    const Triple& t = kg.triples()[idx];
    if (t.relation == kEmployRelation && kg.entity(t.tail).kind == EntityKind::provider) return true;
  }
  return false;
}

inline CandidateSet filter_providers(const CandidateSet& t, const ServiceKG& kg) {
  if (t.empty()) throw EmptyCandidates("nothing to filter");
  CandidateSet out;
  for (EntityId id : t.members) {
    if (!provider_qualified(id, kg)) continue;
    out.members.push_back(id);
    if (auto it = t.provenance.find(id); it != t.provenance.end()) out.provenance.emplace(id, it->second);
  }
  if (out.empty()) throw EmptyCandidates("no provider-qualified candidate");
  return out;
}

}  // namespace elicit
