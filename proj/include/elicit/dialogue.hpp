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

// Online elicitation sessions.
//
// A session walks one compiled policy tree. The opening utterance seeds the
// intention D and the candidate set T; slots already in D pre-route past the
// rounds they answer. Each later turn is parsed into an answer for the
// current node, routed, and rendered as the next question or as the final
// recommendation list.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "elicit/catalog.hpp"
#include "elicit/error.hpp"
#include "elicit/intent.hpp"
#include "elicit/kg.hpp"
#include "elicit/nlu.hpp"
#include "elicit/policy.hpp"
#include "elicit/util.hpp"

namespace elicit {

// Lexicon entries with this canonical value only name an attribute
// ("years of experience", "yuan"); they guide numeric answers and never
// become constraints.
inline constexpr const char* kMentionValue = "*";

class Templates {
 public:
  static Templates defaults() {
    Templates t;
    t.set("question", "What are the {attributes} restricts?");
    t.set("unknown_attribute", "Please specify {attribute}.");
    t.set("options", "Options: {options}.");
    t.set("final_many", "No attributes left and we get a lot of services for you:");
    t.set("final_few", "Prepare {count_word} services for you:");
    t.set("service_line", "{rank}. {provider}: {details}");
    t.set("apology", "Sorry, no service matches your request. Please tell me again what you need.");
    t.set("chat", "I can help you find home services. What kind of service do you need?");
    t.set("clarify", "Which kind of service do you need?");
    for (const char* a : {"age", "gender", "experience", "education", "evaluation", "price", "language"})
      t.set(std::string("attr.") + a, a);
    t.set("attr.service_area", "service area");
    t.set("attr.live_in", "live-in");
    return t;
  }

  void set(const std::string& key, std::string text) { entries_[key] = std::move(text); }

  const std::string& get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw NotFound("no template '" + key + "'");
    return it->second;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string fill(const std::string& key, const std::map<std::string, std::string>& values) const {
    const std::string& t = get(key);
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == '{') {
        auto close = t.find('}', i);
        if (close != std::string::npos) {
          auto it = values.find(t.substr(i + 1, close - i - 1));
          if (it != values.end()) {
            out += it->second;
            i = close;
            continue;
          }
        }
      }
      out.push_back(t[i]);
    }
    return out;
  }

  // Display name of an attribute; unknown attributes have none.
  std::optional<std::string> display_name(const std::string& attribute) const {
    auto it = entries_.find("attr." + attribute);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> entries_;
};

// `key<TAB>template` per line; '#' starts a comment. Entries override the
// built-in defaults.
inline Templates load_templates(std::istream& in) {
  Templates t = Templates::defaults();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("template line " + std::to_string(line_no) + ": expected key<TAB>template");
    t.set(trim(line.substr(0, tab)), line.substr(tab + 1));
  }
  return t;
}

inline Templates load_templates_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open templates '" + path + "'");
  return load_templates(in);
}

namespace detail {

inline std::string join_names(const std::vector<std::string>& names) {
  if (names.size() <= 1) return names.empty() ? std::string() : names.front();
  std::vector<std::string> head(names.begin(), names.end() - 1);
  return join(head, ", ") + " and " + names.back();
}

}  // namespace detail

// Question for one inquiring attribute set. `quantity` is the number of
// attributes named by the round.
inline std::string render_intermediate(const std::vector<std::string>& tag, std::size_t quantity,
                                       const Templates& templates,
                                       const std::vector<std::string>& option_summaries = {},
                                       bool categorical = false) {
  if (tag.empty()) throw StateError("a question needs at least one inquiring attribute");
  if (quantity != tag.size()) throw StateError("attribute count does not match the inquiring set");
  std::vector<std::string> known;
  std::vector<std::string> sentences;
  for (const auto& a : tag) {
    if (auto name = templates.display_name(a)) known.push_back(*name);
  }
  if (!known.empty()) sentences.push_back(templates.fill("question", {{"attributes", detail::join_names(known)}}));
  for (const auto& a : tag)
    if (!templates.display_name(a)) sentences.push_back(templates.fill("unknown_attribute", {{"attribute", a}}));
  if (categorical && !option_summaries.empty()) {
    std::vector<std::string> numbered;
    for (std::size_t i = 0; i < option_summaries.size(); ++i)
      numbered.push_back(std::to_string(i + 1) + ") " + option_summaries[i]);
    sentences.push_back(templates.fill("options", {{"options", join(numbered, "; ")}}));
  }
  return join(sentences, " ");
}

enum class ReplyKind { chat_deflection, question, final_recommendation };

inline const char* to_string(ReplyKind k) {
  switch (k) {
    case ReplyKind::chat_deflection: return "chat_deflection";
    case ReplyKind::question: return "question";
    case ReplyKind::final_recommendation: return "final_recommendation";
  }
  return "question";
}

struct OptionView {
  std::size_t index = 0;
  std::string summary;
  GranuleDescriptor granule;
};

struct ServiceView {
  std::string provider_id;
  int score = 0;  // number of user constraints satisfied
  std::vector<std::pair<std::string, std::string>> fields;
};

struct Reply {
  ReplyKind kind = ReplyKind::chat_deflection;
  std::string text;
  std::vector<OptionView> options;
  std::vector<ServiceView> services;
  int end_tag = 0;
  int round = 0;
  std::optional<int> cursor;
};

// Everything a session needs, loaded once and shared read-only.
struct Registry {
  Catalog catalog;
  ServiceKG kg;
  SlotLexicon lexicon;
  Templates templates = Templates::defaults();
  std::map<std::string, PolicyTree> trees;  // by service type

  const PolicyTree* tree(const std::string& type) const {
    auto it = trees.find(type);
    return it == trees.end() ? nullptr : &it->second;
  }
};

// Graph, lexicons and one tree per service type of `catalog`.
inline Registry build_registry(Catalog catalog, SlotLexicon lexicon, Templates templates, const PolicyConfig& config,
                               std::istream* synonyms = nullptr) {
  Registry reg;
  reg.kg = build_graph(catalog);
  if (synonyms) load_synonyms(*synonyms, reg.kg);
  for (const auto& type : catalog.service_types())
    reg.trees.emplace(type, build_policy_tree(attribute_matrix(catalog, type), config, type));
  reg.catalog = std::move(catalog);
  reg.lexicon = std::move(lexicon);
  reg.templates = std::move(templates);
  return reg;
}

// Same, with trees loaded from a store instead of rebuilt.
inline Registry registry_from_trees(Catalog catalog, SlotLexicon lexicon, Templates templates,
                                    std::vector<PolicyTree> trees, std::istream* synonyms = nullptr) {
  Registry reg;
  reg.kg = build_graph(catalog);
  if (synonyms) load_synonyms(*synonyms, reg.kg);
  for (auto& t : trees) {
    std::string type = t.service_type;
    if (!reg.trees.emplace(type, std::move(t)).second) throw ConfigError("duplicate tree for '" + type + "'");
  }
  reg.catalog = std::move(catalog);
  reg.lexicon = std::move(lexicon);
  reg.templates = std::move(templates);
  return reg;
}

struct Session {
  std::string id;
  DomainRanking saved_domain;
  IntentionResult intention;
  std::string service_type;
  const PolicyTree* tree = nullptr;
  int cursor = 0;
  int round = 0;
  int end_tag = 0;
  std::vector<std::string> candidates;  // T after filtering, by provider id
};

// ---------------------------------------------------------------------------
// Constraint values as stored in D: a fuzzy term ("low"), a level or label
// ("bachelor"), a number ("5"), or a bound ("<5", ">3", "3..5").

struct ValueConstraint {
  std::optional<double> fuzzy;
  std::optional<NumericConstraint> numeric;
  std::string label;
};

inline ValueConstraint parse_value(const std::string& v) {
  ValueConstraint c;
  if (auto f = fuzzy_position(v)) {
    c.fuzzy = f;
    return c;
  }
  if (!v.empty() && (v[0] == '<' || v[0] == '>')) {
    if (auto x = parse_number(v.substr(1))) {
      NumericConstraint q;
      (v[0] == '<' ? q.hi : q.lo) = *x;
      c.numeric = q;
      return c;
    }
  }
  if (auto dots = v.find(".."); dots != std::string::npos) {
    auto a = parse_number(v.substr(0, dots)), b = parse_number(v.substr(dots + 2));
    if (a && b) {
      c.numeric = NumericConstraint{std::min(*a, *b), std::max(*a, *b)};
      return c;
    }
  }
  if (auto x = parse_number(v)) {
    c.numeric = NumericConstraint::exactly(*x);
    return c;
  }
  c.label = v;
  return c;
}

namespace detail {

inline const char* fuzzy_name(double pos) { return pos < 0.25 ? "low" : (pos > 0.75 ? "high" : "medium"); }

// Answer to `node` from the values D holds for its inquiring attributes.
inline Answer answer_from_intention(const IntentionResult& d, const PolicyNode& node, const PolicyTree& tree) {
  Answer ans;
  for (const auto& attr : node.inquiring) {
    const RestrictSet* r = d.find(attr);
    if (!r) continue;
    const ColumnMeta* meta = tree.column(attr);
    for (const auto& v : r->attributes) {
      ValueConstraint c = parse_value(v);
      if (c.fuzzy) {
        ans.ordinal[attr] = *c.fuzzy;
      } else if (c.numeric && meta && !meta->categorical()) {
        ans.numeric[attr] = *c.numeric;
      } else if (!c.label.empty()) {
        ans.categories[attr].insert(c.label);
      }
    }
  }
  return ans;
}

inline bool addresses_node(const Answer& a, const PolicyNode& node) {
  for (const auto& attr : node.inquiring)
    if (a.addresses(attr)) return true;
  return false;
}

}  // namespace detail

// Does a catalog cell satisfy one stored constraint value?
inline bool satisfies(const CellValue& cell, const std::string& value, const ColumnMeta* meta) {
  ValueConstraint c = parse_value(value);
  if (cell.missing()) return false;
  if (cell.kind == CellValue::Kind::labels) {
    if (!c.label.empty())
      return std::find(cell.labels.begin(), cell.labels.end(), c.label) != cell.labels.end();
    if (c.fuzzy && meta && meta->kind == ColumnKind::ordinal && meta->categories.size() > 1) {
      double pos = static_cast<double>(meta->code_of(cell.labels.front())) /
                   static_cast<double>(meta->categories.size() - 1);
      if (*c.fuzzy < 0.25) return pos <= 1.0 / 3.0;
      if (*c.fuzzy > 0.75) return pos >= 2.0 / 3.0;
      return pos >= 1.0 / 3.0 && pos <= 2.0 / 3.0;
    }
    return false;
  }
  const double x = cell.number;
  if (c.numeric) return x >= c.numeric->lo && x <= c.numeric->hi;
  if (c.fuzzy && meta) {
    double pos = meta->max > meta->min ? (x - meta->min) / (meta->max - meta->min) : 0.5;
    if (*c.fuzzy < 0.25) return pos <= 1.0 / 3.0;
    if (*c.fuzzy > 0.75) return pos >= 2.0 / 3.0;
    return pos >= 1.0 / 3.0 && pos <= 2.0 / 3.0;
  }
  return false;
}

// Number of restrict sets in D that a provider meets (any value of a set).
inline int match_score(const ProviderRecord& rec, const Catalog& cat, const IntentionResult& d,
                       const std::vector<ColumnMeta>& columns) {
  int score = 0;
  for (const auto& concern : d.concerns) {
    for (const auto& r : concern.sets()) {
      std::size_t a = cat.attributes.size();
      for (std::size_t i = 0; i < cat.attributes.size(); ++i)
        if (cat.attributes[i] == r.label) a = i;
      if (a == cat.attributes.size()) continue;
      const ColumnMeta* meta = nullptr;
      for (const auto& c : columns)
        if (c.name == r.label) meta = &c;
      for (const auto& v : r.attributes)
        if (satisfies(rec.values[a], v, meta)) {
          ++score;
          break;
        }
    }
  }
  return score;
}

struct FinalRendering {
  std::string text;
  std::vector<ServiceView> services;
};

// Up to n providers, best match first (ties by provider id), each with its
// full attribute listing.
inline FinalRendering render_final(const std::vector<std::string>& candidates, const Catalog& catalog, std::size_t n,
                                   const Templates& templates, const IntentionResult& d = {},
                                   const std::vector<ColumnMeta>& columns = {}) {
  FinalRendering out;
  if (candidates.empty()) {
    out.text = templates.get("apology");
    return out;
  }
  std::vector<ServiceView> views;
  for (const auto& id : candidates) {
    const ProviderRecord* rec = catalog.find(id);
    if (!rec) throw NotFound("provider '" + id + "' is not in the catalog");
    ServiceView v;
    v.provider_id = id;
    v.score = match_score(*rec, catalog, d, columns);
    for (std::size_t a = 0; a < catalog.attributes.size(); ++a)
      v.fields.emplace_back(catalog.attributes[a], rec->values[a].text());
    views.push_back(std::move(v));
  }
  std::stable_sort(views.begin(), views.end(), [](const ServiceView& a, const ServiceView& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.provider_id < b.provider_id;
  });
  const std::size_t shown = std::min(n, views.size());
  std::vector<std::string> lines;
  lines.push_back(views.size() > n ? templates.get("final_many")
                                   : templates.fill("final_few", {{"count_word", number_word(shown)},
                                                                  {"count", std::to_string(shown)}}));
  for (std::size_t i = 0; i < shown; ++i) {
    std::vector<std::string> details;
    for (const auto& [k, v] : views[i].fields) details.push_back(k + " " + v);
    lines.push_back(templates.fill("service_line", {{"rank", std::to_string(i + 1)},
                                                    {"provider", views[i].provider_id},
                                                    {"details", join(details, ", ")}}));
  }
  views.resize(shown);
  out.services = std::move(views);
  out.text = join(lines, "\n");
  return out;
}

// ---------------------------------------------------------------------------
// Parsing one free-text answer into D entries for the current node.

namespace detail {

struct NumericMention {
  std::size_t token = 0;
  std::string value;  // canonical form stored in D
  std::vector<std::size_t> consumed;  // qualifier and bound tokens
};

inline std::vector<NumericMention> numeric_mentions(const std::vector<std::string>& tokens) {
  static const std::set<std::string> kBelow = {"under", "below", "within", "cheaper", "younger", "less", "fewer",
                                               "lower", "max", "maximum", "most", "<"};
  static const std::set<std::string> kAbove = {"over", "above", "more", "older", "higher", "least", "min",
                                               "minimum", "greater", "beyond", ">"};
  std::vector<NumericMention> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    std::optional<double> x = parse_number(t);
    if (!x) {
      // "2000-3000" arrives as one token.
      auto dash = t.find('-');
      if (dash != std::string::npos && dash > 0) {
        auto a = parse_number(t.substr(0, dash)), b = parse_number(t.substr(dash + 1));
        if (a && b) out.push_back({i, format_number(std::min(*a, *b)) + ".." + format_number(std::max(*a, *b)), {}});
      }
      continue;
    }
    // between A and B / from A to B
    if (i + 2 < tokens.size() && (tokens[i + 1] == "and" || tokens[i + 1] == "to")) {
      if (auto y = parse_number(tokens[i + 2]); y && i > 0 && (tokens[i - 1] == "between" || tokens[i - 1] == "from")) {
        out.push_back({i, format_number(std::min(*x, *y)) + ".." + format_number(std::max(*x, *y)),
                       {i - 1, i + 1, i + 2}});
        i += 2;
        continue;
      }
    }
    NumericMention m{i, format_number(*x), {}};
    for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
      const std::string& w = tokens[i - back];
      if (kBelow.count(w) || kAbove.count(w)) {
        m.value = (kBelow.count(w) ? "<" : ">") + m.value;
        m.consumed.push_back(i - back);
        break;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::optional<std::size_t> option_index(const std::vector<std::string>& tokens) {
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i] == "option" || tokens[i] == "choice" || tokens[i] == "number" || tokens[i] == "no") {
      if (auto x = parse_number(tokens[i + 1]); x && *x >= 1 && *x == std::floor(*x))
        return static_cast<std::size_t>(*x) - 1;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Restrict sets contributed by one answer at `node`: lexicon slots, numeric
// bounds tied to the attribute they mention (or to the node's first numeric
// attribute), and bare fuzzy words applied to the node's first attribute.
inline IntentionResult parse_answer(const std::string& utterance, const PolicyNode& node, const PolicyTree& tree,
                                    const SlotLexicon& lexicon) {
  IntentionResult d;
  auto tokens = tokenize(utterance);
  auto slots = match_slots(tokens, lexicon);
  std::vector<bool> covered(tokens.size(), false);
  std::vector<std::pair<std::size_t, std::string>> mentions;
  for (const auto& m : slots) {
    for (std::size_t k = 0; k < m.tokens; ++k) covered[m.first_token + k] = true;
    if (m.entry.canonical == kMentionValue) mentions.emplace_back(m.first_token, m.entry.label);
    else d.primary().add(m.entry.label, m.entry.canonical);
  }

  auto first_numeric = [&]() -> std::optional<std::string> {
    for (const auto& a : node.inquiring)
      if (const auto* c = tree.column(a); c && !c->categorical()) return a;
    return std::nullopt;
  };
  for (const auto& num : detail::numeric_mentions(tokens)) {
    if (covered[num.token]) continue;
    for (std::size_t k : num.consumed) covered[k] = true;
    std::optional<std::string> label;
    std::size_t best = tokens.size() + 1;
    for (const auto& [pos, l] : mentions) {
      std::size_t dist = pos > num.token ? pos - num.token : num.token - pos;
      if (dist <= 4 && dist < best) {
        best = dist;
        label = l;
      }
    }
    if (!label) label = first_numeric();
    if (label) d.primary().add(*label, num.value);
  }

  if (!node.inquiring.empty()) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (covered[i]) continue;
      if (auto f = fuzzy_position(tokens[i])) {
        std::string label = node.inquiring.front();
        for (const auto& [pos, l] : mentions)
          if (pos == i + 1 || pos + 1 == i) label = l;
        d.primary().add(label, detail::fuzzy_name(*f));
      }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Session operations

namespace detail {

inline std::vector<std::string> candidates_at(const Session& s) {
  const auto& ids = s.tree->node(s.cursor).candidates;
  std::set<std::string> allowed(s.candidates.begin(), s.candidates.end());
  std::vector<std::string> out;
  for (const auto& id : ids)
    if (allowed.count(id)) out.push_back(id);
  return out;
}

inline Reply question_reply(const Session& s, const Registry& reg, bool enumerate = false) {
  const PolicyNode& node = s.tree->node(s.cursor);
  Reply r;
  r.kind = ReplyKind::question;
  r.round = s.round;
  r.cursor = s.cursor;
  std::vector<std::string> summaries;
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    r.options.push_back({c, node.descriptors[c].summary(), node.descriptors[c]});
    summaries.push_back(node.descriptors[c].summary());
  }
  bool categorical = enumerate;
  for (const auto& a : node.inquiring)
    if (const auto* m = s.tree->column(a); m && m->categorical()) categorical = true;
  r.text = render_intermediate(node.inquiring, node.inquiring.size(), reg.templates, summaries, categorical);
  return r;
}

inline Reply final_reply(Session& s, const Registry& reg) {
  s.end_tag = 1;
  Reply r;
  r.kind = ReplyKind::final_recommendation;
  r.round = s.round;
  r.cursor = s.cursor;
  r.end_tag = 1;
  auto fr = render_final(candidates_at(s), reg.catalog, static_cast<std::size_t>(s.tree->n_threshold), reg.templates,
                         s.intention, s.tree->columns);
  r.text = std::move(fr.text);
  r.services = std::move(fr.services);
  return r;
}

// Follows the tree while D answers the current node.
inline void pre_route(Session& s, const IntentionResult& d) {
  for (;;) {
    const PolicyNode& node = s.tree->node(s.cursor);
    if (node.leaf) return;
    Answer a = answer_from_intention(d, node, *s.tree);
    if (!addresses_node(a, node)) return;
    auto next = route(*s.tree, node, a);
    if (!next) return;
    s.cursor = *next;
  }
}

inline Reply advance_reply(Session& s, const Registry& reg) {
  if (s.tree->node(s.cursor).leaf) return final_reply(s, reg);
  return question_reply(s, reg);
}

inline Reply chat_reply(const Registry& reg) {
  Reply r;
  r.kind = ReplyKind::chat_deflection;
  r.text = reg.templates.get("chat");
  return r;
}

}  // namespace detail

struct StartResult {
  std::optional<Session> session;  // absent for chat and clarifying replies
  Reply reply;
};

inline StartResult start_session(const std::string& utterance, const Registry& reg, std::string id = {}) {
  StartResult out;
  IntentionResult d = extract_intent(utterance, reg.lexicon);
  // Attribute mentions alone carry no requirement.
  IntentionResult constraints;
  for (const auto& c : d.concerns)
    for (const auto& r : c.sets())
      for (const auto& v : r.attributes)
        if (v != kMentionValue) constraints.primary().add(r.label, v);
  if (constraints.is_chat()) {
    out.reply = detail::chat_reply(reg);
    return out;
  }

  DomainRanking beta = identify_domain(utterance, reg.kg);
  std::optional<EntityId> service = resolve_service(constraints, reg.kg);
  std::string type;
  if (const std::string* top = beta.top()) type = *top;
  else if (service) type = reg.kg.entity(*service).domain;
  if (!type.empty()) {
    if (auto svc = reg.kg.service_for_domain(type)) service = svc;
  }
  const PolicyTree* tree = type.empty() ? nullptr : reg.tree(type);
  if (!service || !tree) {
    out.reply.kind = ReplyKind::question;
    out.reply.text = reg.templates.get("clarify");
    return out;
  }

  Session s;
  s.id = std::move(id);
  s.saved_domain = beta.empty() ? DomainRanking{{{type, 1.0}}} : beta;
  s.intention = constraints;
  // Numbers in the opening turn bind only to an attribute they sit next to.
  s.intention.merge(parse_answer(utterance, PolicyNode{}, *tree, reg.lexicon));
  s.service_type = type;
  s.tree = tree;
  s.round = 1;
  try {
    auto t = filter_providers(candidates_of_service(*service, reg.kg), reg.kg);
    for (EntityId m : t.members) s.candidates.push_back(reg.kg.entity(m).name);
  } catch (const EmptyCandidates&) {
    s.candidates.clear();
  }
  detail::pre_route(s, s.intention);
  out.reply = detail::advance_reply(s, reg);
  out.session = std::move(s);
  return out;
}

// One user turn. An utterance naming a different domain restarts the session
// under the same id; a reprompt repeats the question and still counts.
inline Reply handle_turn(Session& s, const std::string& utterance, const Registry& reg,
                         std::optional<std::size_t> option = std::nullopt) {
  if (!s.tree) throw StateError("session has no policy tree");
  if (s.end_tag == 1) throw StateError("session already finished");
  if (!option) {
    DomainRanking beta = identify_domain(utterance, reg.kg);
    if (!is_follow_up(beta, s.saved_domain)) {
      auto fresh = start_session(utterance, reg, s.id);
      if (fresh.session) s = std::move(*fresh.session);
      return fresh.reply;
    }
  }

  const PolicyNode& node = s.tree->node(s.cursor);
  s.round += 1;
  Answer answer;
  IntentionResult turn;
  if (!option) option = detail::option_index(tokenize(utterance));
  if (option) {
    answer.option = option;
  } else {
    turn = parse_answer(utterance, node, *s.tree, reg.lexicon);
    answer = detail::answer_from_intention(turn, node, *s.tree);
  }
  auto next = route(*s.tree, node, answer);
  if (!next) {
    return detail::question_reply(s, reg, true);
  }
  s.intention.merge(turn);
  s.cursor = *next;
  detail::pre_route(s, s.intention);
  return detail::advance_reply(s, reg);
}

// ---------------------------------------------------------------------------
// Transcript log: one JSON record per turn.

class TranscriptLog {
 public:
  explicit TranscriptLog(std::ostream* out = nullptr) : out_(out) {}

  void record(const std::string& session_id, const std::string& utterance, const Reply& reply) {
    if (!out_) return;
    nlohmann::ordered_json j;
    j["session"] = session_id;
    j["round"] = reply.round;
    j["utterance"] = utterance;
    j["kind"] = to_string(reply.kind);
    j["cursor"] = reply.cursor ? nlohmann::ordered_json(*reply.cursor) : nlohmann::ordered_json(nullptr);
    std::lock_guard<std::mutex> lock(mu_);
    *out_ << j.dump() << '\n';
    out_->flush();
  }

 private:
  std::ostream* out_;
  std::mutex mu_;
};

}  // namespace elicit
