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

// Lexicon-driven understanding of user utterances: slot extraction into an
// intention structure, domain identification, and follow-up detection.

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elicit/error.hpp"
#include "elicit/intent.hpp"
#include "elicit/kg.hpp"
#include "elicit/util.hpp"

namespace elicit {

struct SlotEntry {
  std::string label;
  std::string canonical;
};

// term -> (label, canonical value). Terms may span several words and are
// matched on normalized tokens.
class SlotLexicon {
 public:
  void add(const std::string& term, std::string label, std::string canonical) {
    auto key = join(tokenize(term), " ");
    if (key.empty()) return;
    std::size_t words = std::count(key.begin(), key.end(), ' ') + 1;
    max_words_ = std::max(max_words_, words);
    entries_[key] = SlotEntry{std::move(label), std::move(canonical)};
  }

  const SlotEntry* find(const std::string& normalized_phrase) const {
    auto it = entries_.find(normalized_phrase);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t max_words() const { return max_words_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::vector<std::string> labels() const {
    std::set<std::string> s;
    for (const auto& [k, v] : entries_) s.insert(v.label);
    return {s.begin(), s.end()};
  }

 private:
  std::map<std::string, SlotEntry> entries_;
  std::size_t max_words_ = 0;
};

// `term<TAB>label<TAB>canonical_value` per line; '#' starts a comment line.
inline SlotLexicon load_slot_lexicon(std::istream& in) {
  SlotLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto parts = split(line, '\t');
    if (parts.size() != 3)
      throw FormatError("slot lexicon line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    lex.add(parts[0], trim(parts[1]), trim(parts[2]));
  }
  return lex;
}

inline SlotLexicon load_slot_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open slot lexicon '" + path + "'");
  return load_slot_lexicon(in);
}

struct SlotMatch {
  std::size_t first_token = 0;
  std::size_t tokens = 0;
  std::string term;
  SlotEntry entry;
};

// Greedy longest-match scan over the tokenized utterance.
inline std::vector<SlotMatch> match_slots(const std::vector<std::string>& tokens, const SlotLexicon& lex) {
  std::vector<SlotMatch> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    std::size_t longest = std::min(lex.max_words(), tokens.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      std::vector<std::string> window(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      auto phrase = join(window, " ");
      if (const auto* e = lex.find(phrase)) {
        out.push_back({i, len, phrase, *e});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

// Every matched term becomes a restrict set; repeated labels merge. No match
// yields an empty intention, meaning chat.
inline IntentionResult extract_intent(const std::string& utterance, const SlotLexicon& lex) {
  IntentionResult out;
  for (const auto& m : match_slots(tokenize(utterance), lex)) out.primary().add(m.entry.label, m.entry.canonical);
  return out;
}

struct DomainRanking {
  std::vector<std::pair<std::string, double>> ranked;

  bool empty() const { return ranked.empty(); }
  const std::string* top() const { return ranked.empty() ? nullptr : &ranked.front().first; }

  friend bool operator==(const DomainRanking&, const DomainRanking&) = default;
};

// Counts lexicon hits on graph entities carrying a domain tag (services,
// providers, domain-tagged concepts) and normalizes the counts.
inline DomainRanking identify_domain(const std::string& utterance, const ServiceKG& kg,
                                     std::size_t max_words = 4) {
  auto tokens = tokenize(utterance);
  std::map<std::string, double> hits;
  double total = 0.0;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t step = 1;
    for (std::size_t len = std::min(max_words, tokens.size() - i); len >= 1; --len) {
      std::vector<std::string> window(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      auto id = kg.lookup_normalized(join(window, " "));
      if (!id) continue;
      const auto& e = kg.entity(*id);
      if (e.domain.empty()) continue;
      hits[e.domain] += 1.0;
      total += 1.0;
      step = len;
      break;
    }
    i += step;
  }
  DomainRanking out;
  for (const auto& [tag, count] : hits) out.ranked.emplace_back(tag, count / total);
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

// An utterance continues the dialogue when it names no domain at all, or when
// its top domain equals the one saved at session start.
inline bool is_follow_up(const DomainRanking& current, const DomainRanking& saved) {
  if (current.empty()) return true;
  if (saved.empty()) return false;
  return *current.top() == *saved.top();
}

}  // namespace elicit
