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

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace elicit {

// One slot with its constraint values, e.g. price:{low}.
struct RestrictSet {
  std::string label;
  std::set<std::string> attributes;

  friend bool operator==(const RestrictSet&, const RestrictSet&) = default;
};

// A group of restrict sets describing one requirement concern. Kept sorted by
// label so that equal intentions compare equal regardless of phrasing order.
class Concern {
 public:
  void add(const std::string& label, const std::string& value) {
    auto it = std::lower_bound(sets_.begin(), sets_.end(), label,
                               [](const RestrictSet& r, const std::string& l) { return r.label < l; });
    if (it == sets_.end() || it->label != label) it = sets_.insert(it, RestrictSet{label, {}});
    it->attributes.insert(value);
  }

  void merge(const Concern& other) {
    for (const auto& r : other.sets_)
      for (const auto& v : r.attributes) add(r.label, v);
  }

  const RestrictSet* find(const std::string& label) const {
    for (const auto& r : sets_)
      if (r.label == label) return &r;
    return nullptr;
  }

  const std::vector<RestrictSet>& sets() const { return sets_; }
  bool empty() const { return sets_.empty(); }

  friend bool operator==(const Concern&, const Concern&) = default;

 private:
  std::vector<RestrictSet> sets_;
};

// The user's intention D = {D_1, D_2, ...}. Empty means the utterance is chat.
struct IntentionResult {
  std::vector<Concern> concerns;

  bool is_chat() const { return concerns.empty(); }

  // First concern, created on demand. Extraction is single-concern.
  Concern& primary() {
    if (concerns.empty()) concerns.emplace_back();
    return concerns.front();
  }

  const RestrictSet* find(const std::string& label) const {
    for (const auto& c : concerns)
      if (const auto* r = c.find(label)) return r;
    return nullptr;
  }

  std::set<std::string> labels() const {
    std::set<std::string> out;
    for (const auto& c : concerns)
      for (const auto& r : c.sets()) out.insert(r.label);
    return out;
  }

  void merge(const IntentionResult& other) {
    for (const auto& c : other.concerns)
      if (!c.empty()) primary().merge(c);
  }

  friend bool operator==(const IntentionResult&, const IntentionResult&) = default;
};

}  // namespace elicit
