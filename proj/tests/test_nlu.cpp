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

#include <algorithm>
#include <numeric>
#include <sstream>

#include "elicit/catalog.hpp"
#include "elicit/nlu.hpp"
#include "elicit/synth.hpp"
#include "support/data.hpp"

namespace elicit {
namespace {

using fixture::shipped_lexicon;

IntentionResult intent_of(std::initializer_list<std::pair<const char*, const char*>> slots) {
  IntentionResult d;
  for (const auto& [label, value] : slots) d.primary().add(label, value);
  return d;
}

TEST(ExtractIntent, HousekeeperRequest) {
  auto d = extract_intent(fixture::kHousekeeperRequest, shipped_lexicon());
  EXPECT_EQ(d, intent_of({{"pro", "housekeeper"}, {"price", "low"}, {"gender", "woman"}, {"age", "young"}}));
  ASSERT_EQ(d.concerns.size(), 1u);
  EXPECT_EQ(d.labels(), (std::set<std::string>{"age", "gender", "price", "pro"}));
}

TEST(ExtractIntent, SmallTalkIsChat) {
  EXPECT_TRUE(extract_intent("nice weather today", shipped_lexicon()).is_chat());
  EXPECT_TRUE(extract_intent("", shipped_lexicon()).is_chat());
}

TEST(ExtractIntent, RepeatedTermCountsOnce) {
  auto d = extract_intent("cheap cheap housekeeper", shipped_lexicon());
  ASSERT_NE(d.find("price"), nullptr);
  EXPECT_EQ(d.find("price")->attributes, std::set<std::string>{"low"});
}

TEST(ExtractIntent, SeveralTermsForOneLabelMerge) {
  auto d = extract_intent("a nanny who speaks english or japanese", shipped_lexicon());
  ASSERT_NE(d.find("language"), nullptr);
  EXPECT_EQ(d.find("language")->attributes, (std::set<std::string>{"*", "english", "japanese"}));
}

TEST(ExtractIntent, LongestPhraseWins) {
  auto d = extract_intent("high school graduate, live in please", shipped_lexicon());
  EXPECT_EQ(d, intent_of({{"education", "high_school"}, {"live_in", "yes"}}));
  EXPECT_EQ(extract_intent("not live in", shipped_lexicon()), intent_of({{"live_in", "no"}}));
}

TEST(ExtractIntent, CaseInsensitiveAndOrderFree) {
  const auto& lex = shipped_lexicon();
  auto base = extract_intent("young woman housekeeper cheap", lex);
  EXPECT_EQ(extract_intent("YOUNG Woman HouseKeeper CHEAP", lex), base);
  std::vector<std::string> words = {"cheap", "housekeeper", "woman", "young"};
  do {
    EXPECT_EQ(extract_intent(join(words, " "), lex), base);
  } while (std::next_permutation(words.begin(), words.end()));
}

TEST(ExtractIntent, RestrictSetsAreNonEmptyAndFromInventory) {
  const auto& lex = shipped_lexicon();
  auto inventory = lex.labels();
  Rng rng(5);
  std::vector<std::string> vocab = {"young", "cheap", "master", "haidian", "english", "the", "and",
                                    "price",  "old",  "nanny",  "live", "in", "experienced", "weather"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> words;
    for (int k = 0; k < 6; ++k) words.push_back(vocab[rng.index(vocab.size())]);
    auto d = extract_intent(join(words, " "), lex);
    for (const auto& c : d.concerns)
      for (const auto& r : c.sets()) {
        EXPECT_FALSE(r.attributes.empty());
        EXPECT_TRUE(std::find(inventory.begin(), inventory.end(), r.label) != inventory.end()) << r.label;
      }
  }
}

TEST(SlotLexicon, FileFormat) {
  std::istringstream ok("# comment\nmaid\tpro\thousekeeping\n\nlow price\tprice\tlow\r\n");
  auto lex = load_slot_lexicon(ok);
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.max_words(), 2u);
  ASSERT_NE(lex.find("low price"), nullptr);
  EXPECT_EQ(lex.find("low price")->canonical, "low");
  std::istringstream bad("maid\tpro\n");
  EXPECT_THROW(load_slot_lexicon(bad), FormatError);
}

// ---- domain identification --------------------------------------------------

const ServiceKG& housekeeping_graph() { return fixture::housekeeping_registry().kg; }

TEST(IdentifyDomain, HousekeeperHeadsTheRanking) {
  auto beta = identify_domain(fixture::kHousekeeperRequest, housekeeping_graph());
  ASSERT_FALSE(beta.empty());
  EXPECT_EQ(*beta.top(), "housekeeping");
}

TEST(IdentifyDomain, NoDomainTerms) {
  EXPECT_TRUE(identify_domain("under 3000", housekeeping_graph()).empty());
  EXPECT_TRUE(identify_domain("nice weather", housekeeping_graph()).empty());
}

TEST(IdentifyDomain, EqualHitsOrderAlphabetically) {
  auto beta = identify_domain("book a flight and find a housekeeper", housekeeping_graph());
  ASSERT_EQ(beta.ranked.size(), 2u);
  EXPECT_EQ(beta.ranked[0].first, "housekeeping");
  EXPECT_EQ(beta.ranked[1].first, "travel_agent");
  EXPECT_DOUBLE_EQ(beta.ranked[0].second, 0.5);
  auto swapped = identify_domain("find a housekeeper and book a flight", housekeeping_graph());
  EXPECT_EQ(swapped, beta);
}

TEST(IdentifyDomain, ScoresNormalizedAndSorted) {
  const auto& kg = housekeeping_graph();
  for (const char* u : {"housekeeper housekeeper flight", "maid flight ticket travel agent", "housekeeping",
                        "h001 h002 t001 maid"}) {
    auto beta = identify_domain(u, kg);
    ASSERT_FALSE(beta.empty()) << u;
    double sum = 0.0;
    std::set<std::string> tags;
    for (std::size_t i = 0; i < beta.ranked.size(); ++i) {
      sum += beta.ranked[i].second;
      EXPECT_TRUE(tags.insert(beta.ranked[i].first).second);
      EXPECT_GE(beta.ranked[i].second, 0.0);
      EXPECT_LE(beta.ranked[i].second, 1.0);
      if (i) EXPECT_GE(beta.ranked[i - 1].second, beta.ranked[i].second);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12) << u;
  }
}

TEST(IsFollowUp, Rules) {
  DomainRanking housekeeping{{{"housekeeping", 1.0}}};
  DomainRanking job{{{"job", 0.7}, {"housekeeping", 0.3}}};
  EXPECT_TRUE(is_follow_up(housekeeping, housekeeping));
  EXPECT_FALSE(is_follow_up(job, housekeeping));
  EXPECT_TRUE(is_follow_up(DomainRanking{}, housekeeping));
  EXPECT_FALSE(is_follow_up(housekeeping, DomainRanking{}));
}

TEST(IsFollowUp, AnswerTurnsKeepTheDomain) {
  const auto& kg = housekeeping_graph();
  auto saved = identify_domain(fixture::kHousekeeperRequest, kg);
  for (const char* answer : {"under 5 years experience", "option 2", "bachelor", "between 2000 and 3000"})
    EXPECT_TRUE(is_follow_up(identify_domain(answer, kg), saved)) << answer;
  EXPECT_FALSE(is_follow_up(identify_domain("book a flight", kg), saved));
}

}  // namespace
}  // namespace elicit
