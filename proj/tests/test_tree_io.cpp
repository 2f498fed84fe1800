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

#include <cstdio>
#include <filesystem>

#include "elicit/catalog.hpp"
#include "elicit/synth.hpp"
#include "elicit/tree_io.hpp"

namespace elicit {
namespace {

PolicyTree pbce_tree(Strategy s = Strategy::grc) {
  auto m = attribute_matrix(pbce_fixture(), "nursery_teacher");
  if (s == Strategy::kmeans) return kmeans_policy_tree(m, 8, 1, "nursery_teacher");
  return build_policy_tree(m, {}, "nursery_teacher");
}

TEST(TreeIo, PbceRoundTripsByteIdentically) {
  auto tree = pbce_tree();
  auto text = serialize_tree(tree);
  auto back = parse_tree(text);
  EXPECT_EQ(serialize_tree(back), text);
  EXPECT_EQ(back.nodes.size(), tree.nodes.size());
  EXPECT_EQ(back.n_threshold, 8);
  EXPECT_EQ(back.service_type, "nursery_teacher");
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    EXPECT_EQ(back.nodes[i].candidates, tree.nodes[i].candidates);
    EXPECT_EQ(back.nodes[i].inquiring, tree.nodes[i].inquiring);
    EXPECT_EQ(back.nodes[i].children, tree.nodes[i].children);
    EXPECT_EQ(back.nodes[i].leaf, tree.nodes[i].leaf);
    ASSERT_EQ(back.nodes[i].descriptors.size(), tree.nodes[i].descriptors.size());
    for (std::size_t c = 0; c < tree.nodes[i].descriptors.size(); ++c)
      EXPECT_EQ(back.nodes[i].descriptors[c].summary(), tree.nodes[i].descriptors[c].summary());
  }
}

TEST(TreeIo, BuildingTwiceGivesTheSameDocument) {
  EXPECT_EQ(serialize_tree(pbce_tree()), serialize_tree(pbce_tree()));
  EXPECT_EQ(serialize_tree(pbce_tree(Strategy::kmeans)), serialize_tree(pbce_tree(Strategy::kmeans)));
}

TEST(TreeIo, DocumentCarriesVersionStrategyAndConfig) {
  auto j = ojson::parse(serialize_tree(pbce_tree(Strategy::kmeans)));
  EXPECT_EQ(j.at("schema_version"), kTreeSchemaVersion);
  EXPECT_EQ(j.at("strategy"), "kmeans");
  EXPECT_TRUE(j.contains("config"));
  EXPECT_EQ(parse_tree(j.dump()).strategy, Strategy::kmeans);
}

TEST(TreeIo, StoreRoundTrip) {
  std::vector<PolicyTree> trees = {pbce_tree(), pbce_tree(Strategy::kmeans)};
  auto text = serialize_tree_store(trees);
  auto back = parse_tree_store(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(serialize_tree_store(back), text);
}

TEST(TreeIo, RejectsBadDocuments) {
  EXPECT_THROW(parse_tree("{not json"), FormatError);
  auto j = ojson::parse(serialize_tree(pbce_tree()));
  auto wrong_version = j;
  wrong_version["schema_version"] = 99;
  EXPECT_THROW(parse_tree(wrong_version.dump()), FormatError);
  auto missing = j;
  missing.erase("nodes");
  EXPECT_THROW(parse_tree(missing.dump()), FormatError);
  auto dangling = j;
  dangling["nodes"][0]["children"][0] = 999;
  EXPECT_THROW(parse_tree(dangling.dump()), FormatError);
  EXPECT_THROW(parse_tree_store("{\"schema_version\": 7, \"trees\": []}"), FormatError);
}

TEST(TreeIo, FileHelpers) {
  auto path = (std::filesystem::temp_directory_path() / "elicit_tree_io_test.json").string();
  auto text = serialize_tree(pbce_tree());
  write_text_file(path, text);
  EXPECT_EQ(read_text_file(path), text);
  std::remove(path.c_str());
  EXPECT_THROW(read_text_file(path), NotFound);
}

}  // namespace
}  // namespace elicit
