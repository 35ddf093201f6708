// Copyright 2026 The winocheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "winocheck/scoring.h"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "winocheck/errors.h"

namespace winocheck {
namespace {

using Groups = std::vector<std::pair<std::string, std::vector<std::string>>>;

TEST(SingleScoreTest, Examples) {
  std::map<std::string, int> golds = {{"a", 0}, {"b", 1}, {"c", 0}, {"d", 1}};
  EXPECT_DOUBLE_EQ(SingleScore(golds, golds, Accuracy()), 1.0);
  std::map<std::string, int> preds = {{"a", 0}, {"b", 1}, {"c", 0}, {"d", 0}};
  EXPECT_DOUBLE_EQ(SingleScore(preds, golds, Accuracy()), 0.75);
  preds.erase("c");
  try {
    SingleScore(preds, golds, Accuracy());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("c"), std::string::npos);
  }
}

TEST(GroupScoreTest, Examples) {
  const ScoreFunction acc = Accuracy();
  EXPECT_DOUBLE_EQ(GroupScore({{"a", "b"}}, {{"a", 1}, {"b", 1}}, acc).mean, 1.0);
  EXPECT_DOUBLE_EQ(GroupScore({{"a", "b"}}, {{"a", 1}, {"b", 0}}, acc).mean, 0.0);
  EXPECT_DOUBLE_EQ(GroupScore({{"a", "b"}}, {{"a", 0.7}, {"b", 0.4}}, acc).mean, 0.4);
  EXPECT_THROW(GroupScore({{"a", "b"}}, {{"a", 1}}, acc), ValidationError);
}

TEST(GroupScoreTest, LowerIsBetterUsesMax) {
  ScoreFunction loss{"loss", [](int p, int g) { return p == g ? 0.0 : 1.0; }, false};
  EXPECT_DOUBLE_EQ(GroupScore({{"a", "b"}}, {{"a", 0.2}, {"b", 0.9}}, loss).mean, 0.9);
  EXPECT_DOUBLE_EQ(loss.Worst(0.2, 0.9), 0.9);
  EXPECT_DOUBLE_EQ(Accuracy().Worst(0.2, 0.9), 0.2);
}

TEST(ChanceLevelsTest, Examples) {
  auto two = ComputeChanceLevels(2, 2);
  EXPECT_DOUBLE_EQ(two.single, 0.5);
  EXPECT_DOUBLE_EQ(two.group, 0.25);
  EXPECT_DOUBLE_EQ(ComputeChanceLevels(3, 2).group, 0.125);
  auto four = ComputeChanceLevels(1, 4);
  EXPECT_DOUBLE_EQ(four.single, 0.25);
  EXPECT_DOUBLE_EQ(four.group, 0.25);
  EXPECT_THROW(ComputeChanceLevels(0, 2), ValidationError);
  EXPECT_THROW(ComputeChanceLevels(2, 1), ValidationError);
}

TEST(DecideTest, ZeroShot) {
  ZeroShotQuery q;
  EXPECT_EQ(ZeroShotDecide(q, {-1.2, -3.4}), 0);
  EXPECT_EQ(ZeroShotDecide(q, {-3.4, -1.2}), 1);
  EXPECT_EQ(ZeroShotDecide(q, {-2.0, -2.0}), 0);
  EXPECT_FALSE(ZeroShotDecide(q, {-2.0, std::nullopt}).has_value());
}

TEST(DecideTest, ZeroShotShiftInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> score(-20.0, 0.0);
  std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
  ZeroShotQuery q;
  for (int k = 0; k < 5000; ++k) {
    double a = score(rng);
    double b = k % 10 == 0 ? a : score(rng);
    // Shift by a power of two so the addition stays exact.
    double c = std::ldexp(std::round(shift(rng)), 0);
    EXPECT_EQ(ZeroShotDecide(q, {a, b}), ZeroShotDecide(q, {a + c, b + c}));
  }
}

TEST(DecideTest, MultipleChoice) {
  WinogradInstance inst;
  EXPECT_EQ(McDecide(inst, {0.9, 0.1}), 0);
  EXPECT_EQ(McDecide(inst, {0.4, 0.6}), 1);
  EXPECT_EQ(McDecide(inst, {0.5, 0.5}), 0);
  EXPECT_THROW(McDecide(inst, {0.5}), ValidationError);
}

// Random paired dataset with opposite golds per pair.
struct Synthetic {
  std::vector<ScoredItem> items;
  Groups groups;
};

Synthetic RandomDataset(std::mt19937_64& rng, bool discard_some, bool uniform_size = false) {
  Synthetic s;
  std::size_t n_groups = 1 + rng() % 40;
  const std::size_t fixed = 2 + rng() % 2;
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::size_t size = uniform_size ? fixed : 2 + (rng() % 5 == 0 ? rng() % 2 : 0);
    std::vector<std::string> ids;
    int first_gold = static_cast<int>(rng() % 2);
    for (std::size_t m = 0; m < size; ++m) {
      std::string id = "g" + std::to_string(g) + "m" + std::to_string(m);
      int gold = m % 2 == 0 ? first_gold : 1 - first_gold;
      std::optional<int> pred = static_cast<int>(rng() % 2);
      if (discard_some && rng() % 10 == 0) pred.reset();
      s.items.push_back({id, gold, pred});
      ids.push_back(id);
    }
    s.groups.emplace_back("g" + std::to_string(g), ids);
  }
  return s;
}

TEST(ReportTest, PerfectAndConstantPredictors) {
  std::mt19937_64 rng(1);
  Synthetic s = RandomDataset(rng, false);
  Synthetic pairs;
  for (int g = 0; g < 50; ++g) {
    std::string a = std::to_string(g) + "a";
    std::string b = std::to_string(g) + "b";
    int gold = g % 2;
    pairs.items.push_back({a, gold, gold});
    pairs.items.push_back({b, 1 - gold, 1 - gold});
    pairs.groups.push_back({std::to_string(g), {a, b}});
  }
  EvaluationReport perfect = BuildReport("d", "original", pairs.items, pairs.groups, Accuracy());
  EXPECT_DOUBLE_EQ(perfect.single_score, 1.0);
  EXPECT_DOUBLE_EQ(perfect.group_score, 1.0);
  for (auto& item : pairs.items) item.prediction = 0;
  EvaluationReport constant = BuildReport("d", "original", pairs.items, pairs.groups, Accuracy());
  EXPECT_DOUBLE_EQ(constant.single_score, 0.5);
  EXPECT_DOUBLE_EQ(constant.group_score, 0.0);
  EXPECT_DOUBLE_EQ(constant.chance_group, 0.25);
}

TEST(ReportTest, GroupNeverExceedsSingleForEqualSizedGroups) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    Synthetic s = RandomDataset(rng, false, true);
    EvaluationReport r = BuildReport("d", "s", s.items, s.groups, Accuracy());
    ASSERT_LE(r.group_score, r.single_score + 1e-12);
  }
}

// Single is a per-item mean, so a large all-wrong group can pull it below
// the group score.
TEST(ReportTest, MixedGroupSizesCanInvertTheOrder) {
  std::vector<ScoredItem> items = {
      {"a", 0, 0}, {"b", 1, 1}, {"c", 0, 1}, {"d", 1, 0}, {"e", 0, 1}};
  std::vector<std::pair<std::string, std::vector<std::string>>> groups = {
      {"pair", {"a", "b"}}, {"triple", {"c", "d", "e"}}};
  EvaluationReport r = BuildReport("d", "s", items, groups, Accuracy());
  EXPECT_DOUBLE_EQ(r.single_score, 0.4);
  EXPECT_DOUBLE_EQ(r.group_score, 0.5);
}

TEST(ReportTest, PermutationInvariant) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 300; ++trial) {
    Synthetic s = RandomDataset(rng, true);
    EvaluationReport r = BuildReport("d", "s", s.items, s.groups, Accuracy());
    Synthetic p = s;
    std::shuffle(p.groups.begin(), p.groups.end(), rng);
    for (auto& g : p.groups) std::shuffle(g.second.begin(), g.second.end(), rng);
    std::shuffle(p.items.begin(), p.items.end(), rng);
    EvaluationReport q = BuildReport("d", "s", p.items, p.groups, Accuracy());
    EXPECT_DOUBLE_EQ(q.group_score, r.group_score);
    EXPECT_DOUBLE_EQ(q.single_score, r.single_score);
    EXPECT_DOUBLE_EQ(q.group_score_skips_wrong, r.group_score_skips_wrong);
  }
}

TEST(ReportTest, TotalsAndDiscards) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 200; ++trial) {
    Synthetic s = RandomDataset(rng, true);
    EvaluationReport r = BuildReport("d", "s", s.items, s.groups, Accuracy());
    EXPECT_EQ(r.n_instances, r.n_scored + r.n_discarded);
    EXPECT_LE(r.single_score_skips_wrong, r.single_score + 1e-12);
    EXPECT_LE(r.group_score_skips_wrong, r.group_score + 1e-12);
    EXPECT_LE(r.n_groups_scored, r.n_groups);
  }
}

TEST(ReportTest, IncompleteGroupExcludedFromScoredOnly) {
  std::vector<ScoredItem> items = {
      {"a", 0, 0}, {"b", 1, 1}, {"c", 0, 0}, {"d", 1, std::nullopt}};
  Groups groups = {{"a~b", {"a", "b"}}, {"c~d", {"c", "d"}}};
  EvaluationReport r = BuildReport("d", "zero-shot", items, groups, Accuracy(),
                                   {{"multi-token candidate", 1}});
  EXPECT_DOUBLE_EQ(r.single_score, 1.0);
  EXPECT_DOUBLE_EQ(r.single_score_skips_wrong, 0.75);
  EXPECT_DOUBLE_EQ(r.group_score, 1.0);
  EXPECT_DOUBLE_EQ(r.group_score_skips_wrong, 0.5);
  EXPECT_EQ(r.n_groups_scored, 1u);
  EXPECT_FALSE(r.groups[1].group_score.has_value());
}

TEST(ReportTest, JsonRoundTripAndFormatting) {
  std::vector<ScoredItem> items = {{"a", 0, 0}, {"b", 1, 0}, {"c", 0, 0}};
  Groups groups = {{"a~b", {"a", "b"}}};
  EvaluationReport r = BuildReport("wsc", "original", items, groups, Accuracy());
  r.model_id = "m";
  std::string j = ReportToJson(r, R"({"seed":1})");
  EXPECT_NE(j.find("\"rounded\""), std::string::npos);
  EXPECT_NE(j.find("\"66.67\""), std::string::npos);
  EvaluationReport back = ReportFromJson(j);
  EXPECT_EQ(ReportToJson(back, R"({"seed":1})"), j);
  EXPECT_EQ(FormatPercent(0.714899), "71.49");
  EXPECT_EQ(FormatPercent(1.0), "100.00");
  std::string table = RenderReportTable({r});
  EXPECT_NE(table.find("Single"), std::string::npos);
  EXPECT_NE(table.find("66.67"), std::string::npos);
}

TEST(ReportTest, RejectsDuplicateOrUnknownIds) {
  EXPECT_THROW(BuildReport("d", "s", {{"a", 0, 0}, {"a", 0, 0}}, {}, Accuracy()),
               ValidationError);
  EXPECT_THROW(BuildReport("d", "s", {{"a", 0, 0}}, {{"g", {"a", "z"}}}, Accuracy()),
               ValidationError);
}

}  // namespace
}  // namespace winocheck
