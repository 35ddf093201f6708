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

#include "winocheck/corpus.h"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "winocheck/errors.h"
#include "winocheck/parallel.h"

namespace winocheck {
namespace {

const std::string kFixtures = WINOCHECK_FIXTURES;

WinogradInstance Make(std::string id, std::string sentence, std::string target,
                      std::array<std::string, 2> candidates, int label, std::size_t ordinal) {
  WinogradInstance inst;
  inst.id = std::move(id);
  inst.sentence = std::move(sentence);
  inst.target = {inst.sentence.find(target), target.size()};
  inst.candidates = std::move(candidates);
  inst.label = label;
  inst.ordinal = ordinal;
  return inst;
}

std::set<std::set<std::string>> PairSets(const Dataset& d) {
  std::set<std::set<std::string>> out;
  for (const auto& g : d.groups) {
    std::set<std::string> ids;
    for (const auto& m : g.members) ids.insert(m.id);
    out.insert(ids);
  }
  return out;
}

// ---- Parsing ---------------------------------------------------------------

TEST(ParseWscTest, FixtureRecords) {
  Dataset d = ParseWscFile(kFixtures + "/mini_wsc.xml");
  ASSERT_EQ(d.instances.size(), 10u);
  const auto& first = d.instances[0];
  EXPECT_EQ(first.id, "0");
  EXPECT_EQ(first.sentence,
            "The trophy doesn't fit into the brown suitcase because it is too large.");
  EXPECT_EQ(first.TargetText(), "it");
  EXPECT_EQ(first.label, 0);
  EXPECT_EQ(first.Gold(), "The trophy");
  EXPECT_EQ(first.target_kind, TargetKind::kPronoun);
  EXPECT_EQ(d.instances[1].label, 1);
  for (std::size_t k = 0; k < d.instances.size(); ++k) {
    EXPECT_EQ(d.instances[k].ordinal, k);
    EXPECT_EQ(d.instances[k].id, std::to_string(k));
  }
}

TEST(ParseWscTest, StripsCandidateWhitespaceAndGluesPunctuation) {
  const std::string xml = R"(<collection><schema>
    <text><txt1> The trophy doesn't fit into the brown suitcase because </txt1>
    <pron> it </pron><txt2>'s too large.</txt2></text>
    <answers><answer>  the trophy </answer><answer>the suitcase</answer></answers>
    <correctAnswer> A. </correctAnswer></schema></collection>)";
  Dataset d = ParseWsc(xml);
  ASSERT_EQ(d.instances.size(), 1u);
  EXPECT_EQ(d.instances[0].candidates[0], "the trophy");
  EXPECT_EQ(d.instances[0].TargetText(), "it");
  EXPECT_EQ(d.instances[0].sentence,
            "The trophy doesn't fit into the brown suitcase because it's too large.");
}

TEST(ParseWscTest, Errors) {
  EXPECT_THROW(ParseWsc(""), ParseError);
  try {
    ParseWsc("<collection></collection>");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("no records"), std::string::npos);
  }
  const std::string bad = R"(<collection>
    <schema><text><txt1>A</txt1><pron>it</pron><txt2>b.</txt2></text>
      <answers><answer>A</answer><answer>C</answer></answers><correctAnswer>A</correctAnswer></schema>
    <schema><text><txt1>A</txt1><pron>it</pron><txt2>b.</txt2></text>
      <answers><answer>x</answer></answers><correctAnswer>A</correctAnswer></schema>
  </collection>)";
  try {
    ParseWsc(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos) << e.what();
  }
}

TEST(ParseWinograndeTest, SpecExampleRecord) {
  Dataset d = ParseWinogrande(
      R"({"sentence":"I bought a steel property at the same time as my wooden property. The _ property was harder.","option1":"steel","option2":"wooden","answer":"1"})");
  ASSERT_EQ(d.instances.size(), 1u);
  const auto& inst = d.instances[0];
  EXPECT_EQ(inst.label, 0);
  EXPECT_EQ(inst.TargetText(), "_");
  EXPECT_EQ(inst.target_kind, TargetKind::kPlaceholder);
  EXPECT_EQ(inst.source, Source::kWinogrande);
  EXPECT_EQ(inst.id, "line-1");
}

TEST(ParseWinograndeTest, FixtureUsesQid) {
  Dataset d = ParseWinograndeFile(kFixtures + "/mini_winogrande.jsonl");
  ASSERT_EQ(d.instances.size(), 5u);
  EXPECT_EQ(d.instances[1].id, "wg-2");
  EXPECT_EQ(d.instances[1].label, 1);
}

TEST(ParseWinograndeTest, RecordErrorsNameLine) {
  auto expect_line_error = [](const std::string& text, const std::string& needle) {
    try {
      ParseWinogrande(text);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  const std::string ok = R"({"sentence":"A _ b.","option1":"x","option2":"y","answer":"1"})";
  expect_line_error(ok + "\n" + R"({"sentence":"A _ b _.","option1":"x","option2":"y","answer":"1"})",
                    "line 2");
  expect_line_error(R"({"sentence":"A b.","option1":"x","option2":"y","answer":"1"})", "line 1");
  expect_line_error(R"({"sentence":"A _ b.","option2":"y","answer":"1"})", "option1");
  expect_line_error(R"({"sentence":"A _ b.","option1":"x","option2":"y","answer":"3"})", "line 1");
  expect_line_error("{oops", "line 1");
}

// ---- Normalized format -----------------------------------------------------

TEST(NormalizedTest, RoundTripIsFixedPoint) {
  Dataset wsc = ParseWscFile(kFixtures + "/mini_wsc.xml");
  Dataset wg = ParseWinograndeFile(kFixtures + "/mini_winogrande.jsonl");
  for (const Dataset* d : {&wsc, &wg}) {
    std::ostringstream first;
    WriteNormalized(*d, first);
    std::istringstream in(first.str());
    Dataset back = ReadNormalized(in, d->name);
    ASSERT_EQ(back.instances.size(), d->instances.size());
    for (std::size_t k = 0; k < back.instances.size(); ++k) {
      const auto& a = d->instances[k];
      const auto& b = back.instances[k];
      EXPECT_EQ(a.id, b.id);
      EXPECT_EQ(a.sentence, b.sentence);
      EXPECT_EQ(a.candidates, b.candidates);
      EXPECT_EQ(a.target, b.target);
      EXPECT_EQ(a.target_kind, b.target_kind);
      EXPECT_EQ(a.label, b.label);
      EXPECT_EQ(a.source, b.source);
    }
    std::ostringstream second;
    WriteNormalized(back, second);
    EXPECT_EQ(first.str(), second.str());
  }
}

TEST(NormalizedTest, SkipsMetaLineAndRejectsBadSpan) {
  std::istringstream in(
      "{\"_meta\":{\"seed\":1}}\n"
      R"({"id":"a","sentence":"x it y.","option1":"p","option2":"q","target_span_start":2,"target_span_len":2,"target_kind":"pronoun","label":0,"source":"wsc"})"
      "\n");
  Dataset d = ReadNormalized(in, "n");
  ASSERT_EQ(d.instances.size(), 1u);
  EXPECT_EQ(d.instances[0].TargetText(), "it");
  EXPECT_THROW(FromNormalizedRecord(
                   R"({"id":"a","sentence":"x","option1":"p","option2":"q","target_span_start":5,"target_span_len":2,"target_kind":"pronoun","label":0,"source":"wsc"})",
                   0),
               std::runtime_error);
}

// ---- Special spans ---------------------------------------------------------

TEST(DetectSpecialSpansTest, LargeSmall) {
  const std::string a = "The trophy doesn't fit into the brown suitcase because it is too large.";
  const std::string b = "The trophy doesn't fit into the brown suitcase because it is too small.";
  auto s = DetectSpecialSpans(a, b);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->a.In(a), "large");
  EXPECT_EQ(s->b.In(b), "small");
  EXPECT_EQ(s->a_tokens, 1u);
}

TEST(DetectSpecialSpansTest, IdenticalIsAbsent) {
  EXPECT_FALSE(DetectSpecialSpans("a b c.", "a b c.").has_value());
}

TEST(DetectSpecialSpansTest, MultiWordRegion) {
  const std::string a = "He was very large.";
  const std::string b = "He was small.";
  auto s = DetectSpecialSpans(a, b);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->a.In(a), "very large");
  EXPECT_EQ(s->a_tokens, 2u);
  EXPECT_EQ(s->b_tokens, 1u);
}

// Exhaustive oracle: enumerate every split a = P X S, b = P Y S with a shared
// prefix P and suffix S, keep the one that matches the most tokens (prefix
// first), and call the pair single-region twins iff X and Y are both
// non-empty and share no token.
struct OracleDiff {
  bool twins = false;
  std::size_t a_tokens = 0;
  std::size_t b_tokens = 0;
};

OracleDiff BruteForceDiff(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best_p = 0;
  std::size_t best_s = 0;
  bool found = false;
  for (std::size_t p = 0; p <= std::min(a.size(), b.size()); ++p) {
    for (std::size_t s = 0; p + s <= std::min(a.size(), b.size()); ++s) {
      bool ok = true;
      for (std::size_t k = 0; k < p && ok; ++k) ok = a[k] == b[k];
      for (std::size_t k = 0; k < s && ok; ++k) ok = a[a.size() - 1 - k] == b[b.size() - 1 - k];
      if (!ok) continue;
      if (!found || p + s > best_p + best_s || (p + s == best_p + best_s && p > best_p)) {
        best_p = p;
        best_s = s;
        found = true;
      }
    }
  }
  OracleDiff d;
  std::vector<std::string> x(a.begin() + best_p, a.end() - best_s);
  std::vector<std::string> y(b.begin() + best_p, b.end() - best_s);
  d.a_tokens = x.size();
  d.b_tokens = y.size();
  if (x.empty() || y.empty()) return d;
  for (const auto& t : x) {
    if (std::find(y.begin(), y.end(), t) != y.end()) return d;
  }
  d.twins = true;
  return d;
}

TEST(DetectSpecialSpansTest, RedCatSatBlueCatRanMatchesOracle) {
  OracleDiff oracle = BruteForceDiff({"red", "cat", "sat"}, {"blue", "cat", "ran"});
  EXPECT_FALSE(oracle.twins);
  EXPECT_EQ(DetectSpecialSpans("red cat sat", "blue cat ran").has_value(), oracle.twins);
}

std::string Join(const std::vector<std::string>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (t == ".") {
      s += t;
      continue;
    }
    if (!s.empty()) s.push_back(' ');
    s += t;
  }
  return s;
}

TEST(DetectSpecialSpansTest, AgreesWithBruteForceOracle) {
  std::mt19937 rng(2024);
  const std::vector<std::string> vocab = {"the", "cat", "dog", "sat", "ran", "big", "it"};
  int twins = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    auto sentence = [&](std::size_t n) {
      std::vector<std::string> t;
      for (std::size_t k = 0; k < n; ++k) t.push_back(vocab[rng() % vocab.size()]);
      t.push_back(".");
      return t;
    };
    std::vector<std::string> a = sentence(1 + rng() % 5);
    std::vector<std::string> b = a;
    // Mutate b: replace, insert, or delete a few tokens.
    int edits = 1 + static_cast<int>(rng() % 2);
    for (int e = 0; e < edits; ++e) {
      std::size_t pos = rng() % (b.size() - 1);
      switch (rng() % 3) {
        case 0: b[pos] = vocab[rng() % vocab.size()]; break;
        case 1: b.insert(b.begin() + static_cast<long>(pos), vocab[rng() % vocab.size()]); break;
        default: if (b.size() > 2) b.erase(b.begin() + static_cast<long>(pos));
      }
    }
    const std::string sa = Join(a);
    const std::string sb = Join(b);
    OracleDiff oracle = BruteForceDiff(a, b);
    auto got = DetectSpecialSpans(sa, sb);
    ASSERT_EQ(got.has_value(), oracle.twins) << sa << " | " << sb;
    if (!got) continue;
    ++twins;
    EXPECT_EQ(got->a_tokens, oracle.a_tokens);
    EXPECT_EQ(got->b_tokens, oracle.b_tokens);
    // Splicing b's region into a reproduces b.
    std::string spliced = sa.substr(0, got->a.begin) + std::string(got->b.In(sb)) +
                          sa.substr(got->a.end());
    EXPECT_EQ(spliced, sb);
    // Swapped arguments give swapped spans.
    auto rev = DetectSpecialSpans(sb, sa);
    ASSERT_TRUE(rev.has_value());
    EXPECT_EQ(rev->a, got->b);
    EXPECT_EQ(rev->b, got->a);
  }
  EXPECT_GT(twins, 300);
}

// ---- Pairing ---------------------------------------------------------------

TEST(PairTwinsTest, FixtureGroupsAndTripletReduction) {
  Dataset d = PairTwins(ParseWscFile(kFixtures + "/mini_wsc.xml"));
  ASSERT_EQ(d.groups.size(), 4u);
  EXPECT_EQ(d.PairedInstanceCount(), 8u);
  EXPECT_EQ(d.groups[0].group_id, "0~1");
  EXPECT_EQ(d.groups[0].SpecialText(0), "large");
  EXPECT_EQ(d.groups[0].SpecialText(1), "small");
  // Triplet 6/7/8: the adjacent pair wins the tie, 8 is orphaned.
  EXPECT_EQ(d.groups[3].group_id, "6~7");
  EXPECT_EQ(d.orphans, (std::vector<std::string>{"8", "9"}));
  for (const auto& g : d.groups) EXPECT_EQ(g.members.size(), 2u);
}

TEST(PairTwinsTest, EveryInstanceInExactlyOnePlace) {
  Dataset d = PairTwins(ParseWscFile(kFixtures + "/mini_wsc.xml"));
  std::multiset<std::string> seen(d.orphans.begin(), d.orphans.end());
  for (const auto& g : d.groups) {
    for (const auto& m : g.members) seen.insert(m.id);
  }
  ASSERT_EQ(seen.size(), d.instances.size());
  for (const auto& inst : d.instances) EXPECT_EQ(seen.count(inst.id), 1u);
}

TEST(PairTwinsTest, IdenticalSentencesAreOrphans) {
  Dataset d;
  d.instances = {Make("a", "It was red.", "It", {"x", "y"}, 0, 0),
                 Make("b", "It was red.", "It", {"x", "y"}, 1, 1)};
  d = PairTwins(d);
  EXPECT_TRUE(d.groups.empty());
  EXPECT_EQ(d.orphans.size(), 2u);
}

TEST(PairTwinsTest, CandidateOrderAndCaseIgnored) {
  Dataset d;
  d.instances = {Make("a", "Tom beat Bob because he was strong.", "he", {"Tom", "Bob"}, 0, 0),
                 Make("b", "Tom beat Bob because he was weak.", "he", {"bob", "TOM"}, 0, 1)};
  d = PairTwins(d);
  ASSERT_EQ(d.groups.size(), 1u);
  EXPECT_EQ(d.groups[0].group_id, "a~b");
}

TEST(PairTwinsTest, TripletKeepsShortestDiff) {
  Dataset d;
  d.instances = {Make("a", "The man lifted it because he was strong.", "he", {"x", "y"}, 0, 0),
                 Make("b", "The man lifted it because he was very weak.", "he", {"x", "y"}, 1, 1),
                 Make("c", "The man lifted it because he was tired.", "he", {"x", "y"}, 0, 2)};
  d = PairTwins(d);
  ASSERT_EQ(d.groups.size(), 1u);
  EXPECT_EQ(d.groups[0].group_id, "a~c");
  EXPECT_EQ(d.orphans, std::vector<std::string>{"b"});
}

TEST(PairTwinsTest, PermutationInvariant) {
  Dataset base = ParseWscFile(kFixtures + "/mini_wsc.xml");
  Dataset wg = ParseWinograndeFile(kFixtures + "/mini_winogrande.jsonl");
  for (auto inst : wg.instances) {
    inst.ordinal += base.instances.size();
    base.instances.push_back(inst);
  }
  const auto expected = PairSets(PairTwins(base));
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Dataset shuffled = base;
    std::shuffle(shuffled.instances.begin(), shuffled.instances.end(), rng);
    Dataset paired = PairTwins(shuffled);
    EXPECT_EQ(PairSets(paired), expected);
    std::vector<std::string> ids;
    for (const auto& g : paired.groups) ids.push_back(g.group_id);
    std::vector<std::string> ref;
    for (const auto& g : PairTwins(base).groups) ref.push_back(g.group_id);
    EXPECT_EQ(ids, ref);
  }
}

TEST(PairTwinsTest, ParallelEdgesMatchSerial) {
  Dataset d = ParseWscFile(kFixtures + "/mini_wsc.xml");
  auto p = parallel::FindTwinEdges(d.instances);
  auto s = serial::FindTwinEdges(d.instances);
  ASSERT_EQ(p.size(), s.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_EQ(p[k].i, s[k].i);
    EXPECT_EQ(p[k].j, s[k].j);
    EXPECT_EQ(p[k].spans.a, s[k].spans.a);
  }
}

// ---- Filtering and manifests -----------------------------------------------

TEST(FilterAssociativeTest, EmptyListIsIdentity) {
  Dataset d = PairTwins(ParseWscFile(kFixtures + "/mini_wsc.xml"));
  FilterResult r = FilterAssociative(d, {});
  EXPECT_EQ(r.removed, 0u);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(PairSets(r.dataset), PairSets(d));
  EXPECT_EQ(r.dataset.instances.size(), d.instances.size());
}

TEST(FilterAssociativeTest, RemovesAndOrphansTwin) {
  Dataset d = PairTwins(ParseWscFile(kFixtures + "/mini_wsc.xml"));
  FilterResult r = FilterAssociative(d, {"4"});
  EXPECT_EQ(r.removed, 1u);
  EXPECT_EQ(r.dataset.instances.size(), 9u);
  EXPECT_EQ(r.dataset.groups.size(), 3u);
  EXPECT_NE(std::find(r.dataset.orphans.begin(), r.dataset.orphans.end(), "5"),
            r.dataset.orphans.end());
}

TEST(FilterAssociativeTest, UnknownIdWarnsOnly) {
  Dataset d = PairTwins(ParseWscFile(kFixtures + "/mini_wsc.xml"));
  FilterResult with = FilterAssociative(d, {"4", "no-such-id"});
  FilterResult without = FilterAssociative(d, {"4"});
  EXPECT_EQ(with.warnings.size(), 1u);
  EXPECT_EQ(PairSets(with.dataset), PairSets(without.dataset));
  EXPECT_EQ(with.dataset.orphans, without.dataset.orphans);
}

TEST(IdListTest, StripsComments) {
  std::istringstream in("# header\n 4 \n5  # trailing\n\n");
  EXPECT_EQ(ReadIdList(in), (std::vector<std::string>{"4", "5"}));
  EXPECT_THROW(ReadIdListFile(kFixtures + "/absent.txt"), std::runtime_error);
}

TEST(ManifestTest, ApplyRestoresGroups) {
  Dataset paired = PairTwins(ParseWscFile(kFixtures + "/mini_wsc.xml"));
  std::string manifest = PairingManifestJson(paired, R"({"seed":3})");
  EXPECT_NE(manifest.find("\"orphans\""), std::string::npos);
  Dataset restored = ApplyPairingManifest(ParseWscFile(kFixtures + "/mini_wsc.xml"), manifest);
  EXPECT_EQ(PairSets(restored), PairSets(paired));
  EXPECT_EQ(restored.orphans, paired.orphans);
  for (std::size_t g = 0; g < paired.groups.size(); ++g) {
    EXPECT_EQ(restored.groups[g].special_spans, paired.groups[g].special_spans);
  }
  EXPECT_EQ(PairingManifestJson(restored, R"({"seed":3})"), manifest);
}

TEST(ManifestTest, UnknownMemberIsAnError) {
  Dataset paired = PairTwins(ParseWscFile(kFixtures + "/mini_wsc.xml"));
  std::string manifest = PairingManifestJson(paired);
  Dataset fewer = ParseWscFile(kFixtures + "/mini_wsc.xml");
  fewer.instances.erase(fewer.instances.begin());
  EXPECT_THROW(ApplyPairingManifest(fewer, manifest), std::runtime_error);
}

}  // namespace
}  // namespace winocheck
