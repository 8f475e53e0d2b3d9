// Copyright 2026 The cidetect Authors.
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

#include "cidetect/pairgen.h"

#include <map>
#include <set>

#include <gtest/gtest.h>

#include "cidetect/error.h"
#include "cidetect/synth.h"
#include "test_util.h"

namespace cidetect {
namespace {

using testing::ScratchDir;
using testing::ThrownCode;

BridgeIndex SmallWorldIndex() {
  BridgeIndex index;
  index.bridges["cms_smime.c:do_free_upto"] = {
      {{"noinline", "libcrypto", "do_free_upto"}},
      {{{"inline", "libcrypto", "CMS_decrypt"}, Pattern::kLeaf}}};
  return index;
}

TEST(PositivePairsTest, Figure3) {
  std::vector<PairRecord> pairs = GeneratePositivePairs(SmallWorldIndex(), Pattern::kLeaf, 1, 0);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].query.func_name, "do_free_upto");
  EXPECT_EQ(pairs[0].target.func_name, "CMS_decrypt");
  EXPECT_EQ(pairs[0].label, 1);
  EXPECT_EQ(pairs[0].pattern, Pattern::kLeaf);
  EXPECT_EQ(pairs[0].bridge, "cms_smime.c:do_free_upto");
}

TEST(PositivePairsTest, MissingPatternIsExhausted) {
  EXPECT_EQ(ThrownCode([] { GeneratePositivePairs(SmallWorldIndex(), Pattern::kRoot, 5, 0); }),
            ErrorCode::kExhausted);
}

TEST(NegativePairsTest, SingleBridgeIsExhausted) {
  EXPECT_EQ(ThrownCode([] { GenerateNegativePairs(SmallWorldIndex(), Pattern::kLeaf, 5, 0); }),
            ErrorCode::kExhausted);
}

TEST(NegativePairsTest, TwoDisjointBridges) {
  BridgeIndex index;
  index.bridges["s:b1"] = {{{"noinline", "p", "b1"}}, {{{"inline", "p", "t1"}, Pattern::kLeaf}}};
  index.bridges["s:b2"] = {{{"noinline", "p", "b2"}}, {{{"inline", "p", "t2"}, Pattern::kLeaf}}};
  for (const PairRecord& r : GenerateNegativePairs(index, Pattern::kLeaf, 50, 3)) {
    EXPECT_EQ(r.label, -1);
    EXPECT_FALSE(r.bridge.has_value());
    EXPECT_EQ(r.pattern, Pattern::kLeaf);
    if (r.query.func_name == "b1") {
      EXPECT_EQ(r.target.func_name, "t2");
    } else {
      EXPECT_EQ(r.target.func_name, "t1");
    }
  }
}

// Small synthetic corpus plus membership maps for the soundness oracles.
class SyntheticPairsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SynthConfig config;
    config.n_projects = 4;
    config.functions_per_project = 25;
    config.call_density = 0.25;
    config.inline_probability = 0.9;
    config.seed = 3;
    corpus_ = new SynthCorpus(GenerateCorpus(config));
    sets_ = new std::map<BinaryFunctionRef, std::set<std::string>>();
    for (const auto* ds : {&corpus_->no_inline, &corpus_->inlining}) {
      for (const Binary2SourceMapping& m : ds->truth_mappings) {
        (*sets_)[m.function] = m.source_functions;
      }
    }
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete sets_;
  }

  static SynthCorpus* corpus_;
  static std::map<BinaryFunctionRef, std::set<std::string>>* sets_;
};

SynthCorpus* SyntheticPairsTest::corpus_ = nullptr;
std::map<BinaryFunctionRef, std::set<std::string>>* SyntheticPairsTest::sets_ = nullptr;

TEST_F(SyntheticPairsTest, PositiveSoundnessAndPurity) {
  for (Pattern p : kCrossInliningPatterns) {
    std::vector<PairRecord> pairs = GeneratePositivePairs(corpus_->ground_truth, p, 1000, 11);
    ASSERT_EQ(pairs.size(), 1000u);
    for (const PairRecord& r : pairs) {
      ASSERT_TRUE(r.bridge.has_value());
      EXPECT_EQ(r.label, 1);
      EXPECT_EQ(r.pattern, p);
      EXPECT_EQ(r.query.dataset, kNoInliningDataset);
      EXPECT_EQ(r.target.dataset, kInliningDataset);
      EXPECT_EQ(sets_->at(r.query), std::set<std::string>{*r.bridge});
      EXPECT_TRUE(sets_->at(r.target).contains(*r.bridge));
      EXPECT_GT(sets_->at(r.target).size(), 1u);
    }
  }
}

TEST_F(SyntheticPairsTest, NegativeSoundness) {
  for (std::optional<Pattern> p : {std::optional<Pattern>(Pattern::kLeaf),
                                   std::optional<Pattern>(Pattern::kRoot),
                                   std::optional<Pattern>(Pattern::kInternal),
                                   std::optional<Pattern>()}) {
    std::vector<PairRecord> pairs = GenerateNegativePairs(corpus_->ground_truth, p, 1000, 12);
    ASSERT_EQ(pairs.size(), 1000u);
    for (const PairRecord& r : pairs) {
      EXPECT_EQ(r.label, -1);
      const std::set<std::string>& q = sets_->at(r.query);
      ASSERT_EQ(q.size(), 1u);
      EXPECT_FALSE(sets_->at(r.target).contains(*q.begin()));
      EXPECT_NE(r.pattern, Pattern::kEqual);
      if (p) EXPECT_EQ(r.pattern, *p);
    }
  }
}

TEST_F(SyntheticPairsTest, Deterministic) {
  const BridgeIndex& index = corpus_->ground_truth;
  EXPECT_EQ(GeneratePositivePairs(index, std::nullopt, 200, 5),
            GeneratePositivePairs(index, std::nullopt, 200, 5));
  EXPECT_EQ(GenerateNegativePairs(index, Pattern::kRoot, 200, 5),
            GenerateNegativePairs(index, Pattern::kRoot, 200, 5));
  EXPECT_NE(GeneratePositivePairs(index, std::nullopt, 200, 5),
            GeneratePositivePairs(index, std::nullopt, 200, 6));
}

TEST_F(SyntheticPairsTest, PairsFileRoundTrip) {
  ScratchDir dir("pairs");
  std::vector<PairRecord> pairs = GeneratePositivePairs(corpus_->ground_truth, Pattern::kLeaf, 20, 1);
  std::vector<PairRecord> neg = GenerateNegativePairs(corpus_->ground_truth, Pattern::kLeaf, 20, 1);
  pairs.insert(pairs.end(), neg.begin(), neg.end());
  WritePairsFile(dir.path() / "pairs.jsonl", pairs);
  EXPECT_EQ(ReadPairsFile(dir.path() / "pairs.jsonl"), pairs);
}

TEST(PairJsonTest, RejectsBadRecords) {
  EXPECT_EQ(ThrownCode([] {
              PairFromJsonLine(R"({"query_ref":["a","b","c"],"target_ref":["a","b","d"],"label":0,"pattern":"leaf"})");
            }),
            ErrorCode::kInvalidLabel);
  EXPECT_EQ(ThrownCode([] {
              PairFromJsonLine(R"({"query_ref":["a","b"],"target_ref":["a","b","d"],"label":1,"pattern":"leaf"})");
            }),
            ErrorCode::kParse);
  EXPECT_EQ(ThrownCode([] {
              PairFromJsonLine(R"({"query_ref":["a","b","c"],"target_ref":["a","b","d"],"label":1,"pattern":"zig"})");
            }),
            ErrorCode::kParse);
}

std::vector<std::string> Projects(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
  return ids;
}

TEST(SplitProjectsTest, Sizes) {
  struct Case {
    int n;
    std::size_t train, val, test;
  };
  for (Case c : {Case{10, 8, 1, 1}, Case{3, 1, 1, 1}, Case{51, 41, 5, 5}, Case{20, 16, 2, 2}}) {
    std::vector<std::string> ids = Projects(c.n);
    SplitSpec s = SplitProjects(ids, kDefaultSplitFractions, 7);
    EXPECT_EQ(s.train.size(), c.train) << c.n;
    EXPECT_EQ(s.validation.size(), c.val) << c.n;
    EXPECT_EQ(s.test.size(), c.test) << c.n;
  }
}

TEST(SplitProjectsTest, DisjointCoveringAndDeterministic) {
  std::vector<std::string> ids = Projects(37);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitSpec s = SplitProjects(ids, kDefaultSplitFractions, seed);
    std::set<std::string> all;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
      for (const std::string& p : *part) EXPECT_TRUE(all.insert(p).second);
    }
    EXPECT_EQ(all.size(), ids.size());
    SplitSpec again = SplitProjects(ids, kDefaultSplitFractions, seed);
    EXPECT_EQ(again.train, s.train);
    EXPECT_EQ(again.test, s.test);
    EXPECT_EQ(SplitFromJson(SplitToJson(s)).validation, s.validation);
  }
}

TEST(SplitProjectsTest, Errors) {
  std::vector<std::string> two = Projects(2);
  EXPECT_EQ(ThrownCode([&] { SplitProjects(two, kDefaultSplitFractions, 0); }),
            ErrorCode::kTooFewProjects);
  std::vector<std::string> ten = Projects(10);
  EXPECT_EQ(ThrownCode([&] { SplitProjects(ten, {0.5, 0.1, 0.1}, 0); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace cidetect
