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

#include "cidetect/detector.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cidetect/error.h"
#include "cidetect/eval.h"
#include "oracles.h"
#include "test_util.h"

namespace cidetect {
namespace {

using testing::OracleSelectThreshold;
using testing::RandomCfg;
using testing::RandomScores;
using testing::ScratchDir;
using testing::ThrownCode;
using testing::TinyConfig;

OpcodeVocabulary TestVocab() {
  std::mt19937_64 rng(5);
  std::vector<AttributedCfg> graphs;
  for (int i = 0; i < 20; ++i) graphs.push_back(RandomCfg(rng, 4));
  return BuildVocabulary(graphs, 8);
}

EnsembleDetector MakeDetector(std::uint64_t seed, double threshold = 0.55) {
  OpcodeVocabulary vocab = TestVocab();
  ModelConfig config = TinyConfig(vocab.feature_dim(), seed);
  std::map<ModelSlot, ModelParams> models;
  for (ModelSlot s : {ModelSlot::kLeaf, ModelSlot::kRoot, ModelSlot::kInternal}) {
    config.seed = seed * 10 + static_cast<std::uint64_t>(s);
    models.emplace(s, InitParams(config));
  }
  return EnsembleDetector(vocab, config, std::move(models), threshold);
}

TEST(SimilarityTest, SubstitutionTable) {
  EXPECT_EQ(Similarity(0.0), 1.0);
  EXPECT_EQ(Similarity(1.0), 0.5);
  EXPECT_EQ(Similarity(3.0), 0.25);
}

TEST(SimilarityTest, NegativeOrNanDistance) {
  EXPECT_EQ(ThrownCode([] { Similarity(-1e-12); }), ErrorCode::kNegativeDistance);
  EXPECT_EQ(ThrownCode([] { Similarity(std::nan("")); }), ErrorCode::kNegativeDistance);
}

TEST(SimilarityTest, StrictlyDecreasingIntoUnitInterval) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> dist(0.3);
  for (int i = 0; i < 1000; ++i) {
    const double a = dist(rng);
    const double b = a + 1e-6 + dist(rng);
    EXPECT_GT(Similarity(a), Similarity(b));
    EXPECT_GT(Similarity(b), 0.0);
    EXPECT_LE(Similarity(a), 1.0);
    // Inverse d = 1/s - 1 recovers the distance.
    EXPECT_NEAR(1.0 / Similarity(a) - 1.0, a, 1e-9 * (1.0 + a));
  }
  EXPECT_GT(Similarity(1e300), 0.0);
}

TEST(CombineTest, Examples) {
  using S = ModelSlot;
  Verdict v = CombineSimilarities({{S::kLeaf, 0.2}, {S::kRoot, 0.9}, {S::kInternal, 0.3}}, 0.55);
  EXPECT_EQ(v.final_similarity, 0.9);
  EXPECT_TRUE(v.positive);
  v = CombineSimilarities({{S::kLeaf, 0.2}, {S::kRoot, 0.3}, {S::kInternal, 0.3}}, 0.55);
  EXPECT_EQ(v.final_similarity, 0.3);
  EXPECT_FALSE(v.positive);
  // Equality with the threshold counts as positive.
  v = CombineSimilarities({{S::kLeaf, 0.55}}, 0.55);
  EXPECT_TRUE(v.positive);
}

TEST(CombineTest, DominanceAndMonotoneVerdict) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-9, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::map<ModelSlot, double> s = {
        {ModelSlot::kLeaf, u(rng)}, {ModelSlot::kRoot, u(rng)}, {ModelSlot::kInternal, u(rng)}};
    const double t1 = u(rng);
    const double t2 = t1 + (1.0 - t1) * u(rng);
    Verdict v = CombineSimilarities(s, t1);
    bool equal_to_one = false;
    for (const auto& [slot, x] : s) {
      EXPECT_GE(v.final_similarity, x);
      equal_to_one = equal_to_one || v.final_similarity == x;
    }
    EXPECT_TRUE(equal_to_one);
    Verdict w = CombineSimilarities(s, t2);
    EXPECT_FALSE(!v.positive && w.positive);
  }
}

TEST(EnsembleDetectorTest, SelfSimilarityIsOne) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EnsembleDetector det = MakeDetector(seed, 1.0);
    AttributedCfg g = RandomCfg(rng, 1 + seed % 6);
    Verdict v = det.Detect(g, g);
    EXPECT_EQ(v.final_similarity, 1.0);
    EXPECT_TRUE(v.positive);
    ASSERT_EQ(v.similarities.size(), 3u);
    for (const auto& [slot, s] : v.similarities) EXPECT_EQ(s, 1.0);
  }
}

TEST(EnsembleDetectorTest, MatchesPerModelEmbeddings) {
  EnsembleDetector det = MakeDetector(4);
  std::mt19937_64 rng(9);
  AttributedCfg a = RandomCfg(rng, 5);
  AttributedCfg b = RandomCfg(rng, 3);
  Verdict v = det.Detect(a, b);
  double best = 0.0;
  for (const auto& [slot, params] : det.models()) {
    const double d = EuclideanDistance(Embed(det.Prepare(a), params), Embed(det.Prepare(b), params));
    const double s = 1.0 / (1.0 + d);
    EXPECT_DOUBLE_EQ(v.similarities.at(slot), s);
    best = std::max(best, s);
  }
  EXPECT_DOUBLE_EQ(v.final_similarity, best);
  EXPECT_EQ(v.positive, best >= det.threshold());
}

TEST(EnsembleDetectorTest, ConstructorErrors) {
  OpcodeVocabulary vocab = TestVocab();
  ModelConfig config = TinyConfig(vocab.feature_dim());
  EXPECT_EQ(ThrownCode([&] { EnsembleDetector(vocab, config, {}); }),
            ErrorCode::kInvalidArgument);
  ModelConfig wrong = TinyConfig(vocab.feature_dim() + 1);
  EXPECT_EQ(ThrownCode([&] {
              EnsembleDetector(vocab, wrong, {{ModelSlot::kLeaf, InitParams(wrong)}});
            }),
            ErrorCode::kInvalidArgument);
  for (double bad : {0.0, -0.1, 1.01, std::nan("")}) {
    EXPECT_EQ(ThrownCode([&] {
                EnsembleDetector(vocab, config, {{ModelSlot::kLeaf, InitParams(config)}}, bad);
              }),
              ErrorCode::kInvalidArgument)
        << bad;
  }
  EXPECT_FALSE(ThrownCode([&] {
                 EnsembleDetector(vocab, config, {{ModelSlot::kMixed, InitParams(config)}}, 1.0);
               }).has_value());
}

TEST(SlotTest, NamesRoundTrip) {
  for (ModelSlot s : {ModelSlot::kLeaf, ModelSlot::kRoot, ModelSlot::kInternal, ModelSlot::kMixed}) {
    EXPECT_EQ(ParseSlot(SlotName(s)), s);
  }
  EXPECT_FALSE(ParseSlot("equal").has_value());
  EXPECT_EQ(SlotPattern(ModelSlot::kRoot), Pattern::kRoot);
  EXPECT_FALSE(SlotPattern(ModelSlot::kMixed).has_value());
}

TEST(SelectThresholdTest, SeparableTiesGoToSmallest) {
  std::vector<ScoredPair> s = {{1.0, 1}, {1.0, 1}, {0.0, -1}, {0.0, -1}};
  EXPECT_EQ(SelectThreshold(s, NarrowGrid()), 0.5);
  std::vector<double> reversed = NarrowGrid();
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(SelectThreshold(s, reversed), 0.5);
}

TEST(SelectThresholdTest, UniqueMaximumAtPointFiveFive) {
  // A negative at 0.52 and a positive at 0.57: only 0.55 separates them.
  std::vector<ScoredPair> s = {{0.52, -1}, {0.57, 1}, {0.9, 1}, {0.1, -1}};
  EXPECT_EQ(SelectThreshold(s, NarrowGrid()), 0.55);
  EXPECT_EQ(OracleSelectThreshold(s, NarrowGrid()), 0.55);
}

TEST(SelectThresholdTest, DegenerateLabels) {
  std::vector<ScoredPair> pos = {{0.7, 1}, {0.2, 1}};
  std::vector<ScoredPair> neg = {{0.7, -1}};
  EXPECT_EQ(ThrownCode([&] { SelectThreshold(pos, NarrowGrid()); }),
            ErrorCode::kDegenerateLabels);
  EXPECT_EQ(ThrownCode([&] { SelectThreshold(neg, NarrowGrid()); }),
            ErrorCode::kDegenerateLabels);
  EXPECT_EQ(ThrownCode([&] { SelectThreshold({}, NarrowGrid()); }),
            ErrorCode::kDegenerateLabels);
  std::vector<ScoredPair> both = {{0.7, 1}, {0.2, -1}};
  EXPECT_EQ(ThrownCode([&] { SelectThreshold(both, {}); }), ErrorCode::kInvalidArgument);
}

TEST(SelectThresholdTest, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int levels = trial % 3 == 0 ? 20 : 100;
    auto s = RandomScores(rng, 1 + trial % 60 + 2, levels, 0.4);
    for (const auto& grid : {NarrowGrid(), ExtendedGrid()}) {
      EXPECT_EQ(SelectThreshold(s, grid), OracleSelectThreshold(s, grid)) << trial;
    }
  }
}

TEST(SelectThresholdTest, SelectedValueMaximizesF1) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = RandomScores(rng, 200, 1000, 0.5);
    const double theta = SelectThreshold(s, ExtendedGrid());
    const double f1 = ComputeMetrics(ComputeConfusion(s, theta)).f1;
    for (double g : ExtendedGrid()) {
      const double other = ComputeMetrics(ComputeConfusion(s, g)).f1;
      EXPECT_LE(other, f1 + 1e-12);
    }
  }
}

TEST(BundleTest, SaveLoadRoundTrip) {
  ScratchDir dir("bundle");
  EnsembleDetector det = MakeDetector(6, 0.65);
  SaveBundle(dir.path(), det, {{"seed", "6"}});
  for (const char* f : {"manifest.json", "vocab.txt", "leaf.ckpt", "root.ckpt", "internal.ckpt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / f)) << f;
  }
  EnsembleDetector back = LoadBundle(dir.path());
  EXPECT_EQ(back.threshold(), 0.65);
  EXPECT_EQ(back.vocab(), det.vocab());
  EXPECT_EQ(back.models(), det.models());
  std::mt19937_64 rng(2);
  AttributedCfg a = RandomCfg(rng, 4);
  AttributedCfg b = RandomCfg(rng, 6);
  EXPECT_EQ(back.Detect(a, b).final_similarity, det.Detect(a, b).final_similarity);
}

TEST(BundleTest, MissingOrCorrupt) {
  ScratchDir dir("bundle_bad");
  EXPECT_EQ(ThrownCode([&] { LoadBundle(dir.path() / "absent"); }), ErrorCode::kIo);
  SaveBundle(dir.path(), MakeDetector(7), {});
  {
    std::ofstream out(dir.path() / "manifest.json", std::ios::trunc);
    out << "{not json";
  }
  EXPECT_EQ(ThrownCode([&] { LoadBundle(dir.path()); }), ErrorCode::kParse);
}

TEST(BundleTest, ConfigHashMismatchIsRejected) {
  ScratchDir a("bundle_a");
  ScratchDir b("bundle_b");
  SaveBundle(a.path(), MakeDetector(1), {});
  OpcodeVocabulary vocab = TestVocab();
  ModelConfig other = TinyConfig(vocab.feature_dim());
  other.node_state_dim = 2;
  SaveBundle(b.path(), EnsembleDetector(vocab, other, {{ModelSlot::kLeaf, InitParams(other)}}),
             {});
  std::filesystem::copy_file(b.path() / "leaf.ckpt", a.path() / "leaf.ckpt",
                             std::filesystem::copy_options::overwrite_existing);
  EXPECT_EQ(ThrownCode([&] { LoadBundle(a.path()); }), ErrorCode::kParse);
}

}  // namespace
}  // namespace cidetect
