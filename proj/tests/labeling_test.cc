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

#include "cidetect/labeling.h"

#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "cidetect/error.h"
#include "oracles.h"
#include "test_util.h"

namespace cidetect {
namespace {

using testing::OracleBridgeIndex;
using testing::OracleClassify;
using testing::OracleMappings;
using testing::ThrownCode;

const std::filesystem::path kSmallWorld = std::filesystem::path(CIDETECT_FIXTURE_DIR) / "small_world";
const std::string kCmsFile = "crypto/cms/cms_smime.c";

std::string Cms(const std::string& name) { return SourceFunctionId(kCmsFile, name); }

TEST(ConstructMappingTest, SingleSourceFunction) {
  std::vector<SrcFuncRow> src = {{"a.c", "A", 1, 10}, {"a.c", "B", 11, 20}};
  std::vector<BinFuncRow> bin = {{"bin", "fa", 0x100, 0x110}};
  std::vector<Addr2LineRow> a2l = {{"bin", 0x100, "a.c", 2}, {"bin", 0x108, "a.c", 10}};
  MappingResult r = ConstructMapping("noinline", a2l, bin, src);
  ASSERT_EQ(r.mappings.size(), 1u);
  EXPECT_EQ(r.mappings[0].source_functions, (std::set<std::string>{"a.c:A"}));
  EXPECT_FALSE(HasInlining(r.mappings[0]));
  EXPECT_TRUE(r.issues.empty());
}

TEST(ConstructMappingTest, SplitAcrossTwoFunctions) {
  std::vector<SrcFuncRow> src = {{"a.c", "A", 1, 10}, {"a.c", "B", 11, 20}};
  std::vector<BinFuncRow> bin = {{"bin", "fa", 0x100, 0x110}};
  std::vector<Addr2LineRow> a2l = {{"bin", 0x100, "a.c", 2}, {"bin", 0x10f, "a.c", 11}};
  MappingResult r = ConstructMapping("inline", a2l, bin, src);
  ASSERT_EQ(r.mappings.size(), 1u);
  EXPECT_EQ(r.mappings[0].source_functions, (std::set<std::string>{"a.c:A", "a.c:B"}));
  EXPECT_TRUE(HasInlining(r.mappings[0]));
}

TEST(ConstructMappingTest, ReportsInconsistentRecordsAndContinues) {
  std::vector<SrcFuncRow> src = {{"a.c", "A", 1, 10}};
  std::vector<BinFuncRow> bin = {{"bin", "fa", 0x100, 0x110}, {"bin", "fb", 0x200, 0x210}};
  std::vector<Addr2LineRow> a2l = {
      {"bin", 0x110, "a.c", 2},   // end address is exclusive
      {"bin", 0x104, "a.c", 50},  // no source function owns line 50
      {"bin", 0x100, "a.c", 3},
  };
  MappingResult r = ConstructMapping("noinline", a2l, bin, src);
  ASSERT_EQ(r.mappings.size(), 1u);
  EXPECT_EQ(r.mappings[0].function.func_name, "fa");
  ASSERT_EQ(r.issues.size(), 3u);
  EXPECT_EQ(r.issues[0].kind, TableIssue::Kind::kAddressOutsideFunctions);
  EXPECT_EQ(r.issues[1].kind, TableIssue::Kind::kLineOutsideFunctions);
  EXPECT_EQ(r.issues[2].kind, TableIssue::Kind::kUnmappedFunction);
}

TEST(ConstructMappingTest, MatchesJoinOracleOn50Functions) {
  std::mt19937_64 rng(50);
  std::vector<SrcFuncRow> src;
  for (int f = 0; f < 5; ++f) {
    std::uint32_t line = 1;
    for (int k = 0; k < 12; ++k) {
      const std::uint32_t len = 1 + rng() % 8;
      src.push_back({"f" + std::to_string(f) + ".c", "s" + std::to_string(k), line, line + len - 1});
      line += len + rng() % 3;  // occasional gaps
    }
  }
  std::vector<BinFuncRow> bin;
  std::vector<Addr2LineRow> a2l;
  for (int b = 0; b < 50; ++b) {
    const std::string binary = "bin" + std::to_string(b % 4);
    const std::uint64_t start = 0x1000 + 0x100 * static_cast<std::uint64_t>(b);
    bin.push_back({binary, "fn" + std::to_string(b), start, start + 0x40});
    for (int i = 0; i < 6; ++i) {
      const SrcFuncRow& s = src[rng() % src.size()];
      a2l.push_back({binary, start + rng() % 0x48, s.file, s.line_start + static_cast<std::uint32_t>(rng() % 10)});
    }
  }
  MappingResult r = ConstructMapping("ds", a2l, bin, src);
  EXPECT_EQ(r.mappings, OracleMappings("ds", a2l, bin, src));
}

TEST(SourceFcgTest, DropsSelfLoopsAndDuplicates) {
  std::vector<FcgRow> rows = {{"a", "b"}, {"a", "b"}, {"a", "a"}, {"b", "c"}};
  SourceFcg fcg(rows);
  EXPECT_EQ(fcg.edge_count(), 2u);
  EXPECT_EQ(fcg.self_loops_removed(), 1u);
  EXPECT_TRUE(fcg.HasEdge("a", "b"));
  EXPECT_FALSE(fcg.HasEdge("a", "a"));
  EXPECT_EQ(fcg.Callers("c"), (std::set<std::string>{"b"}));
  EXPECT_TRUE(fcg.Callees("zzz").empty());
}

TEST(ClassifyPatternTest, Examples) {
  std::vector<FcgRow> ab = {{"a", "b"}};
  SourceFcg fcg_ab(ab);
  EXPECT_EQ(ClassifyPattern("b", {"b"}, fcg_ab), Pattern::kEqual);
  EXPECT_EQ(ClassifyPattern("b", {"a", "b"}, fcg_ab), Pattern::kLeaf);
  EXPECT_EQ(ClassifyPattern("a", {"a", "b"}, fcg_ab), Pattern::kRoot);
  std::vector<FcgRow> abc = {{"a", "b"}, {"b", "c"}};
  EXPECT_EQ(ClassifyPattern("b", {"a", "b", "c"}, SourceFcg(abc)), Pattern::kInternal);
  // Isolated bridge counts as Leaf.
  EXPECT_EQ(ClassifyPattern("x", {"a", "x"}, SourceFcg(abc)), Pattern::kLeaf);
  EXPECT_EQ(ThrownCode([&] { ClassifyPattern("q", {"a", "b"}, fcg_ab); }),
            ErrorCode::kInvalidArgument);
}

TEST(ClassifyPatternTest, AgreesWithDegreeOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 11);
    std::vector<FcgRow> edges;
    for (int e = 0; e < n * 2; ++e) {
      edges.push_back({"n" + std::to_string(rng() % n), "n" + std::to_string(rng() % n)});
    }
    std::set<std::string> mapped;
    for (int v = 0; v < n; ++v) {
      if (rng() % 2) mapped.insert("n" + std::to_string(v));
    }
    if (mapped.empty()) continue;
    SourceFcg fcg(edges);
    for (const std::string& b : mapped) {
      EXPECT_EQ(ClassifyPattern(b, mapped, fcg), OracleClassify(b, mapped, edges));
    }
  }
}

MappingResult LoadSmallWorld(const char* dataset) {
  const std::filesystem::path dir = kSmallWorld / dataset;
  std::vector<Addr2LineRow> a2l = ReadAddr2Line(dir / "addr2line.tsv");
  std::vector<BinFuncRow> bin = ReadBinFuncs(dir / "binfuncs.tsv");
  std::vector<SrcFuncRow> src = ReadSrcFuncs(kSmallWorld / "srcfuncs.tsv");
  return ConstructMapping(dataset, a2l, bin, src);
}

TEST(BridgeIndexTest, Figure3Example) {
  MappingResult no_inline = LoadSmallWorld("noinline");
  MappingResult inlined = LoadSmallWorld("inline");
  ASSERT_EQ(inlined.mappings.size(), 1u);
  EXPECT_EQ(inlined.mappings[0].source_functions,
            (std::set<std::string>{Cms("CMS_decrypt"), Cms("check_content"), Cms("do_free_upto")}));
  EXPECT_TRUE(HasInlining(inlined.mappings[0]));

  std::vector<FcgRow> rows = ReadFcg(kSmallWorld / "fcg.tsv");
  BridgeIndexResult r = BuildBridgeIndex(no_inline.mappings, inlined.mappings, SourceFcg(rows));
  ASSERT_EQ(r.index.bridges.size(), 1u);
  const BridgeEntry& entry = r.index.bridges.at(Cms("do_free_upto"));
  ASSERT_EQ(entry.equal.size(), 1u);
  EXPECT_EQ(entry.equal[0], (BinaryFunctionRef{"noinline", "libcrypto", "do_free_upto"}));
  ASSERT_EQ(entry.cross_inlining.size(), 1u);
  EXPECT_EQ(entry.cross_inlining[0].target,
            (BinaryFunctionRef{"inline", "libcrypto", "CMS_decrypt"}));
  EXPECT_EQ(entry.cross_inlining[0].pattern, Pattern::kLeaf);
  EXPECT_EQ(PatternDistribution(r.index), (PatternCounts{1, 1, 0, 0}));
}

TEST(BridgeIndexTest, EmptyInlineSideGivesEqualListsOnly) {
  MappingResult no_inline = LoadSmallWorld("noinline");
  BridgeIndexResult r = BuildBridgeIndex(no_inline.mappings, {}, SourceFcg());
  for (const auto& [bridge, entry] : r.index.bridges) {
    EXPECT_FALSE(entry.equal.empty());
    EXPECT_TRUE(entry.cross_inlining.empty());
  }
  EXPECT_EQ(PatternDistribution(BridgeIndex{}), PatternCounts{});
}

TEST(BridgeIndexTest, DiagnosticsAndExclusions) {
  std::vector<Binary2SourceMapping> no_inline = {
      {{"noinline", "b", "f"}, 0, 1, {"s:f"}},
      {{"noinline", "b", "g"}, 1, 2, {"s:g", "s:h"}},  // residual inlining
  };
  std::vector<Binary2SourceMapping> inlined = {
      {{"inline", "b", "f"}, 0, 1, {"s:f"}},           // equal target
      {{"inline", "b", "k"}, 1, 2, {"s:f", "s:k"}},    // no edge: isolated
  };
  BridgeIndexResult r = BuildBridgeIndex(no_inline, inlined, SourceFcg());
  EXPECT_EQ(r.diagnostics.excluded_inlined_queries, 1u);
  EXPECT_EQ(r.diagnostics.equal_targets_skipped, 1u);
  EXPECT_EQ(r.diagnostics.isolated_bridges, 1u);
  ASSERT_EQ(r.index.bridges.size(), 1u);
  EXPECT_EQ(r.index.bridges.at("s:f").cross_inlining.at(0).pattern, Pattern::kLeaf);
}

// Random mapping sets over a random call graph.
struct RandomLabelInput {
  std::vector<Binary2SourceMapping> no_inline;
  std::vector<Binary2SourceMapping> inlined;
  std::vector<FcgRow> edges;
};

RandomLabelInput MakeRandomInput(std::mt19937_64& rng) {
  RandomLabelInput in;
  const int n = 30;
  auto id = [](int i) { return "m.c:s" + std::to_string(i); };
  for (int e = 0; e < 45; ++e) in.edges.push_back({id(rng() % n), id(rng() % n)});
  for (int f = 0; f < 40; ++f) {
    std::set<std::string> srcs{id(rng() % n)};
    if (rng() % 10 == 0) srcs.insert(id(rng() % n));
    in.no_inline.push_back({{"noinline", "b" + std::to_string(f % 3), "q" + std::to_string(f)}, 0, 1, srcs});
  }
  for (int f = 0; f < 40; ++f) {
    std::set<std::string> srcs;
    const int k = 1 + static_cast<int>(rng() % 4);
    while (static_cast<int>(srcs.size()) < k) srcs.insert(id(rng() % n));
    in.inlined.push_back({{"inline", "b" + std::to_string(f % 3), "t" + std::to_string(f)}, 0, 1, srcs});
  }
  return in;
}

TEST(BridgeIndexTest, MatchesEnumerationOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    RandomLabelInput in = MakeRandomInput(rng);
    BridgeIndex index = BuildBridgeIndex(in.no_inline, in.inlined, SourceFcg(in.edges)).index;
    EXPECT_EQ(index, OracleBridgeIndex(in.no_inline, in.inlined, in.edges));

    // Soundness, no equal leakage, and the distribution sum.
    std::map<BinaryFunctionRef, std::set<std::string>> sets;
    for (const auto& m : in.inlined) sets[m.function] = m.source_functions;
    std::size_t cross = 0;
    std::size_t equal = 0;
    for (const auto& [bridge, entry] : index.bridges) {
      equal += entry.equal.size();
      for (const CrossInliningEntry& c : entry.cross_inlining) {
        EXPECT_TRUE(sets.at(c.target).contains(bridge));
        EXPECT_GT(sets.at(c.target).size(), 1u);
        EXPECT_NE(c.pattern, Pattern::kEqual);
        ++cross;
      }
    }
    PatternCounts counts = PatternDistribution(index);
    EXPECT_EQ(counts.total(), cross + equal);
    EXPECT_EQ(counts.equal, equal);
  }
}

TEST(BridgeIndexTest, RestrictedKeepsOnlyListedBinaries) {
  std::mt19937_64 rng(12);
  RandomLabelInput in = MakeRandomInput(rng);
  BridgeIndex index = BuildBridgeIndex(in.no_inline, in.inlined, SourceFcg(in.edges)).index;
  BridgeIndex only = index.Restricted({"b1"});
  for (const auto& [bridge, entry] : only.bridges) {
    EXPECT_FALSE(entry.equal.empty());
    for (const auto& r : entry.equal) EXPECT_EQ(r.binary_id, "b1");
    for (const auto& c : entry.cross_inlining) EXPECT_EQ(c.target.binary_id, "b1");
  }
}

TEST(BridgeIndexTest, JsonRoundTrip) {
  std::mt19937_64 rng(21);
  RandomLabelInput in = MakeRandomInput(rng);
  BridgeIndex index = BuildBridgeIndex(in.no_inline, in.inlined, SourceFcg(in.edges)).index;
  EXPECT_EQ(BridgeIndexFromJson(BridgeIndexToJson(index)), index);
  EXPECT_EQ(ThrownCode([] { BridgeIndexFromJson("{\"bridges\": 3"); }), ErrorCode::kParse);
}

TEST(PatternNameTest, RoundTrip) {
  for (Pattern p : {Pattern::kEqual, Pattern::kLeaf, Pattern::kRoot, Pattern::kInternal}) {
    EXPECT_EQ(ParsePattern(PatternName(p)), p);
  }
  EXPECT_EQ(ParsePattern("mixed"), std::nullopt);
}

}  // namespace
}  // namespace cidetect
