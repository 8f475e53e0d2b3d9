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

#include "cidetect/synth.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cidetect/corpus.h"
#include "cidetect/error.h"
#include "cidetect/labeling.h"
#include "splice_check.h"
#include "test_util.h"

namespace cidetect {
namespace {

using testing::CheckSplice;
using testing::RandomSpliceCase;
using testing::ScratchDir;
using testing::ThrownCode;

SynthConfig SmallConfig(std::uint64_t seed) {
  SynthConfig c;
  c.n_projects = 4;
  c.functions_per_project = 25;
  c.call_density = 0.25;
  c.inline_probability = 0.9;
  c.seed = seed;
  return c;
}

std::size_t CallBlocks(const AttributedCfg& cfg, std::multiset<std::string>* targets) {
  std::size_t n = 0;
  for (const BasicBlock& b : cfg.nodes()) {
    for (std::size_t i = 0; i < b.instructions.size(); ++i) {
      const Instruction& insn = b.instructions[i];
      if (insn.opcode != kCallOpcode) continue;
      EXPECT_EQ(i + 1, b.instructions.size()) << "call must end its block";
      EXPECT_GE(b.instructions.size(), 2u);
      ++n;
      if (targets != nullptr) targets->insert(insn.operands.at(0));
    }
  }
  return n;
}

std::string FileText(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(GenSourceWorldTest, SingleFunctionHasNoCalls) {
  SynthConfig c;
  c.n_projects = 1;
  c.functions_per_project = 1;
  c.call_density = 0.9;
  SourceWorld w = GenSourceWorld(c);
  ASSERT_EQ(w.base.size(), 1u);
  EXPECT_TRUE(w.fcg.empty());
  EXPECT_EQ(CallBlocks(w.base[0], nullptr), 0u);
}

TEST(GenSourceWorldTest, ZeroDensityIsEdgeless) {
  SynthConfig c = SmallConfig(5);
  c.call_density = 0.0;
  SourceWorld w = GenSourceWorld(c);
  EXPECT_EQ(w.base.size(), 100u);
  EXPECT_TRUE(w.fcg.empty());
  for (const AttributedCfg& g : w.base) EXPECT_EQ(CallBlocks(g, nullptr), 0u);
}

TEST(GenSourceWorldTest, CallGraphIsAcyclic) {
  SynthConfig c;
  c.n_projects = 1;
  c.functions_per_project = 100;
  c.call_density = 0.1;
  c.max_callees = 6;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.seed = seed;
    SourceWorld w = GenSourceWorld(c);
    ASSERT_FALSE(w.fcg.empty());
    // Kahn's algorithm removes every node exactly when there is no cycle.
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> succ;
    for (const std::string& id : w.function_ids) indegree[id] = 0;
    for (const FcgRow& e : w.fcg) {
      ++indegree[e.callee];
      succ[e.caller].push_back(e.callee);
    }
    std::vector<std::string> ready;
    for (const auto& [id, d] : indegree) {
      if (d == 0) ready.push_back(id);
    }
    std::size_t removed = 0;
    while (!ready.empty()) {
      std::string n = ready.back();
      ready.pop_back();
      ++removed;
      for (const std::string& m : succ[n]) {
        if (--indegree[m] == 0) ready.push_back(m);
      }
    }
    EXPECT_EQ(removed, w.function_ids.size()) << "seed " << seed;
  }
}

TEST(GenSourceWorldTest, OneCallSitePerEdgeAndDownwardCalls) {
  SourceWorld w = GenSourceWorld(SmallConfig(11));
  ASSERT_EQ(w.callees.size(), w.base.size());
  for (std::size_t f = 0; f < w.base.size(); ++f) {
    std::multiset<std::string> targets;
    EXPECT_EQ(CallBlocks(w.base[f], &targets), w.callees[f].size());
    std::multiset<std::string> want;
    for (std::size_t g : w.callees[f]) {
      want.insert(w.base[g].function_name());
      EXPECT_LT(w.topo_rank[f], w.topo_rank[g]);
      EXPECT_EQ(w.function_project[f], w.function_project[g]);
    }
    EXPECT_EQ(targets, want);
    EXPECT_LE(w.callees[f].size(), SmallConfig(11).max_callees);
  }
}

TEST(GenSourceWorldTest, ProvenanceAndLinesAreConsistent) {
  SourceWorld w = GenSourceWorld(SmallConfig(2));
  for (std::size_t f = 0; f < w.base.size(); ++f) {
    const SrcFuncRow& row = w.functions[f];
    EXPECT_EQ(w.function_ids[f], SourceFunctionId(row.file, row.func_name));
    for (const BasicBlock& b : w.base[f].nodes()) {
      const auto& origins = w.base_provenance[f].at(b.id);
      ASSERT_EQ(origins.size(), b.instructions.size());
      for (const InstrOrigin& o : origins) {
        EXPECT_EQ(o.source_function, w.function_ids[f]);
        EXPECT_GT(o.line, row.line_start);
        EXPECT_LT(o.line, row.line_end);
      }
    }
  }
}

TEST(GenSourceWorldTest, DeterministicPerSeed) {
  SourceWorld a = GenSourceWorld(SmallConfig(3));
  SourceWorld b = GenSourceWorld(SmallConfig(3));
  SourceWorld c = GenSourceWorld(SmallConfig(4));
  EXPECT_EQ(a.base, b.base);
  EXPECT_EQ(a.fcg, b.fcg);
  EXPECT_NE(a.base, c.base);
}

TEST(InlineTransformTest, SingleBlockCalleeArithmetic) {
  RawFunction caller;
  caller.name = "f";
  caller.blocks = {{0, {{0, "push", {}}, {1, "mov", {}}, {2, "call", {"g"}}}},
                   {1, {{3, "add", {}}, {4, "ret", {}}}}};
  caller.edges = {{0, 1}};
  RawFunction callee;
  callee.name = "g";
  callee.blocks = {{0, {{0, "xor", {}}, {1, "imul", {}}, {2, "ret", {}}}}};
  const AttributedCfg f = BuildAcfg(caller);
  const AttributedCfg g = BuildAcfg(callee);
  InlineResult r = InlineTransform(f, g, 0);
  EXPECT_EQ(r.cfg.node_count(), f.node_count() + 1);
  EXPECT_EQ(r.cfg.instruction_count(), f.instruction_count() - 1 + 3);
}

TEST(InlineTransformTest, DiamondIntoLinearCallerMatchesFixture) {
  RawFunction caller;
  caller.name = "f";
  caller.blocks = {{0, {{0x10, "push", {}}, {0x11, "mov", {}}, {0x12, "call", {"g"}}}},
                   {1, {{0x17, "add", {}}, {0x18, "ret", {}}}}};
  caller.edges = {{0, 1}};
  RawFunction callee;
  callee.name = "g";
  callee.blocks = {{0, {{0, "cmp", {}}, {1, "je", {}}}},
                   {1, {{2, "mov", {}}}},
                   {2, {{3, "xor", {}}}},
                   {3, {{4, "ret", {}}}}};
  callee.edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  InlineResult r = InlineTransform(BuildAcfg(caller), BuildAcfg(callee), 0);

  const std::vector<std::pair<NodeId, std::vector<std::string>>> want_blocks = {
      {0, {"push", "mov"}}, {1, {"add", "ret"}}, {2, {"cmp", "je"}},
      {3, {"mov"}},         {4, {"xor"}},        {5, {"ret"}}};
  ASSERT_EQ(r.cfg.node_count(), want_blocks.size());
  for (std::size_t i = 0; i < want_blocks.size(); ++i) {
    const BasicBlock& b = r.cfg.nodes()[i];
    EXPECT_EQ(b.id, want_blocks[i].first);
    std::vector<std::string> ops;
    for (const Instruction& insn : b.instructions) ops.push_back(insn.opcode);
    EXPECT_EQ(ops, want_blocks[i].second) << "block " << b.id;
  }
  const std::vector<Edge> want_edges = {{0, 2}, {2, 3}, {2, 4}, {3, 5}, {4, 5}, {5, 1}};
  std::vector<Edge> edges = r.cfg.edges();
  std::vector<Edge> sorted_want = want_edges;
  std::sort(sorted_want.begin(), sorted_want.end());
  EXPECT_EQ(edges, sorted_want);
  EXPECT_EQ(r.cfg.entry(), 0u);
  EXPECT_EQ(r.cfg.nodes().front().instructions.front().address, 0x10u);
  EXPECT_EQ(r.provenance.at(3).at(0).source_function, "g");
  EXPECT_EQ(r.provenance.at(1).at(0).source_function, "f");
}

TEST(InlineTransformTest, SiteErrors) {
  RawFunction caller;
  caller.name = "f";
  caller.blocks = {{0, {{0, "push", {}}, {1, "call", {"g"}}}}, {1, {{2, "ret", {}}}},
                   {2, {{3, "call", {"g"}}}}};
  caller.edges = {{0, 1}, {1, 2}};
  RawFunction callee;
  callee.name = "g";
  callee.blocks = {{0, {{0, "ret", {}}}}};
  const AttributedCfg f = BuildAcfg(caller);
  const AttributedCfg g = BuildAcfg(callee);
  EXPECT_EQ(ThrownCode([&] { InlineTransform(f, g, 9); }), ErrorCode::kSiteNotFound);
  EXPECT_EQ(ThrownCode([&] { InlineTransform(f, g, 1); }), ErrorCode::kSiteNotFound);
  // A block holding nothing but the call has no prefix to keep.
  EXPECT_EQ(ThrownCode([&] { InlineTransform(f, g, 2); }), ErrorCode::kSiteNotFound);
  callee.name = "h";
  EXPECT_EQ(ThrownCode([&] { InlineTransform(f, BuildAcfg(callee), 0); }),
            ErrorCode::kSiteNotFound);
  EXPECT_FALSE(ThrownCode([&] { InlineTransform(f, g, 0); }).has_value());
}

TEST(InlineTransformTest, RandomSplicesHonourContract) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    testing::SpliceCase c = RandomSpliceCase(rng);
    InlineResult r = InlineTransform(c.caller, c.callee, c.call_site);
    EXPECT_EQ(CheckSplice(c, r), "") << "trial " << trial;
  }
}

TEST(ApplyInliningPolicyTest, ZeroProbabilityCopiesNoInliningBuild) {
  SynthConfig c = SmallConfig(6);
  c.inline_probability = 0.0;
  SynthCorpus corpus = GenerateCorpus(c);
  EXPECT_EQ(corpus.inlined_call_sites, 0u);
  ASSERT_EQ(corpus.no_inline.binaries.size(), corpus.inlining.binaries.size());
  for (const auto& [binary, fns] : corpus.no_inline.binaries) {
    EXPECT_EQ(fns, corpus.inlining.binaries.at(binary));
  }
  for (const auto& [bridge, entry] : corpus.ground_truth.bridges) {
    EXPECT_TRUE(entry.cross_inlining.empty()) << bridge;
  }
  EXPECT_EQ(PatternDistribution(corpus.ground_truth).equal, 100u);
}

TEST(ApplyInliningPolicyTest, ChainOfThreeGivesInternalBridge) {
  SynthConfig c;
  c.n_projects = 1;
  c.functions_per_project = 3;
  c.fcg_shape = FcgShape::kChain;
  c.inline_budget = 1000000;
  c.inline_probability = 1.0;
  SourceWorld w = GenSourceWorld(c);
  ASSERT_EQ(w.fcg.size(), 2u);
  // Order the chain a -> b -> c.
  std::vector<std::size_t> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return w.topo_rank[x] < w.topo_rank[y]; });
  const std::string a = w.function_ids[order[0]];
  const std::string b = w.function_ids[order[1]];
  const std::string cc = w.function_ids[order[2]];

  SynthCorpus corpus = ApplyInliningPolicy(w, c);
  EXPECT_EQ(corpus.inlined_call_sites, 2u);
  const Binary2SourceMapping* ma = nullptr;
  for (const Binary2SourceMapping& m : corpus.inlining.truth_mappings) {
    if (m.function.func_name == w.base[order[0]].function_name()) ma = &m;
  }
  ASSERT_NE(ma, nullptr);
  EXPECT_EQ(ma->source_functions, (std::set<std::string>{a, b, cc}));

  const BridgeEntry& eb = corpus.ground_truth.bridges.at(b);
  bool found = false;
  for (const CrossInliningEntry& x : eb.cross_inlining) {
    if (x.target == ma->function) {
      EXPECT_EQ(x.pattern, Pattern::kInternal);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  const PatternCounts counts = PatternDistribution(corpus.ground_truth);
  EXPECT_EQ(counts.internal, 1u);
  EXPECT_EQ(counts.leaf, 2u);  // c in a, c in b
  EXPECT_EQ(counts.root, 2u);  // a in a, b in b
}

TEST(ApplyInliningPolicyTest, ChainShapeRealizesAllPatterns) {
  SynthConfig c = SmallConfig(8);
  c.fcg_shape = FcgShape::kChain;
  c.inline_probability = 1.0;
  c.inline_budget = 60;
  const PatternCounts counts = PatternDistribution(GenerateCorpus(c).ground_truth);
  EXPECT_GT(counts.leaf, 0u);
  EXPECT_GT(counts.root, 0u);
  EXPECT_GT(counts.internal, 0u);
}

TEST(ApplyInliningPolicyTest, UnboundedInliningConservesInstructions) {
  SynthConfig c = SmallConfig(9);
  c.inline_budget = 1000000;
  c.inline_probability = 1.0;
  c.require_all_patterns = false;
  SourceWorld w = GenSourceWorld(c);
  SynthCorpus corpus = ApplyInliningPolicy(w, c);

  // With every call inlined, size(f) = base(f) + sum over callees of
  // (size(g) - 1), computed callee-first.
  std::vector<std::size_t> order(w.base.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return w.topo_rank[x] > w.topo_rank[y]; });
  std::vector<std::size_t> size(w.base.size());
  for (std::size_t f : order) {
    size[f] = w.base[f].instruction_count();
    for (std::size_t g : w.callees[f]) size[f] += size[g] - 1;
  }
  std::map<std::string, std::size_t> got;
  for (const auto& [binary, fns] : corpus.inlining.binaries) {
    for (const AttributedCfg& g : fns) got[g.function_name()] = g.instruction_count();
  }
  for (std::size_t f = 0; f < w.base.size(); ++f) {
    EXPECT_EQ(got.at(w.base[f].function_name()), size[f]);
  }
  EXPECT_EQ(corpus.inlined_call_sites, w.fcg.size());
}

TEST(ApplyInliningPolicyTest, BudgetBlocksLargeCallees) {
  SynthConfig c = SmallConfig(10);
  c.inline_budget = 1;
  c.inline_probability = 1.0;
  c.require_all_patterns = false;
  SynthCorpus corpus = GenerateCorpus(c);
  EXPECT_EQ(corpus.inlined_call_sites, 0u);
}

TEST(ApplyInliningPolicyTest, StarvationIsReported) {
  SynthConfig c = SmallConfig(12);
  c.call_density = 0.0;
  c.inline_probability = 1.0;
  EXPECT_EQ(ThrownCode([&] { GenerateCorpus(c); }), ErrorCode::kPatternStarvation);
  c.require_all_patterns = false;
  EXPECT_FALSE(ThrownCode([&] { GenerateCorpus(c); }).has_value());
}

TEST(ApplyInliningPolicyTest, MutationKeepsShapeAndCalls) {
  SynthConfig c = SmallConfig(13);
  SynthConfig m = c;
  m.mutation_rate = 0.3;
  SynthCorpus plain = GenerateCorpus(c);
  SynthCorpus mutated = GenerateCorpus(m);
  std::size_t changed = 0;
  std::size_t total = 0;
  for (const auto& [binary, fns] : plain.inlining.binaries) {
    const auto& other = mutated.inlining.binaries.at(binary);
    ASSERT_EQ(fns.size(), other.size());
    for (std::size_t i = 0; i < fns.size(); ++i) {
      ASSERT_EQ(fns[i].edges(), other[i].edges());
      ASSERT_EQ(fns[i].node_count(), other[i].node_count());
      for (std::size_t b = 0; b < fns[i].node_count(); ++b) {
        const auto& x = fns[i].nodes()[b].instructions;
        const auto& y = other[i].nodes()[b].instructions;
        ASSERT_EQ(x.size(), y.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
          ++total;
          if (x[k].opcode != y[k].opcode) ++changed;
          if (x[k].opcode == kCallOpcode || x[k].opcode == kReturnOpcode) {
            EXPECT_EQ(x[k].opcode, y[k].opcode);
          }
        }
      }
    }
  }
  const double rate = static_cast<double>(changed) / static_cast<double>(total);
  EXPECT_GT(rate, 0.15);
  EXPECT_LT(rate, 0.35);
  EXPECT_EQ(plain.ground_truth, mutated.ground_truth);
  EXPECT_EQ(plain.no_inline.binaries, mutated.no_inline.binaries);
}

TEST(SynthRoundTripTest, LabelingReproducesGroundTruth) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    SynthCorpus corpus = GenerateCorpus(SmallConfig(seed));
    ScratchDir dir("synth_rt");
    WriteCorpus(dir.path(), corpus);
    LabeledCorpus labeled = LabelCorpusDir(dir.path());
    EXPECT_TRUE(labeled.no_inline.issues.empty());
    EXPECT_TRUE(labeled.inlining.issues.empty());
    EXPECT_EQ(labeled.no_inline.mappings, corpus.no_inline.truth_mappings);
    EXPECT_EQ(labeled.inlining.mappings, corpus.inlining.truth_mappings);
    EXPECT_EQ(labeled.bridges.index, corpus.ground_truth) << "seed " << seed;
    EXPECT_EQ(BridgeIndexFromJson(FileText(dir.path() / "ground_truth.json")),
              corpus.ground_truth);
  }
}

TEST(SynthRoundTripTest, WriteCorpusIsByteStable) {
  SynthConfig c = SmallConfig(21);
  c.mutation_rate = 0.05;
  ScratchDir a("synth_a");
  ScratchDir b("synth_b");
  WriteCorpus(a.path(), GenerateCorpus(c));
  WriteCorpus(b.path(), GenerateCorpus(c));
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path())) {
    if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), a.path()));
  }
  EXPECT_GE(files.size(), 9u);
  for (const auto& rel : files) {
    ASSERT_TRUE(std::filesystem::exists(b.path() / rel)) << rel;
    EXPECT_EQ(FileText(a.path() / rel), FileText(b.path() / rel)) << rel;
  }
}

TEST(SynthConfigTest, JsonAndOptions) {
  SynthConfig c;
  ApplySynthOption(c, "fcg_shape", "chain");
  ApplySynthOption(c, "mutation_rate", "0.05");
  EXPECT_EQ(c.fcg_shape, FcgShape::kChain);
  EXPECT_DOUBLE_EQ(c.mutation_rate, 0.05);
  EXPECT_NE(SynthConfigToJson(c).find("\"chain\""), std::string::npos);
  EXPECT_EQ(ThrownCode([&] { ApplySynthOption(c, "fcg_shape", "tree"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(ThrownCode([&] { ApplySynthOption(c, "no_such_key", "1"); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace cidetect
