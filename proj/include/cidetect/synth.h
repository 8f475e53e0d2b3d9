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

// Synthetic cross-inlining corpus generator.
//
// A source world is a set of projects, each with an acyclic call graph and a
// random control-flow graph per function whose call sites are blocks ending
// in `call <callee>`. Each project is "compiled" twice: once as is (the
// no-inlining build) and once with call sites spliced in bottom-up under a
// size budget and an inlining probability (the inlining build). Every
// instruction carries its originating source function and line, from which
// the generator emits debug tables and the ground-truth bridge index.

#ifndef CIDETECT_SYNTH_H_
#define CIDETECT_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cidetect/acfg.h"
#include "cidetect/labeling.h"
#include "cidetect/tables.h"

namespace cidetect {

enum class FcgShape { kRandom, kChain };

struct SynthConfig {
  std::size_t n_projects = 20;
  std::size_t functions_per_project = 15;
  std::size_t alphabet_size = 48;
  std::size_t min_blocks = 2;
  std::size_t max_blocks = 7;
  std::size_t min_block_insns = 2;
  std::size_t max_block_insns = 6;
  // Probability of a call edge from a function to each function after it in
  // the project's topological order.
  double call_density = 0.12;
  std::size_t max_callees = 3;
  FcgShape fcg_shape = FcgShape::kRandom;
  // A callee is inlined only if its (already inlined) body has at most this
  // many instructions.
  std::size_t inline_budget = 120;
  double inline_probability = 0.7;
  // Fraction of opcodes replaced at random in the inlining build.
  double mutation_rate = 0.0;
  // Each function draws most opcodes from its own small subset.
  std::size_t style_size = 6;
  double style_weight = 0.85;
  // When nonzero, functions pick their style from this many styles shared
  // across all projects instead of drawing a private one.
  std::size_t style_pool = 0;
  bool require_all_patterns = true;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidArgument).
  void Validate() const;
};

// Sets one field from a key=value config entry. Throws
// Error(kInvalidArgument) for unknown keys or bad values.
void ApplySynthOption(SynthConfig& config, std::string_view key,
                      std::string_view value);
std::string SynthConfigToJson(const SynthConfig& config);

struct InstrOrigin {
  std::string source_function;  // source function id
  std::uint32_t line = 0;

  friend bool operator==(const InstrOrigin&, const InstrOrigin&) = default;
};

// Origin of every instruction, keyed by block id, parallel to the block's
// instruction list.
using Provenance = std::map<NodeId, std::vector<InstrOrigin>>;

// Every instruction attributed to the graph's own function name, line 0.
Provenance OwnProvenance(const AttributedCfg& cfg);

struct SourceWorld {
  std::vector<std::string> projects;
  std::vector<SrcFuncRow> functions;
  std::vector<std::string> function_ids;      // parallel to functions
  std::vector<std::size_t> function_project;  // index into projects
  std::vector<std::vector<std::size_t>> callees;  // by function index
  std::vector<FcgRow> fcg;
  std::vector<AttributedCfg> base;
  std::vector<Provenance> base_provenance;
  // Position of each function in its project's topological order (callers
  // before callees).
  std::vector<std::size_t> topo_rank;
};

SourceWorld GenSourceWorld(const SynthConfig& config);

inline constexpr std::string_view kCallOpcode = "call";
inline constexpr std::string_view kReturnOpcode = "ret";

struct InlineResult {
  AttributedCfg cfg;
  Provenance provenance;
};

// Splices `callee` into `caller` at `call_site`, a block whose last
// instruction is `call <callee name>` preceded by at least one other
// instruction. The call is removed, the callee's blocks get fresh ids, the
// call-site block jumps to the callee entry and every callee exit block jumps
// to the call site's former successors. Addresses are reassigned
// sequentially from the caller's first address. Throws Error(kSiteNotFound).
InlineResult InlineTransform(const AttributedCfg& caller,
                             const Provenance& caller_provenance,
                             const AttributedCfg& callee,
                             const Provenance& callee_provenance,
                             NodeId call_site);
InlineResult InlineTransform(const AttributedCfg& caller,
                             const AttributedCfg& callee, NodeId call_site);

struct SyntheticDataset {
  std::string name;  // kNoInliningDataset or kInliningDataset
  // binary id -> functions of that binary (one binary per project)
  std::map<std::string, std::vector<AttributedCfg>> binaries;
  std::vector<Addr2LineRow> addr2line;
  std::vector<BinFuncRow> binfuncs;
  // Mappings derived directly from provenance.
  std::vector<Binary2SourceMapping> truth_mappings;
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<std::string> projects;
  std::vector<SrcFuncRow> source_functions;
  std::vector<FcgRow> fcg;
  SyntheticDataset no_inline;
  SyntheticDataset inlining;
  BridgeIndex ground_truth;
  std::size_t inlined_call_sites = 0;
};

// Throws Error(kPatternStarvation) when inlining is enabled,
// require_all_patterns is set, and some cross-inlining pattern never occurs.
SynthCorpus ApplyInliningPolicy(const SourceWorld& world,
                                const SynthConfig& config);

SynthCorpus GenerateCorpus(const SynthConfig& config);

// Corpus directory layout:
//   manifest.json, srcfuncs.tsv, fcg.tsv, ground_truth.json,
//   <dataset>/addr2line.tsv, <dataset>/binfuncs.tsv,
//   <dataset>/graphs/<binary_id>.jsonl   for dataset in {noinline, inline}
void WriteCorpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace cidetect

#endif  // CIDETECT_SYNTH_H_
