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
#include <cstdio>
#include <iterator>
#include <numeric>
#include <random>
#include <set>

#include "cidetect/checkpoint.h"
#include "cidetect/config.h"
#include "cidetect/error.h"
#include "cidetect/exchange.h"
#include "cidetect/seed.h"
#include "json.hpp"

namespace cidetect {
namespace {

using nlohmann::json;

constexpr std::uint64_t kTextBase = 0x401000;
constexpr std::size_t kFunctionsPerFile = 5;
constexpr double kForwardJumpRate = 0.3;
constexpr double kBackEdgeRate = 0.15;

// Stream tags for MixSeed.
constexpr std::uint64_t kWorldStream = 1;
constexpr std::uint64_t kInlineStream = 2;
constexpr std::uint64_t kMutationStream = 3;
constexpr std::uint64_t kStylePoolStream = 4;

constexpr const char* kMnemonics[] = {
    "mov",  "push", "pop",   "add",   "sub",   "lea",  "cmp",    "test",
    "jmp",  "je",   "jne",   "xor",   "and",   "or",   "shl",    "shr",
    "imul", "movzx", "movsx", "inc",  "dec",   "neg",  "not",    "sar",
    "jg",   "jl",   "jge",   "jle",   "sete",  "nop",  "cdq",    "idiv"};
constexpr const char* kRegisters[] = {"rax", "rbx", "rcx", "rdx",
                                      "rsi", "rdi", "r8",  "r9"};

std::string Format(const char* fmt, std::size_t value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

std::vector<std::string> Alphabet(std::size_t size) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size; ++i) {
    if (i < std::size(kMnemonics)) {
      out.emplace_back(kMnemonics[i]);
    } else {
      out.push_back(Format("op%03zu", i));
    }
  }
  return out;
}

std::size_t Uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool Bernoulli(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::uint64_t InstructionLength(std::string_view opcode) {
  return 1 + Fnv1a64(opcode) % 7;
}

// Lays the blocks out contiguously in id order starting at `base`; returns
// the first address past the function.
std::uint64_t AssignAddresses(RawFunction& raw, std::uint64_t base) {
  std::sort(raw.blocks.begin(), raw.blocks.end(),
            [](const BasicBlock& a, const BasicBlock& b) { return a.id < b.id; });
  for (BasicBlock& block : raw.blocks) {
    for (Instruction& insn : block.instructions) {
      insn.address = base;
      base += InstructionLength(insn.opcode);
    }
  }
  return base;
}

bool IsCallTo(const BasicBlock& block, std::string_view callee) {
  if (block.instructions.empty()) return false;
  const Instruction& last = block.instructions.back();
  return last.opcode == kCallOpcode && !last.operands.empty() &&
         last.operands.front() == callee;
}

const std::vector<InstrOrigin>& OriginsOf(const Provenance& provenance,
                                          const BasicBlock& block) {
  auto it = provenance.find(block.id);
  if (it == provenance.end() || it->second.size() != block.instructions.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "provenance does not cover block " + std::to_string(block.id));
  }
  return it->second;
}

std::vector<std::size_t> RandomStyle(std::size_t alphabet_size, std::size_t style_size,
                                     std::mt19937_64& rng) {
  std::vector<std::size_t> style(alphabet_size);
  std::iota(style.begin(), style.end(), 0);
  std::shuffle(style.begin(), style.end(), rng);
  style.resize(style_size);
  return style;
}

struct GeneratedFunction {
  AttributedCfg cfg;
  Provenance provenance;
  std::size_t line_count = 0;
};

GeneratedFunction GenFunction(const std::string& name, const std::string& id,
                              std::uint32_t first_line,
                              const std::vector<std::string>& callee_names,
                              const std::vector<std::string>& alphabet,
                              const std::vector<std::vector<std::size_t>>& style_pool,
                              const SynthConfig& config, std::mt19937_64& rng) {
  std::size_t n_blocks = Uniform(rng, config.min_blocks, config.max_blocks);
  n_blocks = std::max(n_blocks, callee_names.size() + 1);

  std::vector<std::size_t> style;
  if (style_pool.empty()) {
    style = RandomStyle(alphabet.size(), config.style_size, rng);
  } else {
    style = style_pool[Uniform(rng, 0, style_pool.size() - 1)];
  }

  RawFunction raw;
  raw.name = name;
  raw.entry = 0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    BasicBlock block;
    block.id = static_cast<NodeId>(b);
    const std::size_t n = Uniform(rng, config.min_block_insns, config.max_block_insns);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t op = Bernoulli(rng, config.style_weight)
                                 ? style[Uniform(rng, 0, style.size() - 1)]
                                 : Uniform(rng, 0, alphabet.size() - 1);
      block.instructions.push_back(
          {0, alphabet[op],
           {kRegisters[Uniform(rng, 0, std::size(kRegisters) - 1)],
            kRegisters[Uniform(rng, 0, std::size(kRegisters) - 1)]}});
    }
    raw.blocks.push_back(std::move(block));
  }

  // One call site per callee, never in the final block.
  std::vector<std::size_t> sites(n_blocks - 1);
  std::iota(sites.begin(), sites.end(), 0);
  std::shuffle(sites.begin(), sites.end(), rng);
  for (std::size_t c = 0; c < callee_names.size(); ++c) {
    raw.blocks[sites[c]].instructions.push_back(
        {0, std::string(kCallOpcode), {callee_names[c]}});
  }
  raw.blocks.back().instructions.push_back({0, std::string(kReturnOpcode), {}});

  for (std::size_t b = 0; b + 1 < n_blocks; ++b) {
    const auto from = static_cast<NodeId>(b);
    raw.edges.emplace_back(from, from + 1);
    if (b + 2 < n_blocks && Bernoulli(rng, kForwardJumpRate)) {
      raw.edges.emplace_back(from, static_cast<NodeId>(Uniform(rng, b + 2, n_blocks - 1)));
    }
    if (b >= 1 && Bernoulli(rng, kBackEdgeRate)) {
      raw.edges.emplace_back(from, static_cast<NodeId>(Uniform(rng, 0, b - 1)));
    }
  }

  GeneratedFunction out;
  std::size_t k = 0;
  for (const BasicBlock& block : raw.blocks) {
    auto& origins = out.provenance[block.id];
    for (std::size_t i = 0; i < block.instructions.size(); ++i, ++k) {
      origins.push_back({id, first_line + 1 + static_cast<std::uint32_t>(k / 2)});
    }
  }
  // Opening line, two instructions per line, closing line.
  out.line_count = 2 + (k + 1) / 2;
  AssignAddresses(raw, 0);
  out.cfg = BuildAcfg(std::move(raw));
  return out;
}

AttributedCfg Relocate(const AttributedCfg& cfg, std::uint64_t base,
                       std::uint64_t& end) {
  RawFunction raw = ToRaw(cfg);
  end = AssignAddresses(raw, base);
  return BuildAcfg(std::move(raw));
}

AttributedCfg Mutate(const AttributedCfg& cfg, double rate,
                     const std::vector<std::string>& alphabet, std::mt19937_64& rng) {
  RawFunction raw = ToRaw(cfg);
  for (BasicBlock& block : raw.blocks) {
    for (Instruction& insn : block.instructions) {
      if (insn.opcode == kCallOpcode || insn.opcode == kReturnOpcode) continue;
      if (Bernoulli(rng, rate)) insn.opcode = alphabet[Uniform(rng, 0, alphabet.size() - 1)];
    }
  }
  return BuildAcfg(std::move(raw));
}

void EmitDataset(SyntheticDataset& ds, const SourceWorld& world,
                 const std::vector<AttributedCfg>& cfgs,
                 const std::vector<Provenance>& provenance) {
  std::map<std::string, std::string> file_of;
  for (std::size_t f = 0; f < world.functions.size(); ++f) {
    file_of[world.function_ids[f]] = world.functions[f].file;
  }
  std::vector<std::uint64_t> cursor(world.projects.size(), kTextBase);
  for (std::size_t f = 0; f < cfgs.size(); ++f) {
    const std::string& binary = world.projects[world.function_project[f]];
    std::uint64_t& at = cursor[world.function_project[f]];
    std::uint64_t end = 0;
    AttributedCfg cfg = Relocate(cfgs[f], at, end);

    Binary2SourceMapping m;
    m.function = {ds.name, binary, cfg.function_name()};
    m.addr_start = at;
    m.addr_end = end;
    for (const BasicBlock& block : cfg.nodes()) {
      const auto& origins = OriginsOf(provenance[f], block);
      for (std::size_t i = 0; i < block.instructions.size(); ++i) {
        ds.addr2line.push_back({binary, block.instructions[i].address,
                                file_of.at(origins[i].source_function), origins[i].line});
        m.source_functions.insert(origins[i].source_function);
      }
    }
    ds.binfuncs.push_back({binary, cfg.function_name(), at, end});
    ds.truth_mappings.push_back(std::move(m));
    ds.binaries[binary].push_back(std::move(cfg));
    at = (end + 15) / 16 * 16 + 16;
  }
  std::sort(ds.truth_mappings.begin(), ds.truth_mappings.end(),
            [](const auto& a, const auto& b) { return a.function < b.function; });
}

// Ground truth straight from the provenance-derived mappings and the world's
// call lists, independent of the labeling module's table join.
BridgeIndex GroundTruth(const SourceWorld& world, const SyntheticDataset& no_inline,
                        const SyntheticDataset& inlining) {
  std::map<std::string, std::set<std::string>> calls;
  for (const FcgRow& row : world.fcg) {
    if (row.caller != row.callee) calls[row.caller].insert(row.callee);
  }
  auto has_call = [&](const std::string& a, const std::string& b) {
    auto it = calls.find(a);
    return it != calls.end() && it->second.contains(b);
  };

  BridgeIndex index;
  for (const Binary2SourceMapping& m : no_inline.truth_mappings) {
    if (m.source_functions.size() == 1) {
      index.bridges[*m.source_functions.begin()].equal.push_back(m.function);
    }
  }
  for (const Binary2SourceMapping& m : inlining.truth_mappings) {
    if (m.source_functions.size() < 2) continue;
    for (const std::string& b : m.source_functions) {
      auto it = index.bridges.find(b);
      if (it == index.bridges.end()) continue;
      bool calls_member = false;
      bool called_by_member = false;
      for (const std::string& other : m.source_functions) {
        calls_member = calls_member || has_call(b, other);
        called_by_member = called_by_member || has_call(other, b);
      }
      const Pattern p = !calls_member       ? Pattern::kLeaf
                        : !called_by_member ? Pattern::kRoot
                                            : Pattern::kInternal;
      it->second.cross_inlining.push_back({m.function, p});
    }
  }
  for (auto& [bridge, entry] : index.bridges) {
    std::sort(entry.equal.begin(), entry.equal.end());
    std::sort(entry.cross_inlining.begin(), entry.cross_inlining.end());
  }
  return index;
}

}  // namespace

void SynthConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("synth config: ") + what);
  };
  require(n_projects >= 1, "n_projects must be >= 1");
  require(functions_per_project >= 1, "functions_per_project must be >= 1");
  require(alphabet_size >= 1, "alphabet_size must be >= 1");
  require(min_blocks >= 1 && min_blocks <= max_blocks,
          "block range must satisfy 1 <= min_blocks <= max_blocks");
  require(min_block_insns >= 1 && min_block_insns <= max_block_insns,
          "instruction range must satisfy 1 <= min_block_insns <= max_block_insns");
  require(call_density >= 0.0 && call_density <= 1.0, "call_density must be in [0, 1]");
  require(inline_budget >= 1, "inline_budget must be >= 1");
  require(inline_probability >= 0.0 && inline_probability <= 1.0,
          "inline_probability must be in [0, 1]");
  require(mutation_rate >= 0.0 && mutation_rate <= 1.0, "mutation_rate must be in [0, 1]");
  require(style_size >= 1 && style_size <= alphabet_size,
          "style_size must be in [1, alphabet_size]");
  require(style_weight >= 0.0 && style_weight <= 1.0, "style_weight must be in [0, 1]");
}

void ApplySynthOption(SynthConfig& c, std::string_view key, std::string_view value) {
  if (key == "n_projects") {
    c.n_projects = ParseUnsigned(key, value);
  } else if (key == "functions_per_project") {
    c.functions_per_project = ParseUnsigned(key, value);
  } else if (key == "alphabet_size") {
    c.alphabet_size = ParseUnsigned(key, value);
  } else if (key == "min_blocks") {
    c.min_blocks = ParseUnsigned(key, value);
  } else if (key == "max_blocks") {
    c.max_blocks = ParseUnsigned(key, value);
  } else if (key == "min_block_insns") {
    c.min_block_insns = ParseUnsigned(key, value);
  } else if (key == "max_block_insns") {
    c.max_block_insns = ParseUnsigned(key, value);
  } else if (key == "call_density") {
    c.call_density = ParseReal(key, value);
  } else if (key == "max_callees") {
    c.max_callees = ParseUnsigned(key, value);
  } else if (key == "fcg_shape") {
    if (value == "random") {
      c.fcg_shape = FcgShape::kRandom;
    } else if (value == "chain") {
      c.fcg_shape = FcgShape::kChain;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "fcg_shape must be random or chain");
    }
  } else if (key == "inline_budget") {
    c.inline_budget = ParseUnsigned(key, value);
  } else if (key == "inline_probability") {
    c.inline_probability = ParseReal(key, value);
  } else if (key == "mutation_rate") {
    c.mutation_rate = ParseReal(key, value);
  } else if (key == "style_size") {
    c.style_size = ParseUnsigned(key, value);
  } else if (key == "style_weight") {
    c.style_weight = ParseReal(key, value);
  } else if (key == "style_pool") {
    c.style_pool = ParseUnsigned(key, value);
  } else if (key == "require_all_patterns") {
    c.require_all_patterns = ParseFlag(key, value);
  } else if (key == "seed") {
    c.seed = ParseUnsigned(key, value);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown synth option " + std::string(key));
  }
}

std::string SynthConfigToJson(const SynthConfig& c) {
  json j = {
      {"n_projects", c.n_projects},
      {"functions_per_project", c.functions_per_project},
      {"alphabet_size", c.alphabet_size},
      {"min_blocks", c.min_blocks},
      {"max_blocks", c.max_blocks},
      {"min_block_insns", c.min_block_insns},
      {"max_block_insns", c.max_block_insns},
      {"call_density", c.call_density},
      {"max_callees", c.max_callees},
      {"fcg_shape", c.fcg_shape == FcgShape::kChain ? "chain" : "random"},
      {"inline_budget", c.inline_budget},
      {"inline_probability", c.inline_probability},
      {"mutation_rate", c.mutation_rate},
      {"style_size", c.style_size},
      {"style_weight", c.style_weight},
      {"style_pool", c.style_pool},
      {"require_all_patterns", c.require_all_patterns},
      {"seed", c.seed},
  };
  return j.dump();
}

Provenance OwnProvenance(const AttributedCfg& cfg) {
  Provenance out;
  for (const BasicBlock& block : cfg.nodes()) {
    out[block.id].assign(block.instructions.size(), {cfg.function_name(), 0});
  }
  return out;
}

SourceWorld GenSourceWorld(const SynthConfig& config) {
  config.Validate();
  const std::vector<std::string> alphabet = Alphabet(config.alphabet_size);
  const std::size_t n = config.functions_per_project;
  SourceWorld world;

  // Styles shared by all projects, standing in for common code idioms.
  std::vector<std::vector<std::size_t>> style_pool;
  std::mt19937_64 pool_rng(MixSeed(config.seed, {kStylePoolStream}));
  for (std::size_t i = 0; i < config.style_pool; ++i) {
    style_pool.push_back(RandomStyle(alphabet.size(), config.style_size, pool_rng));
  }

  for (std::size_t p = 0; p < config.n_projects; ++p) {
    std::mt19937_64 rng(MixSeed(config.seed, {kWorldStream, p}));
    const std::string project = Format("p%02zu", p);
    const std::size_t first = world.functions.size();
    world.projects.push_back(project);

    // Calls only go from earlier to later positions of a random order, so
    // the call graph is acyclic.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> callees(n);
    for (std::size_t k = 0; k < n; ++k) {
      auto& out = callees[order[k]];
      if (config.fcg_shape == FcgShape::kChain) {
        if (k + 1 < n) out.push_back(order[k + 1]);
        continue;
      }
      for (std::size_t m = k + 1; m < n && out.size() < config.max_callees; ++m) {
        if (Bernoulli(rng, config.call_density)) out.push_back(order[m]);
      }
    }

    std::vector<std::string> names(n);
    for (std::size_t i = 0; i < n; ++i) names[i] = project + Format("_f%03zu", i);

    std::uint32_t line = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % kFunctionsPerFile == 0) line = 1;
      const std::string file =
          project + "/src/mod" + std::to_string(i / kFunctionsPerFile) + ".c";
      const std::string id = SourceFunctionId(file, names[i]);
      std::sort(callees[i].begin(), callees[i].end());
      std::vector<std::string> callee_names;
      for (std::size_t c : callees[i]) callee_names.push_back(names[c]);

      GeneratedFunction fn =
          GenFunction(names[i], id, line, callee_names, alphabet, style_pool, config, rng);
      const auto last_line = static_cast<std::uint32_t>(line + fn.line_count - 1);
      world.functions.push_back({file, names[i], line, last_line});
      world.function_ids.push_back(id);
      world.function_project.push_back(p);
      world.base.push_back(std::move(fn.cfg));
      world.base_provenance.push_back(std::move(fn.provenance));
      line = last_line + 2;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> global;
      for (std::size_t c : callees[i]) global.push_back(first + c);
      world.callees.push_back(std::move(global));
    }
    world.topo_rank.resize(first + n);
    for (std::size_t k = 0; k < n; ++k) world.topo_rank[first + order[k]] = k;
  }

  for (std::size_t f = 0; f < world.callees.size(); ++f) {
    for (std::size_t g : world.callees[f]) {
      world.fcg.push_back({world.function_ids[f], world.function_ids[g]});
    }
  }
  return world;
}

InlineResult InlineTransform(const AttributedCfg& caller,
                             const Provenance& caller_provenance,
                             const AttributedCfg& callee,
                             const Provenance& callee_provenance,
                             NodeId call_site) {
  const BasicBlock* site = caller.find(call_site);
  if (site == nullptr) {
    throw Error(ErrorCode::kSiteNotFound, "caller " + caller.function_name() +
                                              " has no block " + std::to_string(call_site));
  }
  if (!IsCallTo(*site, callee.function_name())) {
    throw Error(ErrorCode::kSiteNotFound, "block " + std::to_string(call_site) + " of " +
                                              caller.function_name() + " does not call " +
                                              callee.function_name());
  }
  if (site->instructions.size() < 2) {
    throw Error(ErrorCode::kSiteNotFound,
                "call site " + std::to_string(call_site) + " has no code before the call");
  }
  if (callee.nodes().empty()) {
    throw Error(ErrorCode::kInvalidArgument, "callee has no blocks");
  }

  const NodeId offset = caller.nodes().back().id + 1 - callee.nodes().front().id;
  std::uint64_t base = 0;
  bool have_base = false;
  for (const BasicBlock& block : caller.nodes()) {
    for (const Instruction& insn : block.instructions) {
      base = have_base ? std::min(base, insn.address) : insn.address;
      have_base = true;
    }
  }

  RawFunction raw;
  raw.name = caller.function_name();
  raw.entry = caller.entry();
  Provenance provenance;
  for (const BasicBlock& block : caller.nodes()) {
    BasicBlock copy = block;
    std::vector<InstrOrigin> origins = OriginsOf(caller_provenance, block);
    if (block.id == call_site) {
      copy.instructions.pop_back();
      origins.pop_back();
    }
    provenance[copy.id] = std::move(origins);
    raw.blocks.push_back(std::move(copy));
  }
  std::set<NodeId> has_successor;
  for (const auto& [from, to] : callee.edges()) has_successor.insert(from);
  for (const BasicBlock& block : callee.nodes()) {
    BasicBlock copy = block;
    copy.id += offset;
    provenance[copy.id] = OriginsOf(callee_provenance, block);
    raw.blocks.push_back(std::move(copy));
  }

  std::vector<NodeId> continuation;
  for (const auto& [from, to] : caller.edges()) {
    if (from == call_site) {
      continuation.push_back(to);
    } else {
      raw.edges.emplace_back(from, to);
    }
  }
  raw.edges.emplace_back(call_site, callee.entry() + offset);
  for (const auto& [from, to] : callee.edges()) {
    raw.edges.emplace_back(from + offset, to + offset);
  }
  for (const BasicBlock& block : callee.nodes()) {
    if (has_successor.contains(block.id)) continue;
    for (NodeId next : continuation) raw.edges.emplace_back(block.id + offset, next);
  }

  AssignAddresses(raw, base);
  InlineResult result{BuildAcfg(std::move(raw)), std::move(provenance)};
  if (result.cfg.dropped_nodes() > 0) {
    std::erase_if(result.provenance, [&](const auto& kv) {
      return result.cfg.find(kv.first) == nullptr;
    });
  }
  return result;
}

InlineResult InlineTransform(const AttributedCfg& caller, const AttributedCfg& callee,
                             NodeId call_site) {
  return InlineTransform(caller, OwnProvenance(caller), callee, OwnProvenance(callee),
                         call_site);
}

SynthCorpus ApplyInliningPolicy(const SourceWorld& world, const SynthConfig& config) {
  config.Validate();
  const std::size_t n = world.base.size();
  std::map<std::string, std::size_t> by_name;
  for (std::size_t f = 0; f < n; ++f) by_name[world.base[f].function_name()] = f;

  SynthCorpus corpus;
  corpus.config = config;
  corpus.projects = world.projects;
  corpus.source_functions = world.functions;
  corpus.fcg = world.fcg;

  // Callees come later in the topological order, so visiting functions by
  // descending rank finalizes every callee before its callers.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return world.topo_rank[a] > world.topo_rank[b];
  });

  std::vector<AttributedCfg> inlined = world.base;
  std::vector<Provenance> inlined_provenance = world.base_provenance;
  for (std::size_t f : order) {
    std::mt19937_64 rng(MixSeed(config.seed, {kInlineStream, f}));
    for (const BasicBlock& block : world.base[f].nodes()) {
      if (block.instructions.empty() || block.instructions.back().opcode != kCallOpcode) {
        continue;
      }
      const std::size_t g = by_name.at(block.instructions.back().operands.at(0));
      const bool chosen = Bernoulli(rng, config.inline_probability);
      if (!chosen || inlined[g].instruction_count() > config.inline_budget) continue;
      InlineResult r = InlineTransform(inlined[f], inlined_provenance[f], inlined[g],
                                       inlined_provenance[g], block.id);
      inlined[f] = std::move(r.cfg);
      inlined_provenance[f] = std::move(r.provenance);
      ++corpus.inlined_call_sites;
    }
  }

  if (config.mutation_rate > 0.0) {
    const std::vector<std::string> alphabet = Alphabet(config.alphabet_size);
    for (std::size_t f = 0; f < n; ++f) {
      std::mt19937_64 rng(MixSeed(config.seed, {kMutationStream, f}));
      inlined[f] = Mutate(inlined[f], config.mutation_rate, alphabet, rng);
    }
  }

  corpus.no_inline.name = std::string(kNoInliningDataset);
  corpus.inlining.name = std::string(kInliningDataset);
  EmitDataset(corpus.no_inline, world, world.base, world.base_provenance);
  EmitDataset(corpus.inlining, world, inlined, inlined_provenance);
  corpus.ground_truth = GroundTruth(world, corpus.no_inline, corpus.inlining);

  if (config.inline_probability > 0.0 && config.require_all_patterns) {
    const PatternCounts counts = PatternDistribution(corpus.ground_truth);
    if (counts.leaf == 0 || counts.root == 0 || counts.internal == 0) {
      throw Error(ErrorCode::kPatternStarvation,
                  "generated corpus lacks a cross-inlining pattern (leaf=" +
                      std::to_string(counts.leaf) + " root=" + std::to_string(counts.root) +
                      " internal=" + std::to_string(counts.internal) + ")");
    }
  }
  return corpus;
}

SynthCorpus GenerateCorpus(const SynthConfig& config) {
  return ApplyInliningPolicy(GenSourceWorld(config), config);
}

void WriteCorpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  const PatternCounts counts = PatternDistribution(corpus.ground_truth);
  json manifest = {
      {"format", "cidetect-synth"},
      {"version", 1},
      {"seed", corpus.config.seed},
      {"config", json::parse(SynthConfigToJson(corpus.config))},
      {"projects", corpus.projects},
      {"source_functions", corpus.source_functions.size()},
      {"fcg_edges", corpus.fcg.size()},
      {"inlined_call_sites", corpus.inlined_call_sites},
      {"patterns",
       {{"equal", counts.equal},
        {"leaf", counts.leaf},
        {"root", counts.root},
        {"internal", counts.internal}}},
  };
  WriteTextFile(dir / "manifest.json", manifest.dump(1) + "\n");
  WriteSrcFuncs(dir / "srcfuncs.tsv", corpus.source_functions);
  WriteFcg(dir / "fcg.tsv", corpus.fcg);
  WriteTextFile(dir / "ground_truth.json", BridgeIndexToJson(corpus.ground_truth));
  for (const SyntheticDataset* ds : {&corpus.no_inline, &corpus.inlining}) {
    const std::filesystem::path sub = dir / ds->name;
    WriteAddr2Line(sub / "addr2line.tsv", ds->addr2line);
    WriteBinFuncs(sub / "binfuncs.tsv", ds->binfuncs);
    for (const auto& [binary, functions] : ds->binaries) {
      WriteFunctionsJsonl(sub / "graphs" / (binary + ".jsonl"), functions);
    }
  }
}

}  // namespace cidetect
