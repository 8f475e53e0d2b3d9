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

#include "cidetect/acfg.h"

#include <algorithm>
#include <map>
#include <set>

#include "cidetect/error.h"

namespace cidetect {
namespace {

std::string Lowercase(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

}  // namespace

std::size_t AttributedCfg::instruction_count() const {
  std::size_t n = 0;
  for (const BasicBlock& b : nodes_) n += b.instructions.size();
  return n;
}

std::ptrdiff_t AttributedCfg::index_of(NodeId id) const {
  auto it = std::lower_bound(
      nodes_.begin(), nodes_.end(), id,
      [](const BasicBlock& b, NodeId v) { return b.id < v; });
  if (it == nodes_.end() || it->id != id) return -1;
  return it - nodes_.begin();
}

const BasicBlock* AttributedCfg::find(NodeId id) const {
  std::ptrdiff_t i = index_of(id);
  return i < 0 ? nullptr : &nodes_[static_cast<std::size_t>(i)];
}

AttributedCfg AttributedCfg::stripped() const {
  AttributedCfg copy = *this;
  copy.function_name_.clear();
  return copy;
}

AttributedCfg BuildAcfg(RawFunction raw) {
  const std::string where =
      raw.name.empty() ? std::string("<anonymous>") : raw.name;
  if (raw.blocks.empty()) {
    throw Error(ErrorCode::kMalformedGraph, where + ": function has no blocks");
  }

  std::sort(raw.blocks.begin(), raw.blocks.end(),
            [](const BasicBlock& a, const BasicBlock& b) { return a.id < b.id; });
  std::set<std::uint64_t> addresses;
  for (std::size_t i = 0; i < raw.blocks.size(); ++i) {
    BasicBlock& block = raw.blocks[i];
    if (i > 0 && raw.blocks[i - 1].id == block.id) {
      throw Error(ErrorCode::kMalformedGraph,
                  where + ": duplicate block id " + std::to_string(block.id));
    }
    if (block.instructions.empty()) {
      throw Error(ErrorCode::kMalformedGraph,
                  where + ": block " + std::to_string(block.id) + " is empty");
    }
    for (std::size_t k = 0; k < block.instructions.size(); ++k) {
      Instruction& insn = block.instructions[k];
      if (insn.opcode.empty()) {
        throw Error(ErrorCode::kMalformedGraph,
                    where + ": empty opcode in block " +
                        std::to_string(block.id));
      }
      insn.opcode = Lowercase(std::move(insn.opcode));
      if (k > 0 && insn.address <= block.instructions[k - 1].address) {
        throw Error(ErrorCode::kMalformedGraph,
                    where + ": addresses not increasing in block " +
                        std::to_string(block.id));
      }
      if (!addresses.insert(insn.address).second) {
        throw Error(ErrorCode::kMalformedGraph,
                    where + ": duplicate instruction address " +
                        std::to_string(insn.address));
      }
    }
  }

  auto index = [&](NodeId id) -> std::ptrdiff_t {
    auto it = std::lower_bound(
        raw.blocks.begin(), raw.blocks.end(), id,
        [](const BasicBlock& b, NodeId v) { return b.id < v; });
    if (it == raw.blocks.end() || it->id != id) return -1;
    return it - raw.blocks.begin();
  };

  const std::ptrdiff_t entry_index = index(raw.entry);
  if (entry_index < 0) {
    throw Error(ErrorCode::kMalformedGraph,
                where + ": entry " + std::to_string(raw.entry) + " not found");
  }

  const std::size_t n = raw.blocks.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const Edge& e : raw.edges) {
    std::ptrdiff_t s = index(e.first);
    std::ptrdiff_t d = index(e.second);
    if (s < 0 || d < 0) {
      throw Error(ErrorCode::kMalformedGraph,
                  where + ": dangling edge " + std::to_string(e.first) +
                      "->" + std::to_string(e.second));
    }
    succ[static_cast<std::size_t>(s)].push_back(static_cast<std::size_t>(d));
  }

  std::vector<bool> reached(n, false);
  std::vector<std::size_t> stack{static_cast<std::size_t>(entry_index)};
  reached[static_cast<std::size_t>(entry_index)] = true;
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : succ[v]) {
      if (!reached[w]) {
        reached[w] = true;
        stack.push_back(w);
      }
    }
  }

  AttributedCfg cfg;
  cfg.function_name_ = std::move(raw.name);
  cfg.entry_ = raw.entry;
  for (std::size_t i = 0; i < n; ++i) {
    if (reached[i]) {
      cfg.nodes_.push_back(std::move(raw.blocks[i]));
    } else {
      ++cfg.dropped_nodes_;
    }
  }
  for (const Edge& e : raw.edges) {
    if (reached[static_cast<std::size_t>(index(e.first))]) {
      cfg.edges_.push_back(e);
    }
  }
  std::sort(cfg.edges_.begin(), cfg.edges_.end());
  cfg.edges_.erase(std::unique(cfg.edges_.begin(), cfg.edges_.end()),
                   cfg.edges_.end());
  return cfg;
}

RawFunction ToRaw(const AttributedCfg& cfg) {
  RawFunction raw;
  raw.name = cfg.function_name();
  raw.entry = cfg.entry();
  raw.blocks = cfg.nodes();
  raw.edges = cfg.edges();
  return raw;
}

OpcodeVocabulary::OpcodeVocabulary(std::vector<std::string> key_sequence)
    : keys_(std::move(key_sequence)) {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate vocabulary token '" + keys_[i] + "'");
    }
  }
}

std::size_t OpcodeVocabulary::slot(std::string_view opcode) const {
  auto it = index_.find(std::string(opcode));
  return it == index_.end() ? unk_index() : it->second;
}

OpcodeVocabulary BuildVocabulary(std::span<const AttributedCfg> corpus,
                                 std::size_t max_size) {
  if (max_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary max_size must be > 0");
  }
  std::map<std::string, std::size_t> counts;
  for (const AttributedCfg& cfg : corpus) {
    for (const BasicBlock& block : cfg.nodes()) {
      for (const Instruction& insn : block.instructions) ++counts[insn.opcode];
    }
  }
  if (counts.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no opcodes in vocabulary corpus");
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  // The map already orders tokens lexicographically; a stable sort on count
  // keeps that order among ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> keys;
  keys.reserve(ranked.size());
  for (auto& [token, count] : ranked) keys.push_back(token);
  return OpcodeVocabulary(std::move(keys));
}

NodeFeatureVector FeaturizeNode(const BasicBlock& block,
                                const OpcodeVocabulary& vocab) {
  NodeFeatureVector counts(vocab.feature_dim(), 0);
  for (const Instruction& insn : block.instructions) {
    ++counts[vocab.slot(insn.opcode)];
  }
  return counts;
}

}  // namespace cidetect
