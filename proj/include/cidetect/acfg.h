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

// Attributed control-flow graphs: basic blocks carrying opcode sequences,
// plus the bag-of-words featurization that turns each block into a count
// vector over a fixed opcode vocabulary.

#ifndef CIDETECT_ACFG_H_
#define CIDETECT_ACFG_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cidetect {

using NodeId = std::int64_t;

struct Instruction {
  std::uint64_t address = 0;
  std::string opcode;
  // Kept for ingestion fidelity; never used as a feature.
  std::vector<std::string> operands;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct BasicBlock {
  NodeId id = 0;
  std::vector<Instruction> instructions;

  friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

using Edge = std::pair<NodeId, NodeId>;

// A function record as it arrives from the exchange format, before any
// validation.
struct RawFunction {
  std::string name;
  NodeId entry = 0;
  std::vector<BasicBlock> blocks;
  std::vector<Edge> edges;
};

// Validated control-flow graph. Nodes are sorted by id, edges are sorted and
// unique, every node is reachable from the entry.
class AttributedCfg {
 public:
  AttributedCfg() = default;

  const std::string& function_name() const { return function_name_; }
  const std::vector<BasicBlock>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  NodeId entry() const { return entry_; }
  // Nodes removed during construction because the entry cannot reach them.
  std::size_t dropped_nodes() const { return dropped_nodes_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t instruction_count() const;
  // Position of `id` in nodes(), or -1.
  std::ptrdiff_t index_of(NodeId id) const;
  const BasicBlock* find(NodeId id) const;

  // Returns a copy with the function name cleared (stripped binaries).
  AttributedCfg stripped() const;

  friend bool operator==(const AttributedCfg& a, const AttributedCfg& b) {
    return a.function_name_ == b.function_name_ && a.entry_ == b.entry_ &&
           a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend AttributedCfg BuildAcfg(RawFunction raw);

  std::string function_name_;
  std::vector<BasicBlock> nodes_;
  std::vector<Edge> edges_;
  NodeId entry_ = 0;
  std::size_t dropped_nodes_ = 0;
};

// Validates and normalizes a raw function: lowercases opcodes, sorts nodes
// and edges, drops nodes unreachable from the entry. Throws
// Error(kMalformedGraph) on dangling edges, a missing entry, empty blocks,
// empty opcodes, duplicate node ids or non-increasing addresses.
AttributedCfg BuildAcfg(RawFunction raw);

// Inverse of BuildAcfg for a validated graph.
RawFunction ToRaw(const AttributedCfg& cfg);

class OpcodeVocabulary {
 public:
  OpcodeVocabulary() = default;
  explicit OpcodeVocabulary(std::vector<std::string> key_sequence);

  const std::vector<std::string>& key_sequence() const { return keys_; }
  std::size_t unk_index() const { return keys_.size(); }
  // Feature vector length, including the UNK slot.
  std::size_t feature_dim() const { return keys_.size() + 1; }
  // Slot for `opcode`; unk_index() for anything not in the key sequence.
  std::size_t slot(std::string_view opcode) const;

  friend bool operator==(const OpcodeVocabulary& a,
                         const OpcodeVocabulary& b) {
    return a.keys_ == b.keys_;
  }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::size_t kDefaultVocabularySize = 256;

// Top `max_size` opcodes by descending frequency, ties broken
// lexicographically. Throws Error(kEmptyCorpus) when no instructions exist.
OpcodeVocabulary BuildVocabulary(std::span<const AttributedCfg> corpus,
                                 std::size_t max_size = kDefaultVocabularySize);

using NodeFeatureVector = std::vector<std::uint32_t>;

NodeFeatureVector FeaturizeNode(const BasicBlock& block,
                                const OpcodeVocabulary& vocab);

}  // namespace cidetect

#endif  // CIDETECT_ACFG_H_
