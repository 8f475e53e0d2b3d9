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

// Binary-to-source function mappings and the cross-inlining bridge index.
//
// A binary function whose code maps back to more than one source function
// contains inlined code. A source function `b` that is mapped alone by a
// function of the no-inlining build (the "equal" side) and together with
// others by a function of the inlining build links the two into a
// cross-inlining pair; `b` is the bridge. The pattern of such a pair is the
// position of `b` in the call graph induced on the target's source set.

#ifndef CIDETECT_LABELING_H_
#define CIDETECT_LABELING_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cidetect/tables.h"

namespace cidetect {

inline constexpr std::string_view kNoInliningDataset = "noinline";
inline constexpr std::string_view kInliningDataset = "inline";

// Source functions are identified by "<file>:<name>".
std::string SourceFunctionId(std::string_view file, std::string_view name);

struct BinaryFunctionRef {
  std::string dataset;
  std::string binary_id;
  std::string func_name;

  friend auto operator<=>(const BinaryFunctionRef&,
                          const BinaryFunctionRef&) = default;
  friend bool operator==(const BinaryFunctionRef&,
                         const BinaryFunctionRef&) = default;
};

std::string ToString(const BinaryFunctionRef& ref);

struct Binary2SourceMapping {
  BinaryFunctionRef function;
  std::uint64_t addr_start = 0;
  std::uint64_t addr_end = 0;
  std::set<std::string> source_functions;

  friend bool operator==(const Binary2SourceMapping&,
                         const Binary2SourceMapping&) = default;
};

struct TableIssue {
  enum class Kind {
    kAddressOutsideFunctions,
    kLineOutsideFunctions,
    kUnmappedFunction,
  };
  Kind kind;
  std::string binary_id;
  std::uint64_t address = 0;
  std::string file;
  std::uint32_t line = 0;
};

struct MappingResult {
  // Sorted by function ref. Functions without any mapped line are omitted and
  // reported as kUnmappedFunction.
  std::vector<Binary2SourceMapping> mappings;
  // Bad records are reported here and skipped.
  std::vector<TableIssue> issues;
};

MappingResult ConstructMapping(std::string_view dataset,
                               std::span<const Addr2LineRow> addr_to_line,
                               std::span<const BinFuncRow> addr_to_binfunc,
                               std::span<const SrcFuncRow> line_to_srcfunc);

inline bool HasInlining(const Binary2SourceMapping& m) {
  return m.source_functions.size() > 1;
}

// Source-level call graph with direct-recursion edges removed.
class SourceFcg {
 public:
  SourceFcg() = default;
  explicit SourceFcg(std::span<const FcgRow> rows);

  bool HasEdge(const std::string& caller, const std::string& callee) const;
  const std::set<std::string>& Callees(const std::string& caller) const;
  const std::set<std::string>& Callers(const std::string& callee) const;
  std::size_t edge_count() const { return edge_count_; }
  std::size_t self_loops_removed() const { return self_loops_removed_; }

 private:
  std::map<std::string, std::set<std::string>> callees_;
  std::map<std::string, std::set<std::string>> callers_;
  std::size_t edge_count_ = 0;
  std::size_t self_loops_removed_ = 0;
};

enum class Pattern { kEqual, kLeaf, kRoot, kInternal };

inline constexpr Pattern kCrossInliningPatterns[] = {
    Pattern::kLeaf, Pattern::kRoot, Pattern::kInternal};

std::string_view PatternName(Pattern p);  // "equal", "leaf", ...
std::optional<Pattern> ParsePattern(std::string_view name);

struct InducedDegree {
  std::size_t in = 0;
  std::size_t out = 0;
};

// Degrees of `bridge` in the subgraph of `fcg` induced on `mapped_set`.
InducedDegree BridgeDegree(const std::string& bridge,
                           const std::set<std::string>& mapped_set,
                           const SourceFcg& fcg);

// Equal for a singleton set; otherwise Leaf when the bridge calls nothing in
// the set (this includes an isolated bridge), Root when nothing in the set
// calls it, Internal when both. Throws Error(kInvalidArgument) when the
// bridge is not in the set.
Pattern ClassifyPattern(const std::string& bridge,
                        const std::set<std::string>& mapped_set,
                        const SourceFcg& fcg);

struct CrossInliningEntry {
  BinaryFunctionRef target;
  Pattern pattern = Pattern::kLeaf;

  friend auto operator<=>(const CrossInliningEntry&,
                          const CrossInliningEntry&) = default;
  friend bool operator==(const CrossInliningEntry&,
                         const CrossInliningEntry&) = default;
};

struct BridgeEntry {
  std::vector<BinaryFunctionRef> equal;                 // sorted
  std::vector<CrossInliningEntry> cross_inlining;       // sorted

  friend bool operator==(const BridgeEntry&, const BridgeEntry&) = default;
};

struct BridgeIndex {
  std::map<std::string, BridgeEntry> bridges;

  // Keeps only refs whose binary_id is in `binaries`; drops bridges left
  // without equal entries.
  BridgeIndex Restricted(const std::set<std::string>& binaries) const;

  friend bool operator==(const BridgeIndex&, const BridgeIndex&) = default;
};

struct LabelingDiagnostics {
  // Bridges with no call edge inside a multi-function target set; classified
  // Leaf.
  std::size_t isolated_bridges = 0;
  // No-inlining functions that still map to several source functions.
  std::size_t excluded_inlined_queries = 0;
  // Inlining-side functions mapping to a single source function.
  std::size_t equal_targets_skipped = 0;
  std::size_t self_loops_removed = 0;
};

struct BridgeIndexResult {
  BridgeIndex index;
  LabelingDiagnostics diagnostics;
};

// Only source functions with at least one equal entry become bridges.
BridgeIndexResult BuildBridgeIndex(
    std::span<const Binary2SourceMapping> no_inline_mappings,
    std::span<const Binary2SourceMapping> inline_mappings,
    const SourceFcg& fcg);

struct PatternCounts {
  std::size_t equal = 0;
  std::size_t leaf = 0;
  std::size_t root = 0;
  std::size_t internal = 0;

  std::size_t of(Pattern p) const;
  std::size_t total() const { return equal + leaf + root + internal; }
  friend bool operator==(const PatternCounts&, const PatternCounts&) = default;
};

PatternCounts PatternDistribution(const BridgeIndex& index);

std::string BridgeIndexToJson(const BridgeIndex& index);
BridgeIndex BridgeIndexFromJson(std::string_view text);

}  // namespace cidetect

#endif  // CIDETECT_LABELING_H_
