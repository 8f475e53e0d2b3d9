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

// Labeled cross-inlining pairs drawn from a bridge index, and project-level
// train/validation/test splits.

#ifndef CIDETECT_PAIRGEN_H_
#define CIDETECT_PAIRGEN_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cidetect/acfg.h"
#include "cidetect/gnn.h"
#include "cidetect/labeling.h"

namespace cidetect {

// Pair expressed by function references; this is what the pairs file holds.
struct PairRecord {
  BinaryFunctionRef query;   // no-inlining side
  BinaryFunctionRef target;  // inlining side
  int label = 1;             // +1 or -1
  Pattern pattern = Pattern::kLeaf;
  std::optional<std::string> bridge;  // set for positives only

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

// `pattern` == nullopt draws from every cross-inlining pattern (the mixed
// model's stream). Sampling is with replacement and deterministic in `seed`.
// Positives: a bridge supporting the pattern, then one of its equal
// functions and one of its cross-inlining targets with that pattern.
// Throws Error(kExhausted) if no bridge supports the pattern.
std::vector<PairRecord> GeneratePositivePairs(const BridgeIndex& index,
                                              std::optional<Pattern> pattern,
                                              std::size_t n, std::uint64_t seed);

// Negatives: an equal function of bridge b, and an inlining-side target
// (carrying the requested pattern under some bridge) that is not among b's
// cross-inlining targets. The pair is tagged with that target's pattern.
// Throws Error(kExhausted) for fewer than two bridges or when no valid
// combination exists.
std::vector<PairRecord> GenerateNegativePairs(const BridgeIndex& index,
                                              std::optional<Pattern> pattern,
                                              std::size_t n, std::uint64_t seed);

struct SplitSpec {
  std::set<std::string> train;
  std::set<std::string> validation;
  std::set<std::string> test;
};

inline constexpr std::array<double, 3> kDefaultSplitFractions = {0.8, 0.1, 0.1};

// Shuffles by seed, then floor-allocates validation and test counts; the
// remainder goes to train. Each part receives at least one project.
// Throws Error(kTooFewProjects) for fewer than three projects and
// Error(kInvalidArgument) when fractions do not sum to 1.
SplitSpec SplitProjects(std::span<const std::string> project_ids,
                        std::array<double, 3> fractions, std::uint64_t seed);

std::string SplitToJson(const SplitSpec& split);
SplitSpec SplitFromJson(std::string_view text);

// Pairs file: JSONL {query_ref, target_ref, label, pattern, bridge?} with
// refs written as [dataset_id, binary_id, func_id].
std::string PairToJsonLine(const PairRecord& pair);
PairRecord PairFromJsonLine(std::string_view line);
std::vector<PairRecord> ReadPairsFile(const std::filesystem::path& path);
void WritePairsFile(const std::filesystem::path& path,
                    std::span<const PairRecord> pairs);

// Pair with its graphs resolved. Graphs have their names stripped.
struct FunctionPair {
  std::shared_ptr<const AttributedCfg> query;
  std::shared_ptr<const AttributedCfg> target;
  int label = 1;
  Pattern pattern = Pattern::kLeaf;
  std::optional<std::string> bridge;
};

// Featurized pair consumed by training and evaluation. Non-owning.
struct GraphPair {
  const GraphInput* query = nullptr;
  const GraphInput* target = nullptr;
  int label = 1;
  Pattern pattern = Pattern::kLeaf;
};

}  // namespace cidetect

#endif  // CIDETECT_PAIRGEN_H_
