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

// Loading a corpus directory (the layout written by WriteCorpus, or the same
// files produced by an external disassembler and debug-info dump): labeling
// from the tables, graph catalog from the JSONL files, and featurized graphs
// for pairs.

#ifndef CIDETECT_CORPUS_H_
#define CIDETECT_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cidetect/acfg.h"
#include "cidetect/gnn.h"
#include "cidetect/labeling.h"
#include "cidetect/pairgen.h"

namespace cidetect {

struct LabeledCorpus {
  MappingResult no_inline;
  MappingResult inlining;
  BridgeIndexResult bridges;
  // Binary ids found in either binfuncs table, sorted.
  std::vector<std::string> projects;
};

// Reads srcfuncs.tsv, fcg.tsv and <dataset>/{addr2line,binfuncs}.tsv and
// builds the bridge index. Throws Error(kIo) for missing files and
// Error(kEmptyCorpus) when the tables map no function at all.
LabeledCorpus LabelCorpusDir(const std::filesystem::path& dir);

using GraphCatalog = std::map<BinaryFunctionRef, std::shared_ptr<const AttributedCfg>>;

// Loads <dataset>/graphs/<binary_id>.jsonl for both datasets. Graphs are
// stored with their function names stripped; the catalog key keeps the name.
GraphCatalog LoadGraphCatalog(const std::filesystem::path& dir);

// Graphs of the given projects (both datasets), for vocabulary building.
std::vector<AttributedCfg> CatalogGraphs(const GraphCatalog& catalog,
                                         const std::set<std::string>& projects);

// Throws Error(kInvalidArgument) when a ref is not in the catalog.
FunctionPair ResolveFunctionPair(const PairRecord& pair, const GraphCatalog& catalog);

// Featurized graphs, prepared once and shared by training and evaluation.
class GraphStore {
 public:
  GraphStore(const GraphCatalog& catalog, const OpcodeVocabulary& vocab,
             std::size_t max_nodes);

  // Throws Error(kInvalidArgument) for unknown refs.
  const GraphInput& at(const BinaryFunctionRef& ref) const;
  std::size_t size() const { return graphs_.size(); }

 private:
  std::map<BinaryFunctionRef, GraphInput> graphs_;
};

// The returned pairs point into `store`.
std::vector<GraphPair> ResolvePairs(std::span<const PairRecord> pairs,
                                    const GraphStore& store);

}  // namespace cidetect

#endif  // CIDETECT_CORPUS_H_
