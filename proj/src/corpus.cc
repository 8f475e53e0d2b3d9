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

#include "cidetect/corpus.h"

#include <algorithm>
#include <set>

#include "cidetect/error.h"
#include "cidetect/exchange.h"
#include "cidetect/tables.h"

namespace cidetect {
namespace {

constexpr std::string_view kDatasets[] = {kNoInliningDataset, kInliningDataset};

void RequireFile(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "missing corpus file " + path.string());
  }
}

}  // namespace

LabeledCorpus LabelCorpusDir(const std::filesystem::path& dir) {
  const auto srcfuncs_path = dir / "srcfuncs.tsv";
  const auto fcg_path = dir / "fcg.tsv";
  RequireFile(srcfuncs_path);
  RequireFile(fcg_path);
  const std::vector<SrcFuncRow> srcfuncs = ReadSrcFuncs(srcfuncs_path);
  const std::vector<FcgRow> fcg_rows = ReadFcg(fcg_path);

  LabeledCorpus out;
  std::set<std::string> projects;
  for (std::string_view dataset : kDatasets) {
    const auto sub = dir / std::string(dataset);
    RequireFile(sub / "addr2line.tsv");
    RequireFile(sub / "binfuncs.tsv");
    const auto a2l = ReadAddr2Line(sub / "addr2line.tsv");
    const auto binfuncs = ReadBinFuncs(sub / "binfuncs.tsv");
    for (const BinFuncRow& row : binfuncs) projects.insert(row.binary_id);
    MappingResult m = ConstructMapping(dataset, a2l, binfuncs, srcfuncs);
    (dataset == kNoInliningDataset ? out.no_inline : out.inlining) = std::move(m);
  }
  if (out.no_inline.mappings.empty() && out.inlining.mappings.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no binary function maps to source in " +
                                             dir.string());
  }
  out.projects.assign(projects.begin(), projects.end());
  out.bridges = BuildBridgeIndex(out.no_inline.mappings, out.inlining.mappings,
                                 SourceFcg(fcg_rows));
  return out;
}

GraphCatalog LoadGraphCatalog(const std::filesystem::path& dir) {
  GraphCatalog catalog;
  for (std::string_view dataset : kDatasets) {
    const auto graphs_dir = dir / std::string(dataset) / "graphs";
    if (!std::filesystem::is_directory(graphs_dir)) {
      throw Error(ErrorCode::kIo, "missing graph directory " + graphs_dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(graphs_dir)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string binary = file.stem().string();
      for (AttributedCfg& cfg : ReadAcfgsJsonl(file)) {
        BinaryFunctionRef ref{std::string(dataset), binary, cfg.function_name()};
        catalog[std::move(ref)] = std::make_shared<const AttributedCfg>(cfg.stripped());
      }
    }
  }
  return catalog;
}

std::vector<AttributedCfg> CatalogGraphs(const GraphCatalog& catalog,
                                         const std::set<std::string>& projects) {
  std::vector<AttributedCfg> out;
  for (const auto& [ref, cfg] : catalog) {
    if (projects.contains(ref.binary_id)) out.push_back(*cfg);
  }
  return out;
}

FunctionPair ResolveFunctionPair(const PairRecord& pair, const GraphCatalog& catalog) {
  auto lookup = [&](const BinaryFunctionRef& ref) {
    auto it = catalog.find(ref);
    if (it == catalog.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no graph for " + ToString(ref));
    }
    return it->second;
  };
  return {lookup(pair.query), lookup(pair.target), pair.label, pair.pattern, pair.bridge};
}

GraphStore::GraphStore(const GraphCatalog& catalog, const OpcodeVocabulary& vocab,
                       std::size_t max_nodes) {
  for (const auto& [ref, cfg] : catalog) {
    graphs_.emplace(ref, PrepareGraph(*cfg, vocab, max_nodes));
  }
}

const GraphInput& GraphStore::at(const BinaryFunctionRef& ref) const {
  auto it = graphs_.find(ref);
  if (it == graphs_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no graph for " + ToString(ref));
  }
  return it->second;
}

std::vector<GraphPair> ResolvePairs(std::span<const PairRecord> pairs,
                                    const GraphStore& store) {
  std::vector<GraphPair> out;
  out.reserve(pairs.size());
  for (const PairRecord& p : pairs) {
    out.push_back({&store.at(p.query), &store.at(p.target), p.label, p.pattern});
  }
  return out;
}

}  // namespace cidetect
