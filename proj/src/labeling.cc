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

#include <algorithm>
#include <tuple>
#include <unordered_map>

#include "cidetect/error.h"
#include "json.hpp"

namespace cidetect {
namespace {

using nlohmann::json;

const std::set<std::string>& EmptySet() {
  static const std::set<std::string> kEmpty;
  return kEmpty;
}

// Interval lookup over rows sorted by start: index of the row whose
// [start, end] range contains `key`, or npos.
template <typename Row, typename StartFn, typename ContainsFn>
std::size_t FindContaining(const std::vector<const Row*>& sorted,
                           std::uint64_t key, StartFn start,
                           ContainsFn contains) {
  auto it = std::upper_bound(
      sorted.begin(), sorted.end(), key,
      [&](std::uint64_t k, const Row* r) { return k < start(*r); });
  if (it == sorted.begin()) return static_cast<std::size_t>(-1);
  --it;
  if (!contains(**it, key)) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - sorted.begin());
}

json RefToJson(const BinaryFunctionRef& ref) {
  return json::array({ref.dataset, ref.binary_id, ref.func_name});
}

BinaryFunctionRef RefFromJson(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kParse, "function ref must be [dataset, binary, func]");
  }
  return {j[0].get<std::string>(), j[1].get<std::string>(),
          j[2].get<std::string>()};
}

}  // namespace

std::string SourceFunctionId(std::string_view file, std::string_view name) {
  std::string id(file);
  id += ':';
  id += name;
  return id;
}

std::string ToString(const BinaryFunctionRef& ref) {
  return ref.dataset + "/" + ref.binary_id + "/" + ref.func_name;
}

MappingResult ConstructMapping(std::string_view dataset,
                               std::span<const Addr2LineRow> addr_to_line,
                               std::span<const BinFuncRow> addr_to_binfunc,
                               std::span<const SrcFuncRow> line_to_srcfunc) {
  std::map<std::string, std::vector<const BinFuncRow*>> funcs_by_binary;
  for (const BinFuncRow& r : addr_to_binfunc) {
    funcs_by_binary[r.binary_id].push_back(&r);
  }
  for (auto& [id, rows] : funcs_by_binary) {
    std::sort(rows.begin(), rows.end(),
              [](const BinFuncRow* a, const BinFuncRow* b) {
                return a->addr_start < b->addr_start;
              });
  }
  std::map<std::string, std::vector<const SrcFuncRow*>> srcs_by_file;
  for (const SrcFuncRow& r : line_to_srcfunc) srcs_by_file[r.file].push_back(&r);
  for (auto& [file, rows] : srcs_by_file) {
    std::sort(rows.begin(), rows.end(),
              [](const SrcFuncRow* a, const SrcFuncRow* b) {
                return a->line_start < b->line_start;
              });
  }

  std::unordered_map<const BinFuncRow*, std::set<std::string>> sources;
  MappingResult result;
  for (const Addr2LineRow& row : addr_to_line) {
    auto fit = funcs_by_binary.find(row.binary_id);
    std::size_t fi = static_cast<std::size_t>(-1);
    if (fit != funcs_by_binary.end()) {
      fi = FindContaining<BinFuncRow>(
          fit->second, row.address,
          [](const BinFuncRow& r) { return r.addr_start; },
          [](const BinFuncRow& r, std::uint64_t a) {
            return a >= r.addr_start && a < r.addr_end;
          });
    }
    if (fi == static_cast<std::size_t>(-1)) {
      result.issues.push_back({TableIssue::Kind::kAddressOutsideFunctions,
                               row.binary_id, row.address, row.file, row.line});
      continue;
    }
    auto sit = srcs_by_file.find(row.file);
    std::size_t si = static_cast<std::size_t>(-1);
    if (sit != srcs_by_file.end()) {
      si = FindContaining<SrcFuncRow>(
          sit->second, row.line,
          [](const SrcFuncRow& r) { return std::uint64_t{r.line_start}; },
          [](const SrcFuncRow& r, std::uint64_t l) {
            return l >= r.line_start && l <= r.line_end;
          });
    }
    if (si == static_cast<std::size_t>(-1)) {
      result.issues.push_back({TableIssue::Kind::kLineOutsideFunctions,
                               row.binary_id, row.address, row.file, row.line});
      continue;
    }
    const SrcFuncRow& src = *sit->second[si];
    sources[fit->second[fi]].insert(SourceFunctionId(src.file, src.func_name));
  }

  for (const BinFuncRow& r : addr_to_binfunc) {
    auto it = sources.find(&r);
    if (it == sources.end()) {
      result.issues.push_back({TableIssue::Kind::kUnmappedFunction, r.binary_id,
                               r.addr_start, "", 0});
      continue;
    }
    Binary2SourceMapping m;
    m.function = {std::string(dataset), r.binary_id, r.func_name};
    m.addr_start = r.addr_start;
    m.addr_end = r.addr_end;
    m.source_functions = std::move(it->second);
    result.mappings.push_back(std::move(m));
  }
  std::sort(result.mappings.begin(), result.mappings.end(),
            [](const Binary2SourceMapping& a, const Binary2SourceMapping& b) {
              return std::tie(a.function, a.addr_start) <
                     std::tie(b.function, b.addr_start);
            });
  return result;
}

SourceFcg::SourceFcg(std::span<const FcgRow> rows) {
  for (const FcgRow& r : rows) {
    if (r.caller == r.callee) {
      ++self_loops_removed_;
      continue;
    }
    if (callees_[r.caller].insert(r.callee).second) {
      callers_[r.callee].insert(r.caller);
      ++edge_count_;
    }
  }
}

bool SourceFcg::HasEdge(const std::string& caller,
                        const std::string& callee) const {
  auto it = callees_.find(caller);
  return it != callees_.end() && it->second.contains(callee);
}

const std::set<std::string>& SourceFcg::Callees(const std::string& caller) const {
  auto it = callees_.find(caller);
  return it == callees_.end() ? EmptySet() : it->second;
}

const std::set<std::string>& SourceFcg::Callers(const std::string& callee) const {
  auto it = callers_.find(callee);
  return it == callers_.end() ? EmptySet() : it->second;
}

std::string_view PatternName(Pattern p) {
  switch (p) {
    case Pattern::kEqual: return "equal";
    case Pattern::kLeaf: return "leaf";
    case Pattern::kRoot: return "root";
    case Pattern::kInternal: return "internal";
  }
  return "unknown";
}

std::optional<Pattern> ParsePattern(std::string_view name) {
  for (Pattern p : {Pattern::kEqual, Pattern::kLeaf, Pattern::kRoot,
                    Pattern::kInternal}) {
    if (PatternName(p) == name) return p;
  }
  return std::nullopt;
}

InducedDegree BridgeDegree(const std::string& bridge,
                           const std::set<std::string>& mapped_set,
                           const SourceFcg& fcg) {
  InducedDegree d;
  for (const std::string& callee : fcg.Callees(bridge)) {
    if (mapped_set.contains(callee)) ++d.out;
  }
  for (const std::string& caller : fcg.Callers(bridge)) {
    if (mapped_set.contains(caller)) ++d.in;
  }
  return d;
}

Pattern ClassifyPattern(const std::string& bridge,
                        const std::set<std::string>& mapped_set,
                        const SourceFcg& fcg) {
  if (!mapped_set.contains(bridge)) {
    throw Error(ErrorCode::kInvalidArgument,
                "bridge '" + bridge + "' is not in the mapped set");
  }
  if (mapped_set.size() == 1) return Pattern::kEqual;
  InducedDegree d = BridgeDegree(bridge, mapped_set, fcg);
  if (d.out == 0) return Pattern::kLeaf;
  if (d.in == 0) return Pattern::kRoot;
  return Pattern::kInternal;
}

BridgeIndex BridgeIndex::Restricted(const std::set<std::string>& binaries) const {
  BridgeIndex out;
  for (const auto& [bridge, entry] : bridges) {
    BridgeEntry kept;
    for (const BinaryFunctionRef& r : entry.equal) {
      if (binaries.contains(r.binary_id)) kept.equal.push_back(r);
    }
    if (kept.equal.empty()) continue;
    for (const CrossInliningEntry& c : entry.cross_inlining) {
      if (binaries.contains(c.target.binary_id)) kept.cross_inlining.push_back(c);
    }
    out.bridges.emplace(bridge, std::move(kept));
  }
  return out;
}

BridgeIndexResult BuildBridgeIndex(
    std::span<const Binary2SourceMapping> no_inline_mappings,
    std::span<const Binary2SourceMapping> inline_mappings,
    const SourceFcg& fcg) {
  BridgeIndexResult result;
  result.diagnostics.self_loops_removed = fcg.self_loops_removed();
  BridgeIndex& index = result.index;

  for (const Binary2SourceMapping& m : no_inline_mappings) {
    if (HasInlining(m)) {
      // Residual forced inlining in the no-inlining build.
      ++result.diagnostics.excluded_inlined_queries;
      continue;
    }
    index.bridges[*m.source_functions.begin()].equal.push_back(m.function);
  }

  for (const Binary2SourceMapping& m : inline_mappings) {
    if (!HasInlining(m)) {
      ++result.diagnostics.equal_targets_skipped;
      continue;
    }
    for (const std::string& src : m.source_functions) {
      auto it = index.bridges.find(src);
      if (it == index.bridges.end()) continue;
      InducedDegree d = BridgeDegree(src, m.source_functions, fcg);
      if (d.in == 0 && d.out == 0) ++result.diagnostics.isolated_bridges;
      it->second.cross_inlining.push_back(
          {m.function, ClassifyPattern(src, m.source_functions, fcg)});
    }
  }

  for (auto& [bridge, entry] : index.bridges) {
    std::sort(entry.equal.begin(), entry.equal.end());
    entry.equal.erase(std::unique(entry.equal.begin(), entry.equal.end()),
                      entry.equal.end());
    std::sort(entry.cross_inlining.begin(), entry.cross_inlining.end());
    entry.cross_inlining.erase(
        std::unique(entry.cross_inlining.begin(), entry.cross_inlining.end()),
        entry.cross_inlining.end());
  }
  return result;
}

std::size_t PatternCounts::of(Pattern p) const {
  switch (p) {
    case Pattern::kEqual: return equal;
    case Pattern::kLeaf: return leaf;
    case Pattern::kRoot: return root;
    case Pattern::kInternal: return internal;
  }
  return 0;
}

PatternCounts PatternDistribution(const BridgeIndex& index) {
  PatternCounts c;
  for (const auto& [bridge, entry] : index.bridges) {
    c.equal += entry.equal.size();
    for (const CrossInliningEntry& x : entry.cross_inlining) {
      switch (x.pattern) {
        case Pattern::kEqual: ++c.equal; break;
        case Pattern::kLeaf: ++c.leaf; break;
        case Pattern::kRoot: ++c.root; break;
        case Pattern::kInternal: ++c.internal; break;
      }
    }
  }
  return c;
}

std::string BridgeIndexToJson(const BridgeIndex& index) {
  json bridges = json::object();
  for (const auto& [bridge, entry] : index.bridges) {
    json equal = json::array();
    for (const BinaryFunctionRef& r : entry.equal) equal.push_back(RefToJson(r));
    json cross = json::array();
    for (const CrossInliningEntry& c : entry.cross_inlining) {
      cross.push_back({{"target", RefToJson(c.target)},
                       {"pattern", std::string(PatternName(c.pattern))}});
    }
    bridges[bridge] = {{"equal", std::move(equal)},
                       {"cross_inlining", std::move(cross)}};
  }
  return json{{"bridges", std::move(bridges)}}.dump(1) + "\n";
}

BridgeIndex BridgeIndexFromJson(std::string_view text) {
  BridgeIndex index;
  try {
    json root = json::parse(text);
    for (const auto& [bridge, entry] : root.at("bridges").items()) {
      BridgeEntry e;
      for (const json& r : entry.at("equal")) e.equal.push_back(RefFromJson(r));
      for (const json& c : entry.at("cross_inlining")) {
        std::optional<Pattern> p = ParsePattern(c.at("pattern").get<std::string>());
        if (!p) throw Error(ErrorCode::kParse, "unknown pattern");
        e.cross_inlining.push_back({RefFromJson(c.at("target")), *p});
      }
      index.bridges.emplace(bridge, std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return index;
}

}  // namespace cidetect
