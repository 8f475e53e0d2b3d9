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

#include "cidetect/pairgen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "cidetect/error.h"
#include "cidetect/exchange.h"
#include "json.hpp"

namespace cidetect {
namespace {

using nlohmann::json;

bool Matches(Pattern p, std::optional<Pattern> wanted) {
  return wanted ? p == *wanted : p != Pattern::kEqual;
}

std::string Describe(std::optional<Pattern> p) {
  return p ? std::string(PatternName(*p)) : std::string("mixed");
}

template <typename T>
const T& Pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, items.size() - 1);
  return items[dist(rng)];
}

json RefJson(const BinaryFunctionRef& r) {
  return json::array({r.dataset, r.binary_id, r.func_name});
}

BinaryFunctionRef RefFrom(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kParse, "ref must be [dataset, binary, func]");
  }
  return {j[0].get<std::string>(), j[1].get<std::string>(),
          j[2].get<std::string>()};
}

}  // namespace

std::vector<PairRecord> GeneratePositivePairs(const BridgeIndex& index,
                                              std::optional<Pattern> pattern,
                                              std::size_t n, std::uint64_t seed) {
  struct Candidate {
    const std::string* bridge;
    const BridgeEntry* entry;
    std::vector<const CrossInliningEntry*> targets;
  };
  std::vector<Candidate> candidates;
  for (const auto& [bridge, entry] : index.bridges) {
    if (entry.equal.empty()) continue;
    Candidate c{&bridge, &entry, {}};
    for (const CrossInliningEntry& x : entry.cross_inlining) {
      if (Matches(x.pattern, pattern)) c.targets.push_back(&x);
    }
    if (!c.targets.empty()) candidates.push_back(std::move(c));
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kExhausted,
                "no bridge supports pattern " + Describe(pattern));
  }

  std::mt19937_64 rng(seed);
  std::vector<PairRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Candidate& c = Pick(candidates, rng);
    const BinaryFunctionRef& query = Pick(c.entry->equal, rng);
    const CrossInliningEntry* target = Pick(c.targets, rng);
    out.push_back({query, target->target, 1, target->pattern, *c.bridge});
  }
  return out;
}

std::vector<PairRecord> GenerateNegativePairs(const BridgeIndex& index,
                                              std::optional<Pattern> pattern,
                                              std::size_t n, std::uint64_t seed) {
  if (index.bridges.size() < 2) {
    throw Error(ErrorCode::kExhausted, "negative pairs need at least two bridges");
  }

  // Distinct (target, pattern) entries carrying the requested pattern, and the
  // set of bridges each target contains.
  std::map<BinaryFunctionRef, std::set<std::string>> bridges_of_target;
  std::set<std::pair<BinaryFunctionRef, Pattern>> universe_set;
  for (const auto& [bridge, entry] : index.bridges) {
    for (const CrossInliningEntry& x : entry.cross_inlining) {
      bridges_of_target[x.target].insert(bridge);
      if (Matches(x.pattern, pattern)) universe_set.emplace(x.target, x.pattern);
    }
  }
  std::vector<std::pair<BinaryFunctionRef, Pattern>> universe(
      universe_set.begin(), universe_set.end());

  // Queries come from bridges that support the pattern themselves, so the
  // negative stream sees the same query population as the positive one.
  struct QueryBridge {
    const std::string* bridge;
    const BridgeEntry* entry;
    std::vector<std::size_t> valid_targets;  // indices into universe
  };
  std::vector<QueryBridge> queries;
  for (const auto& [bridge, entry] : index.bridges) {
    if (entry.equal.empty()) continue;
    bool supports = std::any_of(
        entry.cross_inlining.begin(), entry.cross_inlining.end(),
        [&](const CrossInliningEntry& x) { return Matches(x.pattern, pattern); });
    if (!supports) continue;
    QueryBridge q{&bridge, &entry, {}};
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (!bridges_of_target[universe[i].first].contains(bridge)) {
        q.valid_targets.push_back(i);
      }
    }
    if (!q.valid_targets.empty()) queries.push_back(std::move(q));
  }
  if (queries.empty()) {
    throw Error(ErrorCode::kExhausted,
                "no valid negative pair for pattern " + Describe(pattern));
  }

  std::mt19937_64 rng(seed);
  std::vector<PairRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const QueryBridge& q = Pick(queries, rng);
    const BinaryFunctionRef& query = Pick(q.entry->equal, rng);
    const auto& [target, target_pattern] = universe[Pick(q.valid_targets, rng)];
    out.push_back({query, target, -1, pattern.value_or(target_pattern),
                   std::nullopt});
  }
  return out;
}

SplitSpec SplitProjects(std::span<const std::string> project_ids,
                        std::array<double, 3> fractions, std::uint64_t seed) {
  std::vector<std::string> ids(project_ids.begin(), project_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 3) {
    throw Error(ErrorCode::kTooFewProjects,
                "need at least 3 projects, got " + std::to_string(ids.size()));
  }
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9 ||
      std::any_of(fractions.begin(), fractions.end(),
                  [](double f) { return f < 0.0; })) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must sum to 1");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const std::size_t total = ids.size();
  // Epsilon keeps 0.1 * 10 from flooring to 0 through rounding error.
  auto floor_count = [&](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(total) + 1e-9));
  };
  std::size_t n_val = std::max<std::size_t>(1, floor_count(fractions[1]));
  std::size_t n_test = std::max<std::size_t>(1, floor_count(fractions[2]));
  if (n_val + n_test >= total) {
    n_val = 1;
    n_test = 1;
  }

  SplitSpec split;
  for (std::size_t i = 0; i < total; ++i) {
    if (i < n_val) {
      split.validation.insert(ids[i]);
    } else if (i < n_val + n_test) {
      split.test.insert(ids[i]);
    } else {
      split.train.insert(ids[i]);
    }
  }
  return split;
}

std::string SplitToJson(const SplitSpec& split) {
  json j = {{"train", split.train},
            {"validation", split.validation},
            {"test", split.test}};
  return j.dump(1) + "\n";
}

SplitSpec SplitFromJson(std::string_view text) {
  try {
    json j = json::parse(text);
    return {j.at("train").get<std::set<std::string>>(),
            j.at("validation").get<std::set<std::string>>(),
            j.at("test").get<std::set<std::string>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("split: ") + e.what());
  }
}

std::string PairToJsonLine(const PairRecord& p) {
  json j = {{"query_ref", RefJson(p.query)},
            {"target_ref", RefJson(p.target)},
            {"label", p.label},
            {"pattern", std::string(PatternName(p.pattern))}};
  if (p.bridge) j["bridge"] = *p.bridge;
  return j.dump();
}

PairRecord PairFromJsonLine(std::string_view line) {
  try {
    json j = json::parse(line);
    PairRecord p;
    p.query = RefFrom(j.at("query_ref"));
    p.target = RefFrom(j.at("target_ref"));
    p.label = j.at("label").get<int>();
    if (p.label != 1 && p.label != -1) {
      throw Error(ErrorCode::kInvalidLabel, "label must be +1 or -1");
    }
    std::optional<Pattern> pattern =
        ParsePattern(j.at("pattern").get<std::string>());
    if (!pattern) throw Error(ErrorCode::kParse, "unknown pattern");
    p.pattern = *pattern;
    if (j.contains("bridge") && !j["bridge"].is_null()) {
      p.bridge = j["bridge"].get<std::string>();
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

std::vector<PairRecord> ReadPairsFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<PairRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(PairFromJsonLine(line));
  }
  return out;
}

void WritePairsFile(const std::filesystem::path& path,
                    std::span<const PairRecord> pairs) {
  std::string text;
  for (const PairRecord& p : pairs) {
    text += PairToJsonLine(p);
    text += '\n';
  }
  WriteTextFile(path, text);
}

}  // namespace cidetect
