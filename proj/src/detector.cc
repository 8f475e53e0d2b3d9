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

#include "cidetect/detector.h"

#include <algorithm>
#include <cmath>

#include "cidetect/checkpoint.h"
#include "cidetect/error.h"
#include "cidetect/exchange.h"
#include "json.hpp"

namespace cidetect {
namespace {

using nlohmann::json;

constexpr ModelSlot kAllSlots[] = {ModelSlot::kLeaf, ModelSlot::kRoot,
                                   ModelSlot::kInternal, ModelSlot::kMixed};

std::string HexDigest(std::uint64_t h) {
  static const char* kDigits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace

std::string_view SlotName(ModelSlot slot) {
  switch (slot) {
    case ModelSlot::kLeaf: return "leaf";
    case ModelSlot::kRoot: return "root";
    case ModelSlot::kInternal: return "internal";
    case ModelSlot::kMixed: return "mixed";
  }
  return "unknown";
}

std::optional<ModelSlot> ParseSlot(std::string_view name) {
  for (ModelSlot s : kAllSlots) {
    if (SlotName(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Pattern> SlotPattern(ModelSlot slot) {
  switch (slot) {
    case ModelSlot::kLeaf: return Pattern::kLeaf;
    case ModelSlot::kRoot: return Pattern::kRoot;
    case ModelSlot::kInternal: return Pattern::kInternal;
    case ModelSlot::kMixed: return std::nullopt;
  }
  return std::nullopt;
}

double Similarity(double distance) {
  if (!(distance >= 0.0)) {
    throw Error(ErrorCode::kNegativeDistance,
                "distance must be >= 0, got " + std::to_string(distance));
  }
  return 1.0 / (1.0 + distance);
}

Verdict CombineSimilarities(std::map<ModelSlot, double> similarities,
                            double threshold) {
  Verdict v;
  v.similarities = std::move(similarities);
  v.final_similarity = 0.0;
  for (const auto& [slot, s] : v.similarities) {
    v.final_similarity = std::max(v.final_similarity, s);
  }
  v.positive = v.final_similarity >= threshold;
  return v;
}

EnsembleDetector::EnsembleDetector(OpcodeVocabulary vocab, ModelConfig config,
                                   std::map<ModelSlot, ModelParams> models,
                                   double threshold)
    : vocab_(std::move(vocab)),
      config_(std::move(config)),
      models_(std::move(models)),
      threshold_(kDefaultThreshold) {
  if (models_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "detector needs at least one model");
  }
  for (const auto& [slot, params] : models_) {
    if (params.encoder.in_dim() != vocab_.feature_dim()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(SlotName(slot)) +
                      " model input width does not match the vocabulary");
    }
  }
  set_threshold(threshold);
}

void EnsembleDetector::set_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must be in (0, 1]");
  }
  threshold_ = threshold;
}

GraphInput EnsembleDetector::Prepare(const AttributedCfg& cfg) const {
  return PrepareGraph(cfg, vocab_, config_.max_nodes);
}

Verdict EnsembleDetector::Detect(const GraphInput& query,
                                 const GraphInput& target) const {
  std::map<ModelSlot, double> sims;
  for (const auto& [slot, params] : models_) {
    const double d = EuclideanDistance(Embed(query, params), Embed(target, params));
    sims[slot] = Similarity(d);
  }
  return CombineSimilarities(std::move(sims), threshold_);
}

Verdict EnsembleDetector::Detect(const AttributedCfg& query,
                                 const AttributedCfg& target) const {
  return Detect(Prepare(query), Prepare(target));
}

double SelectThreshold(std::span<const ScoredPair> scores,
                       std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty threshold grid");
  bool has_pos = false;
  bool has_neg = false;
  for (const ScoredPair& s : scores) {
    (s.label > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kDegenerateLabels,
                "threshold selection needs both labels");
  }
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  double best = sorted.front();
  Confusion best_counts = ComputeConfusion(scores, best);
  for (double theta : sorted) {
    Confusion c = ComputeConfusion(scores, theta);
    if (CompareF1(c, best_counts) > 0) {
      best_counts = c;
      best = theta;
    }
  }
  return best;
}

void SaveBundle(const std::filesystem::path& dir,
                const EnsembleDetector& detector,
                const std::map<std::string, std::string>& provenance) {
  std::filesystem::create_directories(dir);
  WriteVocabulary(dir / "vocab.txt", detector.vocab());
  json models = json::object();
  for (const auto& [slot, params] : detector.models()) {
    const std::string file = std::string(SlotName(slot)) + ".ckpt";
    SaveCheckpoint(dir / file, detector.config(), params);
    models[std::string(SlotName(slot))] = file;
  }
  json manifest = {
      {"format", "cidetect-bundle"},
      {"version", 1},
      {"threshold", detector.threshold()},
      {"config_hash", HexDigest(Fnv1a64(ModelConfigToJson(detector.config())))},
      {"models", std::move(models)},
      {"vocab", "vocab.txt"},
      {"provenance", provenance},
  };
  WriteTextFile(dir / "manifest.json", manifest.dump(1) + "\n");
}

EnsembleDetector LoadBundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "bundle directory not found: " + dir.string());
  }
  json manifest;
  try {
    manifest = json::parse(ReadTextFile(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bundle manifest: ") + e.what());
  }
  OpcodeVocabulary vocab = ReadVocabulary(dir / "vocab.txt");
  std::map<ModelSlot, ModelParams> models;
  std::optional<ModelConfig> config;
  const std::string expected_hash = manifest.value("config_hash", "");
  for (const auto& [name, file] : manifest.at("models").items()) {
    std::optional<ModelSlot> slot = ParseSlot(name);
    if (!slot) throw Error(ErrorCode::kParse, "unknown model slot " + name);
    Checkpoint ckpt = LoadCheckpoint(dir / file.get<std::string>());
    if (HexDigest(Fnv1a64(ModelConfigToJson(ckpt.config))) != expected_hash) {
      throw Error(ErrorCode::kParse, "config hash mismatch for " + name);
    }
    if (!config) config = ckpt.config;
    models.emplace(*slot, std::move(ckpt.params));
  }
  if (!config) throw Error(ErrorCode::kParse, "bundle lists no models");
  return EnsembleDetector(std::move(vocab), *config, std::move(models),
                          manifest.at("threshold").get<double>());
}

}  // namespace cidetect
