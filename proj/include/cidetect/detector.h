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

// Ensemble of per-pattern models. Each model turns the embedding distance of a
// pair into a similarity 1 / (1 + d); the ensemble reports the maximum and
// labels the pair positive when it reaches the threshold.

#ifndef CIDETECT_DETECTOR_H_
#define CIDETECT_DETECTOR_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cidetect/acfg.h"
#include "cidetect/eval.h"
#include "cidetect/gnn.h"

namespace cidetect {

// Which pair stream a model was trained on. kMixed is the single model
// trained on all patterns together.
enum class ModelSlot { kLeaf, kRoot, kInternal, kMixed };

std::string_view SlotName(ModelSlot slot);
std::optional<ModelSlot> ParseSlot(std::string_view name);
// Pattern a slot trains on; nullopt for kMixed.
std::optional<Pattern> SlotPattern(ModelSlot slot);

inline constexpr double kDefaultThreshold = 0.55;

// 1 / (1 + d). Throws Error(kNegativeDistance) for d < 0 or NaN.
double Similarity(double distance);

struct Verdict {
  std::map<ModelSlot, double> similarities;
  double final_similarity = 0.0;
  bool positive = false;
};

// final = max over models, positive = final >= threshold.
Verdict CombineSimilarities(std::map<ModelSlot, double> similarities,
                            double threshold);

class EnsembleDetector {
 public:
  // Throws Error(kInvalidArgument) for an empty model set, models whose input
  // width differs from the vocabulary, or a threshold outside (0, 1].
  EnsembleDetector(OpcodeVocabulary vocab, ModelConfig config,
                   std::map<ModelSlot, ModelParams> models,
                   double threshold = kDefaultThreshold);

  const OpcodeVocabulary& vocab() const { return vocab_; }
  const ModelConfig& config() const { return config_; }
  const std::map<ModelSlot, ModelParams>& models() const { return models_; }
  double threshold() const { return threshold_; }
  void set_threshold(double threshold);

  GraphInput Prepare(const AttributedCfg& cfg) const;

  Verdict Detect(const GraphInput& query, const GraphInput& target) const;
  Verdict Detect(const AttributedCfg& query, const AttributedCfg& target) const;

 private:
  OpcodeVocabulary vocab_;
  ModelConfig config_;
  std::map<ModelSlot, ModelParams> models_;
  double threshold_;
};

// Grid value with the highest F1 on the scored pairs; the smallest value wins
// ties. Throws Error(kDegenerateLabels) unless both labels occur.
double SelectThreshold(std::span<const ScoredPair> scores,
                       std::span<const double> grid);

// Detector bundle directory:
//   manifest.json      threshold, config hash, model files, provenance
//   vocab.txt          one opcode per line
//   <slot>.ckpt        checkpoint per model (+ .manifest.txt)
void SaveBundle(const std::filesystem::path& dir,
                const EnsembleDetector& detector,
                const std::map<std::string, std::string>& provenance);
EnsembleDetector LoadBundle(const std::filesystem::path& dir);

}  // namespace cidetect

#endif  // CIDETECT_DETECTOR_H_
