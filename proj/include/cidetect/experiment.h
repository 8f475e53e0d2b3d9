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

// End-to-end training and evaluation over a corpus directory: project split,
// per-slot pair streams, model training, threshold selection and held-out
// test pairs. The CLI and the acceptance suite both go through here.

#ifndef CIDETECT_EXPERIMENT_H_
#define CIDETECT_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "cidetect/corpus.h"
#include "cidetect/detector.h"
#include "cidetect/eval.h"
#include "cidetect/gnn.h"
#include "cidetect/labeling.h"
#include "cidetect/pairgen.h"
#include "cidetect/train.h"

namespace cidetect {

struct ExperimentOptions {
  ModelConfig model;  // feature_dim and seed are filled in per slot
  std::size_t epochs = 30;
  // Positive pairs per epoch; the same number of negatives is added.
  std::size_t epoch_size = 2000;
  std::size_t validation_pairs = 250;  // per label
  std::size_t threshold_pairs = 1000;  // per label, from training projects
  std::size_t vocab_size = kDefaultVocabularySize;
  std::vector<double> grid = ExtendedGrid();
  std::uint64_t seed = 0;
};

// Sets an experiment or model option from a key=value entry: epochs,
// epoch_size, validation_pairs, threshold_pairs, vocab_size, seed,
// grid (narrow | extended), or any key ApplyModelOption accepts. Throws
// Error(kInvalidArgument) for unknown keys.
void ApplyExperimentOption(ExperimentOptions& options, std::string_view key,
                           std::string_view value);

// "narrow" or "extended"; throws Error(kInvalidArgument) otherwise.
std::vector<double> NamedGrid(std::string_view name);

struct Experiment {
  LabeledCorpus labels;
  GraphCatalog catalog;
  SplitSpec split;
  BridgeIndex train;
  BridgeIndex validation;
  BridgeIndex test;
  // Built from training-project graphs only.
  OpcodeVocabulary vocab;
  std::shared_ptr<const GraphStore> store;
};

Experiment OpenExperiment(const std::filesystem::path& corpus_dir,
                          const ExperimentOptions& options);

// `per_label` positives and as many negatives, shuffled together.
std::vector<PairRecord> MixedLabelPairs(const BridgeIndex& index,
                                        std::optional<Pattern> pattern,
                                        std::size_t per_label, std::uint64_t seed);

// Training pairs of one slot in one epoch.
std::vector<PairRecord> EpochPairs(const BridgeIndex& index, ModelSlot slot,
                                   std::size_t epoch, const ExperimentOptions& options);

// The slot's model configuration: vocabulary width and a slot-specific
// initialization seed.
ModelConfig SlotModelConfig(const Experiment& experiment, ModelSlot slot,
                            const ExperimentOptions& options);

TrainResult TrainSlot(const Experiment& experiment, ModelSlot slot,
                      const ExperimentOptions& options,
                      std::function<void(const EpochRecord&)> on_epoch = {});

// Detector over `models` with its threshold selected on training-project
// pairs from the mixed stream.
EnsembleDetector AssembleDetector(const Experiment& experiment,
                                  std::map<ModelSlot, ModelParams> models,
                                  const ExperimentOptions& options);

// For every cross-inlining pattern with support in `index`, `per_label`
// positives and negatives tagged with that pattern.
std::vector<PairRecord> PatternTestPairs(const BridgeIndex& index,
                                         std::size_t per_label, std::uint64_t seed);

}  // namespace cidetect

#endif  // CIDETECT_EXPERIMENT_H_
