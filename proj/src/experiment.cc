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

#include "cidetect/experiment.h"

#include <algorithm>
#include <random>

#include "cidetect/config.h"
#include "cidetect/error.h"
#include "cidetect/seed.h"

namespace cidetect {
namespace {

constexpr std::uint64_t kSplitStream = 10;
constexpr std::uint64_t kTrainStream = 11;
constexpr std::uint64_t kValidationStream = 12;
constexpr std::uint64_t kThresholdStream = 13;
constexpr std::uint64_t kTestStream = 14;
constexpr std::uint64_t kInitStream = 15;

std::uint64_t Tag(ModelSlot slot) { return static_cast<std::uint64_t>(slot); }
std::uint64_t Tag(Pattern p) { return static_cast<std::uint64_t>(p); }

}  // namespace

std::vector<double> NamedGrid(std::string_view name) {
  if (name == "narrow") return NarrowGrid();
  if (name == "extended") return ExtendedGrid();
  throw Error(ErrorCode::kInvalidArgument,
              "grid must be narrow or extended, got '" + std::string(name) + "'");
}

void ApplyExperimentOption(ExperimentOptions& options, std::string_view key,
                           std::string_view value) {
  if (key == "epochs") {
    options.epochs = ParseUnsigned(key, value);
  } else if (key == "epoch_size") {
    options.epoch_size = ParseUnsigned(key, value);
  } else if (key == "validation_pairs") {
    options.validation_pairs = ParseUnsigned(key, value);
  } else if (key == "threshold_pairs") {
    options.threshold_pairs = ParseUnsigned(key, value);
  } else if (key == "vocab_size") {
    options.vocab_size = ParseUnsigned(key, value);
  } else if (key == "seed") {
    options.seed = ParseUnsigned(key, value);
  } else if (key == "grid") {
    options.grid = NamedGrid(value);
  } else if (!ApplyModelOption(options.model, key, value)) {
    throw Error(ErrorCode::kInvalidArgument, "unknown option " + std::string(key));
  }
}

Experiment OpenExperiment(const std::filesystem::path& corpus_dir,
                          const ExperimentOptions& options) {
  Experiment ex;
  ex.labels = LabelCorpusDir(corpus_dir);
  ex.catalog = LoadGraphCatalog(corpus_dir);
  ex.split = SplitProjects(ex.labels.projects, kDefaultSplitFractions,
                           MixSeed(options.seed, {kSplitStream}));
  const BridgeIndex& full = ex.labels.bridges.index;
  ex.train = full.Restricted(ex.split.train);
  ex.validation = full.Restricted(ex.split.validation);
  ex.test = full.Restricted(ex.split.test);
  ex.vocab = BuildVocabulary(CatalogGraphs(ex.catalog, ex.split.train), options.vocab_size);
  ex.store = std::make_shared<const GraphStore>(ex.catalog, ex.vocab,
                                                options.model.max_nodes);
  return ex;
}

std::vector<PairRecord> MixedLabelPairs(const BridgeIndex& index,
                                        std::optional<Pattern> pattern,
                                        std::size_t per_label, std::uint64_t seed) {
  std::vector<PairRecord> out =
      GeneratePositivePairs(index, pattern, per_label, MixSeed(seed, {1}));
  std::vector<PairRecord> neg =
      GenerateNegativePairs(index, pattern, per_label, MixSeed(seed, {2}));
  out.insert(out.end(), std::make_move_iterator(neg.begin()),
             std::make_move_iterator(neg.end()));
  std::mt19937_64 rng(MixSeed(seed, {3}));
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<PairRecord> EpochPairs(const BridgeIndex& index, ModelSlot slot,
                                   std::size_t epoch, const ExperimentOptions& options) {
  return MixedLabelPairs(index, SlotPattern(slot), options.epoch_size,
                         MixSeed(options.seed, {kTrainStream, Tag(slot), epoch}));
}

ModelConfig SlotModelConfig(const Experiment& experiment, ModelSlot slot,
                            const ExperimentOptions& options) {
  ModelConfig config = options.model;
  config.feature_dim = experiment.vocab.feature_dim();
  config.seed = MixSeed(options.seed, {kInitStream, Tag(slot)});
  return config;
}

TrainResult TrainSlot(const Experiment& experiment, ModelSlot slot,
                      const ExperimentOptions& options,
                      std::function<void(const EpochRecord&)> on_epoch) {
  const ModelConfig config = SlotModelConfig(experiment, slot, options);
  const GraphStore& store = *experiment.store;

  // Validation projects can be too small to support a pattern; training then
  // keeps the last epoch.
  std::vector<GraphPair> validation;
  if (options.validation_pairs > 0) {
    try {
      const auto records = MixedLabelPairs(
          experiment.validation, SlotPattern(slot), options.validation_pairs,
          MixSeed(options.seed, {kValidationStream, Tag(slot)}));
      validation = ResolvePairs(records, store);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kExhausted) throw;
    }
  }

  PairSource source = [&](std::size_t epoch) {
    return ResolvePairs(EpochPairs(experiment.train, slot, epoch, options), store);
  };
  TrainOptions train_options;
  train_options.epochs = options.epochs;
  train_options.on_epoch = std::move(on_epoch);
  return TrainModel(source, validation, config, train_options);
}

EnsembleDetector AssembleDetector(const Experiment& experiment,
                                  std::map<ModelSlot, ModelParams> models,
                                  const ExperimentOptions& options) {
  const ModelSlot any = models.begin()->first;
  EnsembleDetector detector(experiment.vocab, SlotModelConfig(experiment, any, options),
                            std::move(models));
  const auto records =
      MixedLabelPairs(experiment.train, std::nullopt, options.threshold_pairs,
                      MixSeed(options.seed, {kThresholdStream}));
  const auto pairs = ResolvePairs(records, *experiment.store);
  std::vector<ScoredPair> scores;
  scores.reserve(pairs.size());
  for (const GraphPair& p : pairs) {
    scores.push_back({detector.Detect(*p.query, *p.target).final_similarity, p.label});
  }
  detector.set_threshold(SelectThreshold(scores, options.grid));
  return detector;
}

std::vector<PairRecord> PatternTestPairs(const BridgeIndex& index, std::size_t per_label,
                                         std::uint64_t seed) {
  std::vector<PairRecord> out;
  for (Pattern p : kCrossInliningPatterns) {
    std::vector<PairRecord> part;
    try {
      part = MixedLabelPairs(index, p, per_label, MixSeed(seed, {kTestStream, Tag(p)}));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kExhausted) throw;
      continue;
    }
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace cidetect
