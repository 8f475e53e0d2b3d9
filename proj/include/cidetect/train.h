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

// Margin-loss training of the graph embedding network with exact
// reverse-mode gradients and Adam updates.

#ifndef CIDETECT_TRAIN_H_
#define CIDETECT_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cidetect/gnn.h"
#include "cidetect/pairgen.h"

namespace cidetect {

struct TrainState {
  ModelParams params;
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;
  std::vector<double> epoch_losses;
};

TrainState MakeTrainState(ModelParams params);

struct PairLossGradient {
  double loss = 0.0;
  double distance = 0.0;
  ModelParams gradient;
};

// Loss of one pair and its exact gradient. At the hinge kink and at zero
// distance the subgradient 0 is used.
PairLossGradient ComputePairGradient(const GraphPair& pair,
                                     const ModelParams& params, double margin);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// One Adam step on the mean pair loss of `batch`; returns that mean loss.
// Gradients are accumulated in batch order. Throws
// Error(kNonFiniteGradient) and leaves the state untouched when any gradient
// entry is not finite.
double GradStep(std::span<const GraphPair> batch, TrainState& state,
                const ModelConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_auc = 0.0;  // NaN without validation pairs
};

struct TrainResult {
  ModelParams params;  // from the epoch with the best validation AUC
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
};

// Returns the pairs to train on in a given (zero-based) epoch.
using PairSource = std::function<std::vector<GraphPair>(std::size_t epoch)>;

struct TrainOptions {
  std::size_t epochs = 30;
  std::function<void(const EpochRecord&)> on_epoch;
};

// Throws Error(kDiverged) when the loss or a gradient becomes non-finite.
TrainResult TrainModel(const PairSource& train_pairs,
                       std::span<const GraphPair> validation_pairs,
                       const ModelConfig& config, const TrainOptions& options);

// Similarity-scored validation pairs, shared with the detector.
double ValidationAuc(std::span<const GraphPair> pairs, const ModelParams& params);

}  // namespace cidetect

#endif  // CIDETECT_TRAIN_H_
