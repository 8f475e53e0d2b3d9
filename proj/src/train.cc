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

#include "cidetect/train.h"

#include <cmath>
#include <limits>

#include "cidetect/detector.h"
#include "cidetect/error.h"
#include "cidetect/eval.h"
#include "gnn_internal.h"

namespace cidetect {
namespace {

// Calls fn(param_values, other_values...) tensor by tensor across
// structurally identical parameter sets.
template <typename Fn>
void ZipTensors(ModelParams& a, ModelParams& b, ModelParams& c, Fn&& fn) {
  std::vector<std::span<double>> tb;
  std::vector<std::span<double>> tc;
  b.ForEachTensor([&](const std::string&, std::span<double> v, std::size_t,
                      std::size_t) { tb.push_back(v); });
  c.ForEachTensor([&](const std::string&, std::span<double> v, std::size_t,
                      std::size_t) { tc.push_back(v); });
  std::size_t i = 0;
  a.ForEachTensor([&](const std::string&, std::span<double> v, std::size_t,
                      std::size_t) {
    fn(v, tb[i], tc[i]);
    ++i;
  });
}

}  // namespace

TrainState MakeTrainState(ModelParams params) {
  TrainState state;
  state.first_moment = params.ZerosLike();
  state.second_moment = params.ZerosLike();
  state.params = std::move(params);
  return state;
}

namespace {

struct LossAndDistance {
  double loss;
  double distance;
};

// Adds scale * d(loss)/d(params) into `grad`.
LossAndDistance AccumulatePairGradient(const GraphPair& pair,
                                       const ModelParams& params, double margin,
                                       double scale, ModelParams& grad) {
  internal::GraphTape query_tape;
  internal::GraphTape target_tape;
  Embedding eq = internal::ForwardGraph(*pair.query, params, &query_tape);
  Embedding et = internal::ForwardGraph(*pair.target, params, &target_tape);

  const double distance = EuclideanDistance(eq, et);
  if (!std::isfinite(distance)) {
    return {std::numeric_limits<double>::quiet_NaN(), distance};
  }
  const double loss = PairLoss(distance, pair.label, margin);
  // dL/dd = t on the active side of the hinge; the kink itself gets 0.
  const double active = margin - pair.label * (1.0 - distance);
  if (!(active > 0.0) || distance == 0.0) return {loss, distance};

  const double coef = scale * static_cast<double>(pair.label) / distance;
  std::vector<double> d_query(eq.size());
  std::vector<double> d_target(eq.size());
  for (std::size_t i = 0; i < eq.size(); ++i) {
    d_query[i] = coef * (eq[i] - et[i]);
    d_target[i] = -d_query[i];
  }
  internal::BackwardGraph(*pair.query, params, query_tape, d_query, grad);
  internal::BackwardGraph(*pair.target, params, target_tape, d_target, grad);
  return {loss, distance};
}

}  // namespace

PairLossGradient ComputePairGradient(const GraphPair& pair,
                                     const ModelParams& params, double margin) {
  PairLossGradient out;
  out.gradient = params.ZerosLike();
  LossAndDistance r =
      AccumulatePairGradient(pair, params, margin, 1.0, out.gradient);
  out.loss = r.loss;
  out.distance = r.distance;
  return out;
}

double GradStep(std::span<const GraphPair> batch, TrainState& state,
                const ModelConfig& config) {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty training batch");
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  ModelParams grad = state.params.ZerosLike();
  double loss_sum = 0.0;
  for (const GraphPair& pair : batch) {
    loss_sum += AccumulatePairGradient(pair, state.params, config.margin, scale,
                                       grad)
                    .loss;
  }
  const double mean_loss = loss_sum * scale;
  if (!std::isfinite(mean_loss) || !grad.AllFinite()) {
    throw Error(ErrorCode::kNonFiniteGradient,
                "non-finite loss or gradient at step " +
                    std::to_string(state.step + 1));
  }

  const std::uint64_t step = state.step + 1;
  const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  const double lr = config.learning_rate;
  std::vector<std::span<const double>> grads;
  grad.ForEachTensor([&](const std::string&, std::span<const double> g,
                         std::size_t, std::size_t) { grads.push_back(g); });
  std::size_t ti = 0;
  ZipTensors(state.params, state.first_moment, state.second_moment,
             [&](std::span<double> p, std::span<double> m, std::span<double> v) {
               std::span<const double> g = grads[ti++];
               for (std::size_t i = 0; i < p.size(); ++i) {
                 m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
                 v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
                 const double m_hat = m[i] / bias1;
                 const double v_hat = v[i] / bias2;
                 p[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
               }
             });
  state.step = step;
  return mean_loss;
}

double ValidationAuc(std::span<const GraphPair> pairs, const ModelParams& params) {
  std::vector<ScoredPair> scores;
  scores.reserve(pairs.size());
  for (const GraphPair& p : pairs) {
    const double d = EuclideanDistance(Embed(*p.query, params), Embed(*p.target, params));
    scores.push_back({Similarity(d), p.label});
  }
  return Auc(scores);
}

TrainResult TrainModel(const PairSource& train_pairs,
                       std::span<const GraphPair> validation_pairs,
                       const ModelConfig& config, const TrainOptions& options) {
  config.Validate();
  TrainState state = MakeTrainState(InitParams(config));
  TrainResult result;
  result.params = state.params;
  double best_auc = -std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<GraphPair> pairs = train_pairs(epoch);
    if (pairs.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pair source returned no pairs for epoch " +
                      std::to_string(epoch));
    }
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, pairs.size() - start);
      try {
        loss_sum += GradStep(std::span(pairs).subspan(start, len), state, config) *
                    static_cast<double>(len);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFiniteGradient) throw;
        throw Error(ErrorCode::kDiverged, "epoch " + std::to_string(epoch + 1) +
                                              ": " + e.what());
      }
    }
    EpochRecord record;
    record.epoch = epoch + 1;
    record.train_loss = loss_sum / static_cast<double>(pairs.size());
    if (!std::isfinite(record.train_loss)) {
      throw Error(ErrorCode::kDiverged,
                  "non-finite loss in epoch " + std::to_string(epoch + 1));
    }
    state.epoch_losses.push_back(record.train_loss);
    record.validation_auc = validation_pairs.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : ValidationAuc(validation_pairs, state.params);
    // Without validation pairs the latest epoch wins.
    const bool better = validation_pairs.empty() || record.validation_auc > best_auc;
    if (better) {
      if (!validation_pairs.empty()) best_auc = record.validation_auc;
      result.params = state.params;
      result.best_epoch = record.epoch;
    }
    result.history.push_back(record);
    if (options.on_epoch) options.on_epoch(record);
  }
  return result;
}

}  // namespace cidetect
