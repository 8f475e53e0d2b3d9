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

// Graph embedding network over featurized ACFGs.
//
//   encoder      h0(v) = EncoderMLP(x(v))
//   propagation  m_in(v)  = W_in  * sum_{u->v} h(u)
//                m_out(v) = W_out * sum_{v->w} h(w)
//                h'(v)    = UpdateMLP([h(v), m_in(v), m_out(v)])
//   aggregator   e = OutputMLP( sum_v sigmoid(G h(v) + g) * (P h(v) + p) )
//
// MLPs use tanh on hidden layers and a linear output layer. Propagation
// layers do not share weights.

#ifndef CIDETECT_GNN_H_
#define CIDETECT_GNN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cidetect/acfg.h"
#include "cidetect/tensor.h"

namespace cidetect {

struct ModelConfig {
  // Input feature width; set from the vocabulary (key count + UNK).
  std::size_t feature_dim = 0;
  std::size_t node_state_dim = 32;
  std::size_t graph_embedding_dim = 128;
  std::size_t propagation_layers = 5;
  std::vector<std::size_t> encoder_hidden;
  std::vector<std::size_t> update_hidden{64};
  std::vector<std::size_t> output_hidden{128};
  double margin = 0.1;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_nodes = 2000;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidArgument).
  void Validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(std::string_view text);

struct Dense {
  Matrix weight;  // out x in
  std::vector<double> bias;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
  friend bool operator==(const Dense&, const Dense&) = default;
};

struct Mlp {
  std::vector<Dense> layers;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

struct PropagationLayer {
  Matrix w_in;   // state x state
  Matrix w_out;  // state x state
  Mlp update;    // 3*state -> state

  friend bool operator==(const PropagationLayer&,
                         const PropagationLayer&) = default;
};

struct ModelParams {
  Mlp encoder;
  std::vector<PropagationLayer> layers;
  Dense gate;  // state -> embedding
  Dense proj;  // state -> embedding
  Mlp output;  // embedding -> embedding

  // Visits every tensor in a fixed order as (name, values, rows, cols).
  // Biases report rows = 1.
  template <typename Fn>
  void ForEachTensor(Fn&& fn);
  template <typename Fn>
  void ForEachTensor(Fn&& fn) const;

  ModelParams ZerosLike() const;
  std::size_t parameter_count() const;
  bool AllFinite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Glorot-uniform weights in [-a, a], a = sqrt(6 / (fan_in + fan_out)); zero
// biases. Deterministic in config.seed.
ModelParams InitParams(const ModelConfig& config);

using Embedding = std::vector<double>;

struct IndexEdge {
  std::uint32_t src;
  std::uint32_t dst;
  friend bool operator==(const IndexEdge&, const IndexEdge&) = default;
};

// Model input for one graph: one feature row per node (in node-id order) and
// edges expressed as row indices.
struct GraphInput {
  Matrix features;
  std::vector<IndexEdge> edges;

  std::size_t node_count() const { return features.rows(); }
};

// Throws Error(kGraphTooLarge) beyond max_nodes.
GraphInput PrepareGraph(const AttributedCfg& cfg, const OpcodeVocabulary& vocab,
                        std::size_t max_nodes);

// Throws Error(kShapeMismatch) when features.cols() != encoder input width.
Matrix Encode(const Matrix& features, const ModelParams& params);
Matrix Propagate(const Matrix& states, std::span<const IndexEdge> edges,
                 const ModelParams& params, std::size_t layer);
Embedding Aggregate(const Matrix& states, const ModelParams& params);

Embedding Embed(const GraphInput& graph, const ModelParams& params);
Embedding Embed(const AttributedCfg& cfg, const OpcodeVocabulary& vocab,
                const ModelParams& params, const ModelConfig& config);

double EuclideanDistance(std::span<const double> a, std::span<const double> b);

// max(0, margin - t * (1 - d)). Throws Error(kInvalidLabel) unless t is +1 or
// -1.
double PairLoss(double distance, int label, double margin);

// ---- template definitions ----

namespace internal {
template <typename Params, typename Fn>
void VisitMlp(Params& mlp, const std::string& prefix, Fn& fn) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    auto& layer = mlp.layers[i];
    const std::string p = prefix + "." + std::to_string(i);
    fn(p + ".weight", layer.weight.values(), layer.weight.rows(),
       layer.weight.cols());
    fn(p + ".bias", std::span(layer.bias), std::size_t{1}, layer.bias.size());
  }
}

template <typename Params, typename Fn>
void VisitParams(Params& params, Fn& fn) {
  VisitMlp(params.encoder, "encoder", fn);
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    auto& layer = params.layers[t];
    const std::string p = "prop." + std::to_string(t);
    fn(p + ".w_in", layer.w_in.values(), layer.w_in.rows(), layer.w_in.cols());
    fn(p + ".w_out", layer.w_out.values(), layer.w_out.rows(),
       layer.w_out.cols());
    VisitMlp(layer.update, p + ".update", fn);
  }
  fn(std::string("agg.gate.weight"), params.gate.weight.values(),
     params.gate.weight.rows(), params.gate.weight.cols());
  fn(std::string("agg.gate.bias"), std::span(params.gate.bias), std::size_t{1},
     params.gate.bias.size());
  fn(std::string("agg.proj.weight"), params.proj.weight.values(),
     params.proj.weight.rows(), params.proj.weight.cols());
  fn(std::string("agg.proj.bias"), std::span(params.proj.bias), std::size_t{1},
     params.proj.bias.size());
  VisitMlp(params.output, "output", fn);
}
}  // namespace internal

template <typename Fn>
void ModelParams::ForEachTensor(Fn&& fn) {
  internal::VisitParams(*this, fn);
}

template <typename Fn>
void ModelParams::ForEachTensor(Fn&& fn) const {
  internal::VisitParams(*this, fn);
}

}  // namespace cidetect

#endif  // CIDETECT_GNN_H_
