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

#include "cidetect/gnn.h"

#include <cmath>
#include <random>

#include "cidetect/error.h"
#include "cidetect/kernels.h"
#include "gnn_internal.h"
#include "json.hpp"

namespace cidetect {
namespace {

using nlohmann::json;

Dense MakeDense(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  Dense d;
  d.weight = Matrix(out, in);
  d.bias.assign(out, 0.0);
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (double& w : d.weight.values()) w = dist(rng);
  return d;
}

Mlp MakeMlp(std::size_t in, const std::vector<std::size_t>& hidden,
            std::size_t out, std::mt19937_64& rng) {
  Mlp mlp;
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    mlp.layers.push_back(MakeDense(prev, h, rng));
    prev = h;
  }
  mlp.layers.push_back(MakeDense(prev, out, rng));
  return mlp;
}

Matrix MakeSquare(std::size_t n, std::mt19937_64& rng) {
  return MakeDense(n, n, rng).weight;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void DenseForward(const Dense& d, const Matrix& x, Matrix& y) {
  const std::size_t n = x.rows();
  const std::size_t m = d.out_dim();
  y = Matrix(n, m);
  kernels::Active().matmul_nt(x.data(), d.weight.data(), y.data(), n,
                              d.in_dim(), m);
  for (std::size_t r = 0; r < n; ++r) {
    double* yr = y.data() + r * m;
    for (std::size_t o = 0; o < m; ++o) yr[o] += d.bias[o];
  }
}

// dW += dy^T x, db += colsum(dy); returns dx if requested.
Matrix DenseBackward(const Dense& d, const Matrix& x, const Matrix& dy,
                     Dense& grad, bool need_input_grad) {
  const std::size_t n = x.rows();
  const std::size_t m = d.out_dim();
  const std::size_t k = d.in_dim();
  const kernels::KernelTable& kt = kernels::Active();
  kt.matmul_tn_acc(dy.data(), x.data(), grad.weight.data(), n, m, k);
  for (std::size_t r = 0; r < n; ++r) {
    const double* dyr = dy.data() + r * m;
    for (std::size_t o = 0; o < m; ++o) grad.bias[o] += dyr[o];
  }
  if (!need_input_grad) return {};
  Matrix dx(n, k);
  kt.matmul_nn_acc(dy.data(), d.weight.data(), dx.data(), n, m, k);
  return dx;
}

}  // namespace

void ModelConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "model config: " + what);
  };
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  if (node_state_dim < 1) fail("node_state_dim must be >= 1");
  if (graph_embedding_dim < 1) fail("graph_embedding_dim must be >= 1");
  for (const auto* widths : {&encoder_hidden, &update_hidden, &output_hidden}) {
    for (std::size_t w : *widths) {
      if (w < 1) fail("hidden widths must be >= 1");
    }
  }
  if (!(margin > 0.0)) fail("margin must be > 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (max_nodes < 1) fail("max_nodes must be >= 1");
}

std::string ModelConfigToJson(const ModelConfig& c) {
  json j = {
      {"feature_dim", c.feature_dim},
      {"node_state_dim", c.node_state_dim},
      {"graph_embedding_dim", c.graph_embedding_dim},
      {"propagation_layers", c.propagation_layers},
      {"encoder_hidden", c.encoder_hidden},
      {"update_hidden", c.update_hidden},
      {"output_hidden", c.output_hidden},
      {"margin", c.margin},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"max_nodes", c.max_nodes},
      {"seed", c.seed},
  };
  return j.dump();
}

ModelConfig ModelConfigFromJson(std::string_view text) {
  ModelConfig c;
  try {
    json j = json::parse(text);
    c.feature_dim = j.at("feature_dim").get<std::size_t>();
    c.node_state_dim = j.at("node_state_dim").get<std::size_t>();
    c.graph_embedding_dim = j.at("graph_embedding_dim").get<std::size_t>();
    c.propagation_layers = j.at("propagation_layers").get<std::size_t>();
    c.encoder_hidden = j.at("encoder_hidden").get<std::vector<std::size_t>>();
    c.update_hidden = j.at("update_hidden").get<std::vector<std::size_t>>();
    c.output_hidden = j.at("output_hidden").get<std::vector<std::size_t>>();
    c.margin = j.at("margin").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.max_nodes = j.at("max_nodes").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model config: ") + e.what());
  }
  return c;
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams z = *this;
  z.ForEachTensor([](const std::string&, std::span<double> v, std::size_t,
                     std::size_t) { std::fill(v.begin(), v.end(), 0.0); });
  return z;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  ForEachTensor([&](const std::string&, std::span<const double> v, std::size_t,
                    std::size_t) { n += v.size(); });
  return n;
}

bool ModelParams::AllFinite() const {
  bool ok = true;
  ForEachTensor([&](const std::string&, std::span<const double> v, std::size_t,
                    std::size_t) {
    for (double x : v) ok = ok && std::isfinite(x);
  });
  return ok;
}

ModelParams InitParams(const ModelConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  const std::size_t s = config.node_state_dim;
  const std::size_t e = config.graph_embedding_dim;
  ModelParams p;
  p.encoder = MakeMlp(config.feature_dim, config.encoder_hidden, s, rng);
  for (std::size_t t = 0; t < config.propagation_layers; ++t) {
    PropagationLayer layer;
    layer.w_in = MakeSquare(s, rng);
    layer.w_out = MakeSquare(s, rng);
    layer.update = MakeMlp(3 * s, config.update_hidden, s, rng);
    p.layers.push_back(std::move(layer));
  }
  p.gate = MakeDense(s, e, rng);
  p.proj = MakeDense(s, e, rng);
  p.output = MakeMlp(e, config.output_hidden, e, rng);
  return p;
}

GraphInput PrepareGraph(const AttributedCfg& cfg, const OpcodeVocabulary& vocab,
                        std::size_t max_nodes) {
  const std::size_t n = cfg.node_count();
  if (n > max_nodes) {
    throw Error(ErrorCode::kGraphTooLarge,
                std::to_string(n) + " nodes exceeds cap of " +
                    std::to_string(max_nodes));
  }
  GraphInput g;
  g.features = Matrix(n, vocab.feature_dim());
  for (std::size_t i = 0; i < n; ++i) {
    NodeFeatureVector counts = FeaturizeNode(cfg.nodes()[i], vocab);
    std::span<double> row = g.features.row(i);
    for (std::size_t j = 0; j < counts.size(); ++j) {
      row[j] = static_cast<double>(counts[j]);
    }
  }
  g.edges.reserve(cfg.edges().size());
  for (const Edge& e : cfg.edges()) {
    g.edges.push_back({static_cast<std::uint32_t>(cfg.index_of(e.first)),
                       static_cast<std::uint32_t>(cfg.index_of(e.second))});
  }
  return g;
}

namespace internal {

Matrix MlpForward(const Mlp& mlp, const Matrix& x, MlpTape* tape) {
  Matrix cur = x;
  if (tape) tape->activations.assign(1, x);
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    Matrix next;
    DenseForward(mlp.layers[l], cur, next);
    if (l + 1 < mlp.layers.size()) {
      for (double& v : next.values()) v = std::tanh(v);
    }
    if (tape) tape->activations.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

Matrix MlpBackward(const Mlp& mlp, const MlpTape& tape, Matrix d_out,
                   Mlp& grads, bool need_input_grad) {
  Matrix d = std::move(d_out);
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    if (l + 1 < mlp.layers.size()) {
      // Hidden layer: d(tanh) = 1 - a^2 with a the recorded activation.
      const Matrix& a = tape.activations[l + 1];
      for (std::size_t i = 0; i < d.size(); ++i) {
        d.data()[i] *= 1.0 - a.data()[i] * a.data()[i];
      }
    }
    const bool want_dx = l > 0 || need_input_grad;
    d = DenseBackward(mlp.layers[l], tape.activations[l], d, grads.layers[l],
                      want_dx);
  }
  return d;
}

Matrix PropagateLayer(const Matrix& states, std::span<const IndexEdge> edges,
                      const PropagationLayer& layer, Matrix* in_sum_out,
                      Matrix* out_sum_out, MlpTape* tape) {
  const std::size_t n = states.rows();
  const std::size_t s = states.cols();
  const kernels::KernelTable& kt = kernels::Active();
  Matrix in_sum(n, s);
  Matrix out_sum(n, s);
  for (const IndexEdge& e : edges) {
    kt.axpy(1.0, states.data() + e.src * s, in_sum.data() + e.dst * s, s);
    kt.axpy(1.0, states.data() + e.dst * s, out_sum.data() + e.src * s, s);
  }
  // W * (sum of states) equals the sum of per-edge messages.
  Matrix m_in(n, s);
  Matrix m_out(n, s);
  kt.matmul_nt(in_sum.data(), layer.w_in.data(), m_in.data(), n, s, s);
  kt.matmul_nt(out_sum.data(), layer.w_out.data(), m_out.data(), n, s, s);
  Matrix concat(n, 3 * s);
  for (std::size_t v = 0; v < n; ++v) {
    double* dst = concat.data() + v * 3 * s;
    std::copy_n(states.data() + v * s, s, dst);
    std::copy_n(m_in.data() + v * s, s, dst + s);
    std::copy_n(m_out.data() + v * s, s, dst + 2 * s);
  }
  if (in_sum_out) *in_sum_out = std::move(in_sum);
  if (out_sum_out) *out_sum_out = std::move(out_sum);
  return MlpForward(layer.update, concat, tape);
}

namespace {

// Returns the pooled (pre-output-MLP) vector.
std::vector<double> GatedSum(const Matrix& states, const ModelParams& params,
                             Matrix* gates_out, Matrix* projs_out) {
  Matrix gates;
  Matrix projs;
  DenseForward(params.gate, states, gates);
  DenseForward(params.proj, states, projs);
  for (double& g : gates.values()) g = Sigmoid(g);
  const std::size_t e = gates.cols();
  std::vector<double> pooled(e, 0.0);
  for (std::size_t v = 0; v < states.rows(); ++v) {
    const double* gv = gates.data() + v * e;
    const double* pv = projs.data() + v * e;
    for (std::size_t j = 0; j < e; ++j) pooled[j] += gv[j] * pv[j];
  }
  if (gates_out) *gates_out = std::move(gates);
  if (projs_out) *projs_out = std::move(projs);
  return pooled;
}

Matrix RowMatrix(std::span<const double> v) {
  Matrix m(1, v.size());
  std::copy(v.begin(), v.end(), m.data());
  return m;
}

}  // namespace

Embedding ForwardGraph(const GraphInput& graph, const ModelParams& params,
                       GraphTape* tape) {
  if (graph.features.cols() != params.encoder.in_dim()) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature width " + std::to_string(graph.features.cols()) +
                    " != encoder input " +
                    std::to_string(params.encoder.in_dim()));
  }
  const std::size_t layers = params.layers.size();
  if (tape) {
    tape->states.assign(1, Matrix());
    tape->in_sums.assign(layers, Matrix());
    tape->out_sums.assign(layers, Matrix());
    tape->updates.assign(layers, MlpTape());
  }
  Matrix states = MlpForward(params.encoder, graph.features,
                             tape ? &tape->encoder : nullptr);
  if (tape) tape->states[0] = states;
  for (std::size_t t = 0; t < layers; ++t) {
    states = PropagateLayer(states, graph.edges, params.layers[t],
                            tape ? &tape->in_sums[t] : nullptr,
                            tape ? &tape->out_sums[t] : nullptr,
                            tape ? &tape->updates[t] : nullptr);
    if (tape) tape->states.push_back(states);
  }
  std::vector<double> pooled =
      GatedSum(states, params, tape ? &tape->gates : nullptr,
               tape ? &tape->projs : nullptr);
  Matrix out = MlpForward(params.output, RowMatrix(pooled),
                          tape ? &tape->output : nullptr);
  return Embedding(out.values().begin(), out.values().end());
}

void BackwardGraph(const GraphInput& graph, const ModelParams& params,
                   const GraphTape& tape, std::span<const double> d_embedding,
                   ModelParams& grads) {
  const kernels::KernelTable& kt = kernels::Active();
  Matrix d_pooled =
      MlpBackward(params.output, tape.output, RowMatrix(d_embedding),
                  grads.output, /*need_input_grad=*/true);

  const Matrix& final_states = tape.states.back();
  const std::size_t n = final_states.rows();
  const std::size_t e = tape.gates.cols();
  Matrix d_gate_pre(n, e);
  Matrix d_proj(n, e);
  for (std::size_t v = 0; v < n; ++v) {
    const double* gv = tape.gates.data() + v * e;
    const double* pv = tape.projs.data() + v * e;
    for (std::size_t j = 0; j < e; ++j) {
      const double dp = d_pooled.data()[j];
      d_gate_pre(v, j) = dp * pv[j] * gv[j] * (1.0 - gv[j]);
      d_proj(v, j) = dp * gv[j];
    }
  }
  Matrix d_states =
      DenseBackward(params.gate, final_states, d_gate_pre, grads.gate, true);
  Matrix d_states_proj =
      DenseBackward(params.proj, final_states, d_proj, grads.proj, true);
  kt.axpy(1.0, d_states_proj.data(), d_states.data(), d_states.size());

  for (std::size_t t = params.layers.size(); t-- > 0;) {
    const PropagationLayer& layer = params.layers[t];
    PropagationLayer& g = grads.layers[t];
    const std::size_t s = layer.w_in.rows();
    Matrix d_concat = MlpBackward(layer.update, tape.updates[t],
                                  std::move(d_states), g.update, true);
    Matrix d_prev(n, s);
    Matrix d_m_in(n, s);
    Matrix d_m_out(n, s);
    for (std::size_t v = 0; v < n; ++v) {
      const double* src = d_concat.data() + v * 3 * s;
      std::copy_n(src, s, d_prev.data() + v * s);
      std::copy_n(src + s, s, d_m_in.data() + v * s);
      std::copy_n(src + 2 * s, s, d_m_out.data() + v * s);
    }
    kt.matmul_tn_acc(d_m_in.data(), tape.in_sums[t].data(), g.w_in.data(), n, s,
                     s);
    kt.matmul_tn_acc(d_m_out.data(), tape.out_sums[t].data(), g.w_out.data(), n,
                     s, s);
    Matrix d_in_sum(n, s);
    Matrix d_out_sum(n, s);
    kt.matmul_nn_acc(d_m_in.data(), layer.w_in.data(), d_in_sum.data(), n, s, s);
    kt.matmul_nn_acc(d_m_out.data(), layer.w_out.data(), d_out_sum.data(), n, s,
                     s);
    for (const IndexEdge& edge : graph.edges) {
      kt.axpy(1.0, d_in_sum.data() + edge.dst * s, d_prev.data() + edge.src * s,
              s);
      kt.axpy(1.0, d_out_sum.data() + edge.src * s,
              d_prev.data() + edge.dst * s, s);
    }
    d_states = std::move(d_prev);
  }
  MlpBackward(params.encoder, tape.encoder, std::move(d_states), grads.encoder,
              /*need_input_grad=*/false);
}

}  // namespace internal

Matrix Encode(const Matrix& features, const ModelParams& params) {
  if (features.cols() != params.encoder.in_dim()) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature width " + std::to_string(features.cols()) +
                    " != encoder input " +
                    std::to_string(params.encoder.in_dim()));
  }
  return internal::MlpForward(params.encoder, features, nullptr);
}

Matrix Propagate(const Matrix& states, std::span<const IndexEdge> edges,
                 const ModelParams& params, std::size_t layer) {
  if (layer >= params.layers.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "propagation layer " + std::to_string(layer) + " out of range");
  }
  return internal::PropagateLayer(states, edges, params.layers[layer], nullptr,
                                  nullptr, nullptr);
}

Embedding Aggregate(const Matrix& states, const ModelParams& params) {
  std::vector<double> pooled =
      internal::GatedSum(states, params, nullptr, nullptr);
  Matrix out = internal::MlpForward(params.output,
                                    internal::RowMatrix(pooled), nullptr);
  return Embedding(out.values().begin(), out.values().end());
}

Embedding Embed(const GraphInput& graph, const ModelParams& params) {
  return internal::ForwardGraph(graph, params, nullptr);
}

Embedding Embed(const AttributedCfg& cfg, const OpcodeVocabulary& vocab,
                const ModelParams& params, const ModelConfig& config) {
  return Embed(PrepareGraph(cfg, vocab, config.max_nodes), params);
}

double EuclideanDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "embedding widths differ");
  }
  return std::sqrt(kernels::Active().squared_distance(a.data(), b.data(), a.size()));
}

double PairLoss(double distance, int label, double margin) {
  if (label != 1 && label != -1) {
    throw Error(ErrorCode::kInvalidLabel,
                "label must be +1 or -1, got " + std::to_string(label));
  }
  return std::max(0.0, margin - static_cast<double>(label) * (1.0 - distance));
}

}  // namespace cidetect
