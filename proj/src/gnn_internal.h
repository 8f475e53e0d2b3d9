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

// Forward pass with recorded activations, and the matching reverse pass.
// Shared by the public forward ops and the trainer.

#ifndef CIDETECT_SRC_GNN_INTERNAL_H_
#define CIDETECT_SRC_GNN_INTERNAL_H_

#include <span>
#include <vector>

#include "cidetect/gnn.h"

namespace cidetect::internal {

struct MlpTape {
  // activations[l] is the input of layer l; the last entry is the output.
  std::vector<Matrix> activations;
};

Matrix MlpForward(const Mlp& mlp, const Matrix& x, MlpTape* tape);
// Accumulates parameter gradients into `grads`; returns d(input) when
// `need_input_grad`, otherwise an empty matrix.
Matrix MlpBackward(const Mlp& mlp, const MlpTape& tape, Matrix d_out,
                   Mlp& grads, bool need_input_grad);

struct GraphTape {
  MlpTape encoder;
  std::vector<Matrix> states;    // states[0] from the encoder, then per layer
  std::vector<Matrix> in_sums;   // per layer: sum of predecessor states
  std::vector<Matrix> out_sums;  // per layer: sum of successor states
  std::vector<MlpTape> updates;
  Matrix gates;  // after sigmoid
  Matrix projs;
  MlpTape output;
};

Matrix PropagateLayer(const Matrix& states, std::span<const IndexEdge> edges,
                      const PropagationLayer& layer, Matrix* in_sum,
                      Matrix* out_sum, MlpTape* tape);

Embedding ForwardGraph(const GraphInput& graph, const ModelParams& params,
                       GraphTape* tape);

// Accumulates d(embedding)/d(params) scaled by `d_embedding` into `grads`.
void BackwardGraph(const GraphInput& graph, const ModelParams& params,
                   const GraphTape& tape, std::span<const double> d_embedding,
                   ModelParams& grads);

}  // namespace cidetect::internal

#endif  // CIDETECT_SRC_GNN_INTERNAL_H_
