// Copyright 2026 The mpkg Authors.
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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpkg/types.hpp"

namespace mpkg {

inline constexpr int kDefaultReduction = 4;
inline constexpr double kLogitClamp = 50.0;

/// Self-excitation gate shared by every weighted-sum read-out.
///
/// Each relation's embedding matrix is squeezed to its column mean s_r, then
/// logit_r = fc2 . relu(fc1^T s_r + b1). Weights are the softmax of the
/// logits over the active relations. A bias on fc2 would shift every logit
/// equally and cancel in the softmax, so there is none.
struct SelfExcitationParams {
  Matrix fc1_weight;  // d x h
  Vector fc1_bias;    // h
  Vector fc2_weight;  // h

  Index input_dim() const { return fc1_weight.rows(); }
  Index hidden_dim() const { return fc1_weight.cols(); }
};

inline Index excitation_width(Index d, int reduction) {
  const Index h = d / reduction;
  return h < 1 ? 1 : h;
}

/// Xavier-uniform FC weights, zero bias.
SelfExcitationParams init_self_excitation(Index d, int reduction, std::uint64_t seed);

/// Softmax weights over a subset of relations; weights[k] belongs to active[k].
struct RelationWeights {
  std::vector<RelationId> active;
  Vector weights;
};

/// Row-wise concatenation [E^0 | E^1 | ...] in relation order.
Matrix toa_concat(std::span<const Matrix> embeddings);

/// Everything the gate's backward pass needs from its forward pass.
struct GateTrace {
  std::vector<RelationId> active;
  std::vector<Vector> squeeze;     // per active relation, d
  std::vector<Vector> pre_relu;    // per active relation, h
  std::vector<Vector> hidden;      // per active relation, h
  Vector logits;                   // after clamping
  std::vector<bool> clamped;
  Vector weights;
};

GateTrace gate_forward(const SelfExcitationParams& gate, std::span<const Matrix> embeddings,
                       std::span<const RelationId> active);

/// Accumulates into `grad` the gate-parameter gradient for upstream d loss /
/// d weights, and into `d_squeeze` (if non-null, one vector per active
/// relation) the gradient with respect to each squeezed summary.
void gate_backward(const SelfExcitationParams& gate, const GateTrace& trace, const Vector& d_weights,
                   SelfExcitationParams& grad, std::vector<Vector>* d_squeeze = nullptr);

RelationWeights relation_weights(const SelfExcitationParams& gate, std::span<const Matrix> embeddings,
                                 std::span<const RelationId> active);

/// All relations active.
RelationWeights relation_weights(const SelfExcitationParams& gate, std::span<const Matrix> embeddings);

/// sum_k weights[k] * embeddings[active[k]].
Matrix toa_weighted_sum(std::span<const Matrix> embeddings, const RelationWeights& weights);

/// Fused embeddings over all relations, as used for recommendation.
Matrix fuse_all(const SelfExcitationParams& gate, std::span<const Matrix> embeddings);

std::vector<RelationId> all_relations(std::size_t count);
std::vector<RelationId> all_relations_except(std::size_t count, RelationId excluded);

}  // namespace mpkg
