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

#include "mpkg/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpkg/encoder.hpp"
#include "mpkg/errors.hpp"

namespace mpkg {

SelfExcitationParams init_self_excitation(Index d, int reduction, std::uint64_t seed) {
  if (d < 1 || reduction < 1) throw InputError("gate dimensions must be at least 1");
  const Index h = excitation_width(d, reduction);
  SelfExcitationParams gate;
  gate.fc1_weight.resize(d, h);
  fill_uniform(gate.fc1_weight, xavier_bound(d, h), seed, 0x6a7e1);
  gate.fc1_bias = Vector::Zero(h);
  Matrix fc2(h, 1);
  fill_uniform(fc2, xavier_bound(h, 1), seed, 0x6a7e2);
  gate.fc2_weight = fc2.col(0);
  return gate;
}

namespace {

void check_same_shape(std::span<const Matrix> embeddings) {
  if (embeddings.empty()) throw InputError("no relation embeddings supplied");
  for (const Matrix& e : embeddings) {
    if (e.rows() != embeddings[0].rows() || e.cols() != embeddings[0].cols()) {
      throw InputError("relation embeddings disagree in shape");
    }
  }
}

}  // namespace

Matrix toa_concat(std::span<const Matrix> embeddings) {
  check_same_shape(embeddings);
  const Index n = embeddings[0].rows();
  const Index d = embeddings[0].cols();
  Matrix out(n, d * static_cast<Index>(embeddings.size()));
  for (std::size_t r = 0; r < embeddings.size(); ++r) {
    out.middleCols(static_cast<Index>(r) * d, d) = embeddings[r];
  }
  return out;
}

GateTrace gate_forward(const SelfExcitationParams& gate, std::span<const Matrix> embeddings,
                       std::span<const RelationId> active) {
  if (active.empty()) throw InputError("relation weights need at least one active relation");
  check_same_shape(embeddings);
  if (embeddings[0].cols() != gate.input_dim()) {
    throw InputError("gate expects width " + std::to_string(gate.input_dim()) + ", embeddings have " +
                     std::to_string(embeddings[0].cols()));
  }
  GateTrace t;
  t.active.assign(active.begin(), active.end());
  const auto k = static_cast<Index>(active.size());
  t.logits.resize(k);
  t.clamped.resize(active.size());
  for (Index a = 0; a < k; ++a) {
    const RelationId r = active[a];
    if (r >= embeddings.size()) throw InputError("active relation " + std::to_string(r) + " out of range");
    const Matrix& e = embeddings[r];
    Vector s = e.rows() > 0 ? Vector(e.colwise().mean().transpose()) : Vector::Zero(e.cols());
    Vector z = gate.fc1_weight.transpose() * s + gate.fc1_bias;
    Vector h = z.cwiseMax(0.0);
    double logit = gate.fc2_weight.dot(h);
    t.clamped[a] = std::abs(logit) > kLogitClamp;
    t.logits[a] = std::clamp(logit, -kLogitClamp, kLogitClamp);
    t.squeeze.push_back(std::move(s));
    t.pre_relu.push_back(std::move(z));
    t.hidden.push_back(std::move(h));
  }
  const double top = t.logits.maxCoeff();
  t.weights = (t.logits.array() - top).exp().matrix();
  t.weights /= t.weights.sum();
  return t;
}

void gate_backward(const SelfExcitationParams& gate, const GateTrace& t, const Vector& d_weights,
                   SelfExcitationParams& grad, std::vector<Vector>* d_squeeze) {
  const double mean_grad = t.weights.dot(d_weights);
  if (d_squeeze) d_squeeze->assign(t.active.size(), Vector::Zero(gate.input_dim()));
  for (std::size_t a = 0; a < t.active.size(); ++a) {
    if (t.clamped[a]) continue;
    const auto ai = static_cast<Index>(a);
    const double d_logit = t.weights[ai] * (d_weights[ai] - mean_grad);
    grad.fc2_weight += d_logit * t.hidden[a];
    Vector dz = d_logit * gate.fc2_weight;
    for (Index j = 0; j < dz.size(); ++j) {
      if (t.pre_relu[a][j] <= 0.0) dz[j] = 0.0;
    }
    grad.fc1_weight.noalias() += t.squeeze[a] * dz.transpose();
    grad.fc1_bias += dz;
    if (d_squeeze) (*d_squeeze)[a] = gate.fc1_weight * dz;
  }
}

RelationWeights relation_weights(const SelfExcitationParams& gate, std::span<const Matrix> embeddings,
                                 std::span<const RelationId> active) {
  GateTrace t = gate_forward(gate, embeddings, active);
  return {std::move(t.active), std::move(t.weights)};
}

RelationWeights relation_weights(const SelfExcitationParams& gate, std::span<const Matrix> embeddings) {
  const auto active = all_relations(embeddings.size());
  return relation_weights(gate, embeddings, active);
}

Matrix toa_weighted_sum(std::span<const Matrix> embeddings, const RelationWeights& weights) {
  if (weights.active.empty() || static_cast<Index>(weights.active.size()) != weights.weights.size()) {
    throw InputError("relation weights do not match their active set");
  }
  check_same_shape(embeddings);
  Matrix out = Matrix::Zero(embeddings[0].rows(), embeddings[0].cols());
  for (std::size_t a = 0; a < weights.active.size(); ++a) {
    const RelationId r = weights.active[a];
    if (r >= embeddings.size()) throw InputError("weighted relation " + std::to_string(r) + " has no embeddings");
    out += weights.weights[static_cast<Index>(a)] * embeddings[r];
  }
  return out;
}

Matrix fuse_all(const SelfExcitationParams& gate, std::span<const Matrix> embeddings) {
  return toa_weighted_sum(embeddings, relation_weights(gate, embeddings));
}

std::vector<RelationId> all_relations(std::size_t count) {
  std::vector<RelationId> out(count);
  for (std::size_t r = 0; r < count; ++r) out[r] = static_cast<RelationId>(r);
  return out;
}

std::vector<RelationId> all_relations_except(std::size_t count, RelationId excluded) {
  std::vector<RelationId> out;
  for (std::size_t r = 0; r < count; ++r) {
    if (r != excluded) out.push_back(static_cast<RelationId>(r));
  }
  return out;
}

}  // namespace mpkg
