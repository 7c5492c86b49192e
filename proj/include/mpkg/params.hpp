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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mpkg/adaptation.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

/// Mutable view of one named parameter tensor, row-major.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  Index rows = 0;
  Index cols = 0;
  Index size() const { return rows * cols; }
  std::span<double> values() const { return {data, static_cast<std::size_t>(size())}; }
};

struct ConstTensorRef {
  std::string name;
  const double* data = nullptr;
  Index rows = 0;
  Index cols = 0;
  Index size() const { return rows * cols; }
  std::span<const double> values() const { return {data, static_cast<std::size_t>(size())}; }
};

/// All trainable tensors of the model. Gradients use the same type.
struct ModelParams {
  std::vector<Matrix> encoder;  // W[r], d_in x d
  Matrix decoder_weight;        // (|R| d) x d_in
  Vector decoder_bias;          // d_in
  SelfExcitationParams gate;

  std::size_t num_relations() const { return encoder.size(); }
  Index input_dim() const { return encoder.empty() ? 0 : encoder[0].rows(); }
  Index embedding_dim() const { return encoder.empty() ? 0 : encoder[0].cols(); }

  ModelParams zeros_like() const;
  bool operator==(const ModelParams& other) const;
};

/// Names: encoder.W.<r>, decoder.weight, decoder.bias, gate.fc1.weight,
/// gate.fc1.bias, gate.fc2.weight. Order is stable.
std::vector<TensorRef> named_tensors(ModelParams& params);
std::vector<ConstTensorRef> named_tensors(const ModelParams& params);

inline bool is_gate_tensor(std::string_view name) { return name.starts_with("gate."); }

/// Names of every tensor except the gate's.
std::set<std::string> non_gate_tensors(const ModelParams& params);

ModelParams init_model_params(std::size_t num_relations, Index d_in, Index d, int reduction, std::uint64_t seed);

/// Structurally empty parameters with the given shapes, used when loading.
ModelParams shaped_params(std::size_t num_relations, Index d_in, Index d, Index gate_hidden);

/// Throws NumericalError naming the first tensor with a non-finite entry.
void check_finite(const ModelParams& params, std::string_view what);

/// FNV-1a over every tensor's name, shape and raw bytes.
std::uint64_t checksum(const ModelParams& params);

}  // namespace mpkg
