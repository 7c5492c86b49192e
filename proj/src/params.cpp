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

#include "mpkg/params.hpp"

#include <cmath>
#include <cstring>

#include "mpkg/encoder.hpp"
#include "mpkg/errors.hpp"

namespace mpkg {

namespace {

template <typename Ref, typename Params>
std::vector<Ref> collect(Params& p) {
  std::vector<Ref> out;
  for (std::size_t r = 0; r < p.encoder.size(); ++r) {
    out.push_back({"encoder.W." + std::to_string(r), p.encoder[r].data(), p.encoder[r].rows(), p.encoder[r].cols()});
  }
  out.push_back({"decoder.weight", p.decoder_weight.data(), p.decoder_weight.rows(), p.decoder_weight.cols()});
  out.push_back({"decoder.bias", p.decoder_bias.data(), 1, p.decoder_bias.size()});
  out.push_back({"gate.fc1.weight", p.gate.fc1_weight.data(), p.gate.fc1_weight.rows(), p.gate.fc1_weight.cols()});
  out.push_back({"gate.fc1.bias", p.gate.fc1_bias.data(), 1, p.gate.fc1_bias.size()});
  out.push_back({"gate.fc2.weight", p.gate.fc2_weight.data(), p.gate.fc2_weight.size(), 1});
  return out;
}

}  // namespace

std::vector<TensorRef> named_tensors(ModelParams& params) { return collect<TensorRef>(params); }

std::vector<ConstTensorRef> named_tensors(const ModelParams& params) { return collect<ConstTensorRef>(params); }

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  for (const Matrix& w : encoder) z.encoder.push_back(Matrix::Zero(w.rows(), w.cols()));
  z.decoder_weight = Matrix::Zero(decoder_weight.rows(), decoder_weight.cols());
  z.decoder_bias = Vector::Zero(decoder_bias.size());
  z.gate.fc1_weight = Matrix::Zero(gate.fc1_weight.rows(), gate.fc1_weight.cols());
  z.gate.fc1_bias = Vector::Zero(gate.fc1_bias.size());
  z.gate.fc2_weight = Vector::Zero(gate.fc2_weight.size());
  return z;
}

bool ModelParams::operator==(const ModelParams& other) const {
  const auto a = named_tensors(*this);
  const auto b = named_tensors(other);
  if (a.size() != b.size()) return false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].name != b[t].name || a[t].rows != b[t].rows || a[t].cols != b[t].cols) return false;
    if (a[t].size() > 0 &&
        std::memcmp(a[t].data, b[t].data, static_cast<std::size_t>(a[t].size()) * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

std::set<std::string> non_gate_tensors(const ModelParams& params) {
  std::set<std::string> out;
  for (const auto& t : named_tensors(params)) {
    if (!is_gate_tensor(t.name)) out.insert(t.name);
  }
  return out;
}

ModelParams init_model_params(std::size_t num_relations, Index d_in, Index d, int reduction, std::uint64_t seed) {
  ModelParams p;
  p.encoder = init_encoder_params(num_relations, d_in, d, seed).weights;
  const Index concat = static_cast<Index>(num_relations) * d;
  p.decoder_weight.resize(concat, d_in);
  fill_uniform(p.decoder_weight, xavier_bound(concat, d_in), seed, 0xdec0de);
  p.decoder_bias = Vector::Zero(d_in);
  p.gate = init_self_excitation(d, reduction, seed);
  return p;
}

ModelParams shaped_params(std::size_t num_relations, Index d_in, Index d, Index gate_hidden) {
  ModelParams p;
  p.encoder.assign(num_relations, Matrix::Zero(d_in, d));
  p.decoder_weight = Matrix::Zero(static_cast<Index>(num_relations) * d, d_in);
  p.decoder_bias = Vector::Zero(d_in);
  p.gate.fc1_weight = Matrix::Zero(d, gate_hidden);
  p.gate.fc1_bias = Vector::Zero(gate_hidden);
  p.gate.fc2_weight = Vector::Zero(gate_hidden);
  return p;
}

void check_finite(const ModelParams& params, std::string_view what) {
  for (const auto& t : named_tensors(params)) {
    for (double v : t.values()) {
      if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": tensor " + t.name + " is not finite");
    }
  }
}

std::uint64_t checksum(const ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& t : named_tensors(params)) {
    mix(t.name.data(), t.name.size());
    mix(&t.rows, sizeof t.rows);
    mix(&t.cols, sizeof t.cols);
    mix(t.data, static_cast<std::size_t>(t.size()) * sizeof(double));
  }
  return h;
}

}  // namespace mpkg
