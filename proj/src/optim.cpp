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

#include "mpkg/optim.hpp"

#include <cmath>
#include <memory>

#include "mpkg/errors.hpp"

namespace mpkg {

OptState init_opt_state(std::span<const ConstTensorRef> params, const AdamConfig& config) {
  OptState s;
  s.config = config;
  for (const auto& t : params) {
    s.first_moment.push_back(Matrix::Zero(t.rows, t.cols));
    s.second_moment.push_back(Matrix::Zero(t.rows, t.cols));
  }
  return s;
}

OptState init_opt_state(const ModelParams& params, const AdamConfig& config) {
  const auto refs = named_tensors(params);
  return init_opt_state(refs, config);
}

void adam_step(std::span<const TensorRef> params, std::span<const ConstTensorRef> grads,
               std::span<const bool> frozen, OptState& state) {
  if (params.size() != grads.size() || params.size() != frozen.size() ||
      params.size() != state.first_moment.size()) {
    throw InputError("adam_step: parameter, gradient and state counts disagree");
  }
  ++state.step;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - c.lr * c.l2;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (frozen[k]) continue;
    const TensorRef& p = params[k];
    const ConstTensorRef& g = grads[k];
    if (p.rows != g.rows || p.cols != g.cols) throw InputError("adam_step: gradient shape mismatch for " + p.name);
    double* m = state.first_moment[k].data();
    double* v = state.second_moment[k].data();
    for (Index i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g.data[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g.data[i] * g.data[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.data[i] = p.data[i] * decay - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

void adam_step(ModelParams& params, const ModelParams& grads, OptState& state, const std::set<std::string>& frozen) {
  const auto p = named_tensors(params);
  const auto g = named_tensors(grads);
  auto mask = std::make_unique<bool[]>(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) mask[k] = frozen.contains(p[k].name);
  adam_step(p, g, std::span<const bool>(mask.get(), p.size()), state);
}

}  // namespace mpkg
