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

#include "mpkg/params.hpp"

namespace mpkg {

struct AdamConfig {
  double lr = 1e-3;
  double l2 = 0.0;  // decoupled weight decay
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments are stored per tensor in named_tensors() order.
struct OptState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

OptState init_opt_state(std::span<const ConstTensorRef> params, const AdamConfig& config);
OptState init_opt_state(const ModelParams& params, const AdamConfig& config);

/// One bias-corrected Adam step. Decoupled L2 is applied first as
/// p <- p (1 - lr l2). Tensors flagged in `frozen` are left untouched,
/// including their moments.
void adam_step(std::span<const TensorRef> params, std::span<const ConstTensorRef> grads,
               std::span<const bool> frozen, OptState& state);

void adam_step(ModelParams& params, const ModelParams& grads, OptState& state,
               const std::set<std::string>& frozen = {});

}  // namespace mpkg
