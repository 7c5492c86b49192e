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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mpkg/params.hpp"

namespace mpkg {

struct GradCheckOptions {
  double h = 1e-5;
  double tol = 1e-4;
  Index samples_per_tensor = 100;
  std::uint64_t seed = 0;
};

struct TensorCheck {
  std::string name;
  Index checked = 0;
  double max_rel_error = 0.0;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// |a - n| / max(1e-8, |a| + |n|).
double relative_error(double analytic, double numeric);

/// Compares `analytic` against central differences of `loss`, which must read
/// the current values behind `params`. Tensors with more than
/// samples_per_tensor entries are checked on a seeded random subset of that
/// size; smaller ones are checked exhaustively. Values are restored after
/// each probe.
GradCheckReport grad_check(const std::function<double()>& loss, std::span<const TensorRef> params,
                           std::span<const ConstTensorRef> analytic, const GradCheckOptions& options = {});

/// One line per tensor plus a verdict line.
std::string format_report(const GradCheckReport& report);

}  // namespace mpkg
