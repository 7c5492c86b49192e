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

#include "mpkg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mpkg/errors.hpp"

namespace mpkg {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckReport grad_check(const std::function<double()>& loss, std::span<const TensorRef> params,
                           std::span<const ConstTensorRef> analytic, const GradCheckOptions& options) {
  if (options.h <= 0.0) throw InputError("grad_check step must be positive");
  if (params.size() != analytic.size()) throw InputError("grad_check: parameter and gradient counts disagree");
  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const TensorRef& p = params[k];
    const ConstTensorRef& g = analytic[k];
    if (p.size() != g.size()) throw InputError("grad_check: gradient shape mismatch for " + p.name);

    std::vector<Index> coords(static_cast<std::size_t>(p.size()));
    std::iota(coords.begin(), coords.end(), Index{0});
    if (p.size() > options.samples_per_tensor) {
      std::vector<Index> picked;
      std::sample(coords.begin(), coords.end(), std::back_inserter(picked), options.samples_per_tensor, rng);
      coords = std::move(picked);
    }

    TensorCheck check;
    check.name = p.name;
    check.checked = static_cast<Index>(coords.size());
    for (Index c : coords) {
      const double saved = p.data[c];
      p.data[c] = saved + options.h;
      const double up = loss();
      p.data[c] = saved - options.h;
      const double down = loss();
      p.data[c] = saved;
      const double numeric = (up - down) / (2.0 * options.h);
      const double err = relative_error(g.data[c], numeric);
      if (err > check.max_rel_error || check.worst_index < 0) {
        check.max_rel_error = err;
        check.worst_index = c;
        check.worst_analytic = g.data[c];
        check.worst_numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.tensors.push_back(std::move(check));
  }
  report.passed = report.max_rel_error < options.tol;
  return report;
}

std::string format_report(const GradCheckReport& report) {
  std::ostringstream os;
  os.precision(6);
  for (const auto& t : report.tensors) {
    os << "  " << t.name << ": checked " << t.checked << ", max rel err " << std::scientific << t.max_rel_error;
    if (t.worst_index >= 0) {
      os << " at [" << t.worst_index << "] analytic " << t.worst_analytic << " numeric " << t.worst_numeric;
    }
    os << std::defaultfloat << "\n";
  }
  os << "  => " << (report.passed ? "PASS" : "FAIL") << " (max " << std::scientific << report.max_rel_error << ")\n";
  return os.str();
}

}  // namespace mpkg
