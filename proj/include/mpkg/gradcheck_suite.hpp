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
#include <string>
#include <vector>

#include "mpkg/finetune.hpp"
#include "mpkg/gradcheck.hpp"
#include "mpkg/graph.hpp"
#include "mpkg/interactions.hpp"
#include "mpkg/params.hpp"
#include "mpkg/pretrain.hpp"

namespace mpkg {

/// Small model and data for finite-difference checks: 20 items, 3 relations,
/// d = 8, d_in = 16, with samples drawn once so every loss is deterministic.
struct GradCheckFixture {
  ProductKnowledgeGraph graph;
  std::vector<Matrix> propagated;
  ModelParams params;
  PretrainBatch batch;
  InteractionDataset dataset;
  std::vector<BprTriple> triples;
};

GradCheckFixture make_gradcheck_fixture(std::uint64_t seed);

struct LossCheck {
  std::string loss;
  GradCheckReport report;
};

/// KR, FR, HNR, MRA and the weighted total over all parameters, then BPR over
/// the gate.
std::vector<LossCheck> run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& options = {});

std::string format_suite(const std::vector<LossCheck>& checks);

}  // namespace mpkg
