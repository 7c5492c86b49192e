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

#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/params.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

/// New items and the edges attaching them. New items take ids
/// graph.num_items(), graph.num_items() + 1, ... in row order; edges may also
/// join existing items, for instance to restore a deleted one.
struct ZeroShotBatch {
  Matrix features;
  std::vector<IndexedTriplet> edges;

  Index size() const { return features.rows(); }
  bool empty() const { return features.rows() == 0 && edges.empty(); }
};

/// The updated graph: extra feature rows, extra edges, and every item touched
/// by a batch edge no longer flagged deleted.
ProductKnowledgeGraph attach(const ProductKnowledgeGraph& graph, const ZeroShotBatch& batch);

struct InferenceResult {
  ProductKnowledgeGraph graph;
  std::vector<Matrix> relation_embeddings;
  Matrix fused;
};

/// Re-propagates over the updated graph, projects with the frozen encoder and
/// fuses with the gate over all relations.
InferenceResult inductive_infer(const ProductKnowledgeGraph& graph, const ZeroShotBatch& batch,
                                const ModelParams& params, int layers, int threads = 1);

}  // namespace mpkg
