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

#include "mpkg/inference.hpp"

#include <string>

#include "mpkg/adaptation.hpp"
#include "mpkg/encoder.hpp"
#include "mpkg/errors.hpp"
#include "mpkg/pretrain.hpp"

namespace mpkg {

ProductKnowledgeGraph attach(const ProductKnowledgeGraph& graph, const ZeroShotBatch& batch) {
  const Index old_n = graph.num_items();
  if (batch.size() > 0 && batch.features.cols() != graph.feature_dim()) {
    throw InputError("zero-shot features have width " + std::to_string(batch.features.cols()) + ", expected " +
                     std::to_string(graph.feature_dim()));
  }
  const Index n = old_n + batch.size();
  Matrix features(n, graph.feature_dim());
  features.topRows(old_n) = graph.features();
  if (batch.size() > 0) features.bottomRows(batch.size()) = batch.features;

  std::vector<std::vector<Edge>> edges(graph.num_relations());
  for (std::size_t r = 0; r < edges.size(); ++r) {
    const auto existing = graph.edges(static_cast<RelationId>(r));
    edges[r].assign(existing.begin(), existing.end());
  }
  std::vector<bool> deleted = graph.deleted_mask();
  deleted.resize(static_cast<std::size_t>(n), false);
  for (const IndexedTriplet& t : batch.edges) {
    if (t.relation >= edges.size()) throw InputError("zero-shot edge has unknown relation " + std::to_string(t.relation));
    if (t.head >= n || t.tail >= n) {
      throw InputError("zero-shot edge (" + std::to_string(t.head) + ", " + std::to_string(t.tail) +
                       ") refers to an unknown item");
    }
    edges[t.relation].push_back({t.head, t.tail});
    deleted[t.head] = false;
    deleted[t.tail] = false;
  }
  return ProductKnowledgeGraph(graph.relation_names(), std::move(edges), std::move(features), std::move(deleted));
}

InferenceResult inductive_infer(const ProductKnowledgeGraph& graph, const ZeroShotBatch& batch,
                                const ModelParams& params, int layers, int threads) {
  if (params.num_relations() != graph.num_relations()) {
    throw InputError("model has " + std::to_string(params.num_relations()) + " relations, graph has " +
                     std::to_string(graph.num_relations()));
  }
  if (params.input_dim() != graph.feature_dim()) throw InputError("model input width does not match item features");
  InferenceResult out{attach(graph, batch), {}, {}};
  const auto propagated = propagate_relations(out.graph, layers, threads);
  out.relation_embeddings = encode_relations(propagated, params, threads);
  out.fused = fuse_all(params.gate, out.relation_embeddings);
  return out;
}

}  // namespace mpkg
