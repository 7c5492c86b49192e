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

#include "mpkg/gradcheck_suite.hpp"

#include <random>

#include <fmt/format.h>

#include "mpkg/encoder.hpp"
#include "mpkg/losses.hpp"
#include "mpkg/random.hpp"

namespace mpkg {

GradCheckFixture make_gradcheck_fixture(std::uint64_t seed) {
  constexpr Index kItems = 20;
  constexpr Index kInput = 16;
  constexpr Index kDim = 8;
  constexpr std::size_t kRelations = 3;
  std::mt19937_64 rng = make_rng(seed, 0x6c);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 0.5);

  std::vector<std::vector<Edge>> edges(kRelations);
  for (auto& rel : edges) {
    for (Index i = 0; i < kItems; ++i) {
      for (Index j = i + 1; j < kItems; ++j) {
        if (unit(rng) < 0.15) rel.push_back({static_cast<ItemId>(i), static_cast<ItemId>(j)});
      }
    }
  }
  Matrix features(kItems, kInput);
  for (Index k = 0; k < features.size(); ++k) features.data()[k] = gauss(rng);

  GradCheckFixture f;
  f.graph = ProductKnowledgeGraph(canonical_relations(), std::move(edges), std::move(features));
  f.propagated = propagate_relations(f.graph, kDefaultLayers);
  f.params = init_model_params(kRelations, kInput, kDim, kDefaultReduction, seed);

  const ItemPool pool = ItemPool::of(f.graph);
  f.batch.edges.resize(kRelations);
  for (std::size_t r = 0; r < kRelations; ++r) {
    f.batch.edges[r] = sample_edge_pairs(f.graph.edges(static_cast<RelationId>(r)),
                                         f.graph.relation_adjacency(static_cast<RelationId>(r)), pool, 1, rng);
  }
  const NeighborhoodIndex index = khop_neighbors(f.graph, 2);
  f.batch.neighbors = sample_neighbor_pairs(index, hnr_budget(index, kItems), pool, rng);
  for (Index i = 0; i < kItems; ++i) f.batch.items.push_back(static_cast<ItemId>(i));

  std::vector<Interaction> events;
  std::int64_t ts = 0;
  for (UserId u = 0; u < 6; ++u) {
    for (int k = 0; k < 5; ++k) {
      events.push_back({u, static_cast<ItemId>((u * 3 + static_cast<UserId>(k) * 7) % kItems), ++ts});
    }
  }
  f.dataset = chronological_split(std::move(events), kItems);
  f.triples = sample_bpr_triples(f.dataset, kItems, rng);
  return f;
}

std::vector<LossCheck> run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& options) {
  GradCheckFixture f = make_gradcheck_fixture(seed);
  std::vector<LossCheck> out;

  const LossWeights defaults;
  const std::pair<const char*, LossWeights> cases[] = {
      {"KR", {1.0, 0.0, 0.0, 0.0}},
      {"FR", {0.0, 1.0, 0.0, 0.0}},
      {"HNR", {0.0, 0.0, 1.0, 0.0}},
      {"MRA", {0.0, 0.0, 0.0, 1.0}},
      {"total", defaults},
  };
  const auto params = named_tensors(f.params);
  for (const auto& [name, weights] : cases) {
    const PretrainObjective objective(f.propagated, f.graph.features(), weights);
    ModelParams grad;
    objective.evaluate(f.params, f.batch, &grad);
    const auto analytic = named_tensors(std::as_const(grad));
    auto loss = [&] { return objective.evaluate(f.params, f.batch).total; };
    out.push_back({name, grad_check(loss, params, analytic, options)});
  }

  std::vector<Matrix> e = encode_relations(f.propagated, f.params);
  ModelParams grad = f.params.zeros_like();
  bpr_gate_loss(f.params.gate, e, f.dataset, f.triples, &grad.gate);
  std::vector<TensorRef> gate_params;
  std::vector<ConstTensorRef> gate_grads;
  const auto all_grads = named_tensors(std::as_const(grad));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!is_gate_tensor(params[k].name)) continue;
    gate_params.push_back(params[k]);
    gate_grads.push_back(all_grads[k]);
  }
  auto bpr = [&] { return bpr_gate_loss(f.params.gate, e, f.dataset, f.triples); };
  out.push_back({"BPR", grad_check(bpr, gate_params, gate_grads, options)});
  return out;
}

std::string format_suite(const std::vector<LossCheck>& checks) {
  std::string out;
  for (const LossCheck& c : checks) {
    out += fmt::format("== {} ==\n{}", c.loss, format_report(c.report));
  }
  return out;
}

}  // namespace mpkg
