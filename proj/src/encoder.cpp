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

#include "mpkg/encoder.hpp"

#include "mpkg/random.hpp"

#include <random>

namespace mpkg {

RelationPropagator RelationPropagator::build(const ProductKnowledgeGraph& graph, RelationId r, int layers,
                                             int threads) {
  RelationPropagator p;
  p.relation = r;
  p.layers = layers;
  p.norm_adj = build_normalized_adjacency<double>(r_pkg(graph, r));
  p.propagated = propagate(p.norm_adj, graph.features(), layers, threads);
  return p;
}

std::vector<Matrix> propagate_relations(const ProductKnowledgeGraph& graph, int layers, int threads) {
  std::vector<Matrix> out;
  out.reserve(graph.num_relations());
  for (std::size_t r = 0; r < graph.num_relations(); ++r) {
    out.push_back(RelationPropagator::build(graph, static_cast<RelationId>(r), layers, threads).propagated);
  }
  return out;
}

void fill_uniform(Matrix& m, double bound, std::uint64_t seed, std::uint64_t stream) {
  std::mt19937_64 rng = make_rng(seed, stream);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

EncoderParams init_encoder_params(std::size_t num_relations, Index d_in, Index d, std::uint64_t seed) {
  if (num_relations == 0 || d_in < 1 || d < 1) throw InputError("encoder dimensions must be at least 1");
  EncoderParams params;
  const double bound = xavier_bound(d_in, d);
  for (std::size_t r = 0; r < num_relations; ++r) {
    Matrix w(d_in, d);
    fill_uniform(w, bound, seed, r);
    params.weights.push_back(std::move(w));
  }
  return params;
}

}  // namespace mpkg
