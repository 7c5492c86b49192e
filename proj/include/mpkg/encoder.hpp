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

#include <cmath>
#include <cstdint>
#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/sparse.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

inline constexpr int kDefaultLayers = 3;

/// D^-1/2 (A + I) D^-1/2 for one relation, with A the symmetrized edge set and
/// D the degree matrix of A + I.
template <typename Scalar = double>
CsrMatrix<Scalar> build_normalized_adjacency(const RPkgView& view) {
  const Adjacency adj(view.num_items, view.edges);
  const Index n = view.num_items;
  CsrMatrix<Scalar> out;
  out.rows = out.cols = n;
  out.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Scalar> inv_sqrt_degree(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index degree = adj.degree(static_cast<ItemId>(i)) + 1;
    inv_sqrt_degree[i] = Scalar(1) / std::sqrt(static_cast<Scalar>(degree));
    out.row_offsets[i + 1] = out.row_offsets[i] + degree;
  }
  out.col_indices.reserve(static_cast<std::size_t>(out.row_offsets.back()));
  out.values.reserve(static_cast<std::size_t>(out.row_offsets.back()));
  for (Index i = 0; i < n; ++i) {
    bool self_done = false;
    auto push = [&](Index j) {
      out.col_indices.push_back(j);
      out.values.push_back(inv_sqrt_degree[i] * inv_sqrt_degree[j]);
    };
    for (ItemId j : adj.neighbors(static_cast<ItemId>(i))) {
      if (!self_done && static_cast<Index>(j) > i) {
        push(i);
        self_done = true;
      }
      push(j);
    }
    if (!self_done) push(i);
  }
  return out;
}

/// Applies the normalized adjacency `layers` times to `x`.
template <typename Scalar, typename Derived>
MatrixX<Scalar> propagate(const CsrMatrix<Scalar>& norm_adj, const Eigen::MatrixBase<Derived>& x, int layers,
                          int threads = 1) {
  if (layers < 0) throw InputError("layer count must be non-negative");
  if (x.rows() != norm_adj.rows) {
    throw InputError("propagate: feature rows (" + std::to_string(x.rows()) + ") do not match graph size (" +
                     std::to_string(norm_adj.rows) + ")");
  }
  MatrixX<Scalar> out = x;
  for (int m = 0; m < layers; ++m) out = spmm(norm_adj, out, threads);
  return out;
}

/// propagated * w. Every output entry sums over the inner index in ascending
/// order, independent of which rows are computed together.
template <typename Scalar>
MatrixX<Scalar> encode(const MatrixX<Scalar>& propagated, const MatrixX<Scalar>& w) {
  if (propagated.cols() != w.rows()) {
    throw InputError("encode: inner dimensions disagree (" + std::to_string(propagated.cols()) + " vs " +
                     std::to_string(w.rows()) + ")");
  }
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(propagated.rows(), w.cols());
  for (Index i = 0; i < propagated.rows(); ++i) {
    for (Index k = 0; k < w.rows(); ++k) out.row(i) += propagated(i, k) * w.row(k);
  }
  return out;
}

/// Cached per-relation propagation: normalized adjacency and its `layers`-th
/// application to the item features.
struct RelationPropagator {
  RelationId relation = 0;
  CsrMatrix<double> norm_adj;
  int layers = kDefaultLayers;
  Matrix propagated;

  static RelationPropagator build(const ProductKnowledgeGraph& graph, RelationId r, int layers, int threads = 1);
};

/// Propagated features for every relation of `graph`.
std::vector<Matrix> propagate_relations(const ProductKnowledgeGraph& graph, int layers, int threads = 1);

struct EncoderParams {
  std::vector<Matrix> weights;  // one d_in x d matrix per relation
};

/// Uniform on [-sqrt(6/(d_in+d)), +sqrt(6/(d_in+d))], one independent stream
/// per relation.
EncoderParams init_encoder_params(std::size_t num_relations, Index d_in, Index d, std::uint64_t seed);

/// Fills `m` uniformly on [-bound, bound] from a stream keyed by (seed, stream).
void fill_uniform(Matrix& m, double bound, std::uint64_t seed, std::uint64_t stream);

inline double xavier_bound(Index fan_in, Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace mpkg
