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
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mpkg/adaptation.hpp"
#include "mpkg/graph.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

/// Sigmoid outputs are clipped to [eps, 1 - eps] before any log.
inline constexpr double kProbEps = 1e-7;

double sigmoid(double x);

/// A log-probability term and its derivative with respect to the logit. The
/// derivative is zero where the clip is active.
struct LogTerm {
  double value = 0.0;
  double grad = 0.0;
};

LogTerm log_sigmoid_clamped(double logit);            // log sigma(x)
LogTerm log_one_minus_sigmoid_clamped(double logit);  // log(1 - sigma(x))

/// A positive pair (head, tail) and the negative (head, negative) drawn for it.
struct PairSample {
  ItemId head = 0;
  ItemId tail = 0;
  ItemId negative = 0;
  auto operator<=>(const PairSample&) const = default;
};

/// Items eligible as negatives: all items not flagged deleted.
struct ItemPool {
  Index num_items = 0;
  const std::vector<bool>* deleted = nullptr;
  Index num_deleted = 0;

  static ItemPool of(const ProductKnowledgeGraph& graph);
  static ItemPool all(Index num_items) { return {num_items, nullptr, 0}; }
  bool allowed(ItemId i) const { return i < num_items && !(deleted && (*deleted)[i]); }
};

/// Uniform item j != head with j outside `excluded` (sorted), by rejection.
/// Returns nullopt when no such item exists.
std::optional<ItemId> sample_negative(ItemId head, std::span<const ItemId> excluded, const ItemPool& pool,
                                      std::mt19937_64& rng);

/// Negative tail for a positive edge of relation r: any item not adjacent to
/// `head` under r (in either direction).
std::optional<ItemId> sample_negative_edge(const ProductKnowledgeGraph& graph, RelationId r, ItemId head,
                                           std::mt19937_64& rng);

/// Positives of one relation paired with fresh negatives, `per_positive`
/// samples each. Positives with no admissible negative are dropped; `skipped`
/// receives how many.
std::vector<PairSample> sample_edge_pairs(std::span<const Edge> edges, const Adjacency& adjacency,
                                          const ItemPool& pool, int per_positive, std::mt19937_64& rng,
                                          std::size_t* skipped = nullptr);

/// min(total neighbor pairs, per_item * num_items).
std::size_t hnr_budget(const NeighborhoodIndex& index, Index num_items, std::size_t per_item = 50);

/// `budget` neighbor pairs drawn uniformly without replacement, each with a
/// negative outside the head's neighborhood, in random order.
std::vector<PairSample> sample_neighbor_pairs(const NeighborhoodIndex& index, std::size_t budget,
                                              const ItemPool& pool, std::mt19937_64& rng);

// Each loss returns its unweighted value. When a gradient output is given,
// `scale` times the gradient is accumulated into it.

/// Knowledge reconstruction: for each relation, the mean over its batch of
/// -(log s(i,j) + log(1 - s(i,j-))) with s = sigmoid(E^r_i . E^r_j), summed
/// over relations.
double kr_loss(std::span<const Matrix> embeddings, std::span<const std::vector<PairSample>> batches,
               std::vector<Matrix>* grad = nullptr, double scale = 1.0);

/// Neighbor reconstruction on the concatenated embeddings: the plain sum of
/// the pair terms.
double hnr_loss(const Matrix& concat, std::span<const PairSample> pairs, Matrix* grad = nullptr, double scale = 1.0);

/// Samples the pair budget from `index` and evaluates hnr_loss on it.
double hnr_loss(const Matrix& concat, const NeighborhoodIndex& index, std::mt19937_64& rng, std::size_t budget,
                const ItemPool& pool);

struct FrGradients {
  Matrix* concat = nullptr;
  Matrix* weight = nullptr;
  Vector* bias = nullptr;
};

/// Feature reconstruction through a linear decoder:
/// sum_scale * sum_{i in items} ||X_i - (concat_i W + b)||^2.
double fr_loss(const Matrix& concat, const Matrix& decoder_weight, const Vector& decoder_bias, const Matrix& features,
               std::span<const ItemId> items, double sum_scale = 1.0, const FrGradients& grad = {},
               double scale = 1.0);

/// Full-sum version over every row.
double fr_loss(const Matrix& concat, const Matrix& decoder_weight, const Vector& decoder_bias, const Matrix& features);

enum class MraObjective { Bce, Mse };

/// Meta relation adaptation. For each target relation r, the other relations
/// are fused by the gate and the fused embeddings score r's batch exactly as
/// in kr_loss. With MraObjective::Mse the pair term is (1-b)^2 + b-^2 instead.
/// Needs at least two relations.
double mra_loss(std::span<const Matrix> embeddings, const SelfExcitationParams& gate,
                std::span<const std::vector<PairSample>> batches, std::vector<Matrix>* grad_embeddings = nullptr,
                SelfExcitationParams* grad_gate = nullptr, double scale = 1.0,
                MraObjective objective = MraObjective::Bce);

}  // namespace mpkg
