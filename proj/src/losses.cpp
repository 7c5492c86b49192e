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

#include "mpkg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpkg/errors.hpp"

namespace mpkg {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LogTerm log_sigmoid_clamped(double logit) {
  const double s = sigmoid(logit);
  if (s < kProbEps) return {std::log(kProbEps), 0.0};
  if (s > 1.0 - kProbEps) return {std::log(1.0 - kProbEps), 0.0};
  return {std::log(s), 1.0 - s};
}

LogTerm log_one_minus_sigmoid_clamped(double logit) {
  const double s = sigmoid(logit);
  if (s < kProbEps) return {std::log(1.0 - kProbEps), 0.0};
  if (s > 1.0 - kProbEps) return {std::log(kProbEps), 0.0};
  return {std::log1p(-s), -s};
}

ItemPool ItemPool::of(const ProductKnowledgeGraph& graph) {
  return {graph.num_items(), &graph.deleted_mask(), static_cast<Index>(graph.num_deleted())};
}

std::optional<ItemId> sample_negative(ItemId head, std::span<const ItemId> excluded, const ItemPool& pool,
                                      std::mt19937_64& rng) {
  Index available = pool.num_items - pool.num_deleted;
  if (pool.allowed(head)) --available;
  for (ItemId e : excluded) {
    if (e != head && pool.allowed(e)) --available;
  }
  if (available <= 0) return std::nullopt;
  auto admissible = [&](ItemId j) {
    return j != head && pool.allowed(j) && !std::binary_search(excluded.begin(), excluded.end(), j);
  };
  // Rejection is fast unless almost everything is excluded.
  if (available * 8 >= pool.num_items) {
    std::uniform_int_distribution<ItemId> pick(0, static_cast<ItemId>(pool.num_items - 1));
    for (;;) {
      const ItemId j = pick(rng);
      if (admissible(j)) return j;
    }
  }
  std::uniform_int_distribution<Index> pick(0, available - 1);
  Index target = pick(rng);
  for (Index j = 0; j < pool.num_items; ++j) {
    if (admissible(static_cast<ItemId>(j)) && target-- == 0) return static_cast<ItemId>(j);
  }
  return std::nullopt;
}

std::optional<ItemId> sample_negative_edge(const ProductKnowledgeGraph& graph, RelationId r, ItemId head,
                                           std::mt19937_64& rng) {
  if (r >= graph.num_relations()) throw InputError("relation " + std::to_string(r) + " out of range");
  if (head >= graph.num_items()) throw InputError("item " + std::to_string(head) + " out of range");
  const Adjacency adj = graph.relation_adjacency(r);
  return sample_negative(head, adj.neighbors(head), ItemPool::of(graph), rng);
}

std::vector<PairSample> sample_edge_pairs(std::span<const Edge> edges, const Adjacency& adjacency,
                                          const ItemPool& pool, int per_positive, std::mt19937_64& rng,
                                          std::size_t* skipped) {
  std::vector<PairSample> out;
  out.reserve(edges.size() * static_cast<std::size_t>(per_positive));
  std::size_t missing = 0;
  for (const Edge& e : edges) {
    for (int k = 0; k < per_positive; ++k) {
      const auto neg = sample_negative(e.head, adjacency.neighbors(e.head), pool, rng);
      if (!neg) {
        ++missing;
        break;
      }
      out.push_back({e.head, e.tail, *neg});
    }
  }
  if (skipped) *skipped = missing;
  return out;
}

std::size_t hnr_budget(const NeighborhoodIndex& index, Index num_items, std::size_t per_item) {
  return std::min(index.total_pairs(), per_item * static_cast<std::size_t>(num_items));
}

std::vector<PairSample> sample_neighbor_pairs(const NeighborhoodIndex& index, std::size_t budget,
                                              const ItemPool& pool, std::mt19937_64& rng) {
  std::vector<Edge> pairs;
  pairs.reserve(index.total_pairs());
  for (std::size_t i = 0; i < index.neighbors.size(); ++i) {
    if (!pool.allowed(static_cast<ItemId>(i))) continue;
    for (ItemId j : index.neighbors[i]) pairs.push_back({static_cast<ItemId>(i), j});
  }
  std::vector<Edge> chosen;
  if (budget >= pairs.size()) {
    chosen = std::move(pairs);
  } else {
    chosen.reserve(budget);
    std::sample(pairs.begin(), pairs.end(), std::back_inserter(chosen), budget, rng);
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);
  std::vector<PairSample> out;
  out.reserve(chosen.size());
  for (const Edge& e : chosen) {
    const auto neg = sample_negative(e.head, index.neighbors[e.head], pool, rng);
    if (neg) out.push_back({e.head, e.tail, *neg});
  }
  return out;
}

namespace {

void check_items(const Matrix& e, std::span<const PairSample> pairs, const char* what) {
  const auto n = static_cast<ItemId>(e.rows());
  for (const PairSample& p : pairs) {
    if (p.head >= n || p.tail >= n || p.negative >= n) {
      throw InputError(std::string(what) + ": sample refers to an item outside the embedding table");
    }
  }
}

// Sum of the pair terms on one embedding table. `grad_scale` multiplies every
// pair's gradient before it lands in `grad`.
double pair_terms(const Matrix& e, std::span<const PairSample> pairs, Matrix* grad, double grad_scale,
                  MraObjective objective) {
  double total = 0.0;
  for (const PairSample& p : pairs) {
    const double pos = e.row(p.head).dot(e.row(p.tail));
    const double neg = e.row(p.head).dot(e.row(p.negative));
    double d_pos = 0.0;
    double d_neg = 0.0;
    if (objective == MraObjective::Bce) {
      const LogTerm a = log_sigmoid_clamped(pos);
      const LogTerm b = log_one_minus_sigmoid_clamped(neg);
      total -= a.value + b.value;
      d_pos = -a.grad;
      d_neg = -b.grad;
    } else {
      const double sp = sigmoid(pos);
      const double sn = sigmoid(neg);
      total += (1.0 - sp) * (1.0 - sp) + sn * sn;
      d_pos = -2.0 * (1.0 - sp) * sp * (1.0 - sp);
      d_neg = 2.0 * sn * sn * (1.0 - sn);
    }
    if (grad) {
      d_pos *= grad_scale;
      d_neg *= grad_scale;
      grad->row(p.head) += d_pos * e.row(p.tail) + d_neg * e.row(p.negative);
      grad->row(p.tail) += d_pos * e.row(p.head);
      grad->row(p.negative) += d_neg * e.row(p.head);
    }
  }
  return total;
}

void prepare_grads(std::span<const Matrix> embeddings, std::vector<Matrix>* grad) {
  if (!grad) return;
  if (grad->size() != embeddings.size()) {
    grad->resize(embeddings.size());
  }
  for (std::size_t r = 0; r < embeddings.size(); ++r) {
    Matrix& g = (*grad)[r];
    if (g.rows() != embeddings[r].rows() || g.cols() != embeddings[r].cols()) {
      g = Matrix::Zero(embeddings[r].rows(), embeddings[r].cols());
    }
  }
}

}  // namespace

double kr_loss(std::span<const Matrix> embeddings, std::span<const std::vector<PairSample>> batches,
               std::vector<Matrix>* grad, double scale) {
  if (batches.size() != embeddings.size()) throw InputError("kr_loss: one batch per relation is required");
  prepare_grads(embeddings, grad);
  double total = 0.0;
  for (std::size_t r = 0; r < embeddings.size(); ++r) {
    const auto& batch = batches[r];
    if (batch.empty()) continue;
    check_items(embeddings[r], batch, "kr_loss");
    const double inv = 1.0 / static_cast<double>(batch.size());
    total += inv * pair_terms(embeddings[r], batch, grad ? &(*grad)[r] : nullptr, scale * inv, MraObjective::Bce);
  }
  return total;
}

double hnr_loss(const Matrix& concat, std::span<const PairSample> pairs, Matrix* grad, double scale) {
  check_items(concat, pairs, "hnr_loss");
  if (grad && (grad->rows() != concat.rows() || grad->cols() != concat.cols())) {
    *grad = Matrix::Zero(concat.rows(), concat.cols());
  }
  return pair_terms(concat, pairs, grad, scale, MraObjective::Bce);
}

double hnr_loss(const Matrix& concat, const NeighborhoodIndex& index, std::mt19937_64& rng, std::size_t budget,
                const ItemPool& pool) {
  const auto pairs = sample_neighbor_pairs(index, budget, pool, rng);
  return hnr_loss(concat, pairs);
}

double fr_loss(const Matrix& concat, const Matrix& decoder_weight, const Vector& decoder_bias, const Matrix& features,
               std::span<const ItemId> items, double sum_scale, const FrGradients& grad, double scale) {
  if (concat.cols() != decoder_weight.rows() || decoder_weight.cols() != features.cols() ||
      decoder_bias.size() != features.cols() || concat.rows() != features.rows()) {
    throw InputError("fr_loss: decoder shape does not match embeddings and features");
  }
  double total = 0.0;
  for (ItemId i : items) {
    if (i >= features.rows()) throw InputError("fr_loss: item " + std::to_string(i) + " out of range");
    const Vector recon = decoder_weight.transpose() * concat.row(i).transpose() + decoder_bias;
    const Vector residual = recon - features.row(i).transpose();
    total += residual.squaredNorm();
    const Vector d = (2.0 * sum_scale * scale) * residual;
    if (grad.weight) grad.weight->noalias() += concat.row(i).transpose() * d.transpose();
    if (grad.bias) *grad.bias += d;
    if (grad.concat) grad.concat->row(i) += (decoder_weight * d).transpose();
  }
  return sum_scale * total;
}

double fr_loss(const Matrix& concat, const Matrix& decoder_weight, const Vector& decoder_bias, const Matrix& features) {
  std::vector<ItemId> all(static_cast<std::size_t>(features.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<ItemId>(i);
  return fr_loss(concat, decoder_weight, decoder_bias, features, all);
}

double mra_loss(std::span<const Matrix> embeddings, const SelfExcitationParams& gate,
                std::span<const std::vector<PairSample>> batches, std::vector<Matrix>* grad_embeddings,
                SelfExcitationParams* grad_gate, double scale, MraObjective objective) {
  const std::size_t count = embeddings.size();
  if (count < 2) throw InputError("mra_loss needs at least two relations");
  if (batches.size() != count) throw InputError("mra_loss: one batch per relation is required");
  prepare_grads(embeddings, grad_embeddings);
  const bool want_grad = grad_embeddings || grad_gate;
  SelfExcitationParams scratch;
  if (want_grad && !grad_gate) {
    scratch = {Matrix::Zero(gate.input_dim(), gate.hidden_dim()), Vector::Zero(gate.hidden_dim()),
               Vector::Zero(gate.hidden_dim())};
    grad_gate = &scratch;
  }
  double total = 0.0;
  for (std::size_t r = 0; r < count; ++r) {
    const auto& batch = batches[r];
    if (batch.empty()) continue;
    const auto active = all_relations_except(count, static_cast<RelationId>(r));
    const GateTrace trace = gate_forward(gate, embeddings, active);
    const Matrix fused = toa_weighted_sum(embeddings, {trace.active, trace.weights});
    check_items(fused, batch, "mra_loss");
    const double inv = 1.0 / static_cast<double>(batch.size());
    Matrix d_fused;
    if (want_grad) d_fused = Matrix::Zero(fused.rows(), fused.cols());
    total += inv * pair_terms(fused, batch, want_grad ? &d_fused : nullptr, scale * inv, objective);
    if (!want_grad) continue;

    Vector d_weights(static_cast<Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) {
      d_weights[static_cast<Index>(a)] = (d_fused.array() * embeddings[active[a]].array()).sum();
    }
    std::vector<Vector> d_squeeze;
    gate_backward(gate, trace, d_weights, *grad_gate, grad_embeddings ? &d_squeeze : nullptr);
    if (!grad_embeddings) continue;
    const double inv_rows = fused.rows() > 0 ? 1.0 / static_cast<double>(fused.rows()) : 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      Matrix& g = (*grad_embeddings)[active[a]];
      g += trace.weights[static_cast<Index>(a)] * d_fused;
      g.rowwise() += inv_rows * d_squeeze[a].transpose();
    }
  }
  return total;
}

}  // namespace mpkg
