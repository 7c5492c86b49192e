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

#include "mpkg/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mpkg/encoder.hpp"
#include "mpkg/errors.hpp"
#include "mpkg/evaluation.hpp"
#include "mpkg/losses.hpp"
#include "mpkg/pretrain.hpp"
#include "mpkg/random.hpp"

namespace mpkg {

std::vector<BprTriple> sample_bpr_triples(const InteractionDataset& dataset, Index num_items, std::mt19937_64& rng,
                                          const std::vector<bool>* excluded) {
  ItemPool pool{num_items, excluded, 0};
  if (excluded) {
    for (Index i = 0; i < num_items && i < static_cast<Index>(excluded->size()); ++i) pool.num_deleted += (*excluded)[i];
  }
  std::vector<std::vector<ItemId>> history(dataset.train_items.size());
  std::vector<char> ready(dataset.train_items.size(), 0);
  const auto no_head = static_cast<ItemId>(num_items);
  std::vector<BprTriple> out;
  std::size_t skipped = 0;
  for (std::size_t k = 0; k < dataset.events.size(); ++k) {
    if (dataset.split[k] != Split::Train) continue;
    const Interaction& e = dataset.events[k];
    if (!ready[e.user]) {
      history[e.user] = dataset.train_item_set(e.user);
      ready[e.user] = 1;
    }
    const auto neg = sample_negative(no_head, history[e.user], pool, rng);
    if (!neg) {
      ++skipped;
      continue;
    }
    out.push_back({e.user, e.item, *neg});
  }
  if (skipped > 0) spdlog::warn("{} train events skipped: user interacted with every item", skipped);
  return out;
}

namespace {

void check_triples(const Matrix& fused, const InteractionDataset& dataset, std::span<const BprTriple> triples) {
  const auto n = static_cast<ItemId>(fused.rows());
  for (const BprTriple& t : triples) {
    if (t.positive >= n || t.negative >= n) throw InputError("BPR triple refers to an item without an embedding");
    if (t.user >= dataset.train_items.size() || dataset.train_items[t.user].empty()) {
      throw InputError("BPR triple for a user without train interactions");
    }
  }
}

// Sum of BPR terms; with d_fused, accumulates d loss / d fused.
double bpr_terms(const Matrix& fused, const InteractionDataset& dataset, std::span<const BprTriple> triples,
                 Matrix* d_fused) {
  check_triples(fused, dataset, triples);
  double total = 0.0;
  for (const BprTriple& t : triples) {
    const auto& items = dataset.train_items[t.user];
    const Vector eu = mean_rows(fused, items);
    const double x = eu.dot(fused.row(t.positive)) - eu.dot(fused.row(t.negative));
    const LogTerm term = log_sigmoid_clamped(x);
    total -= term.value;
    if (!d_fused || term.grad == 0.0) continue;
    const double delta = -term.grad;
    d_fused->row(t.positive) += delta * eu.transpose();
    d_fused->row(t.negative) -= delta * eu.transpose();
    const Vector d_user = (delta / static_cast<double>(items.size())) *
                          (fused.row(t.positive) - fused.row(t.negative)).transpose();
    for (ItemId i : items) d_fused->row(i) += d_user.transpose();
  }
  return total;
}

}  // namespace

double bpr_loss(const Matrix& fused, const InteractionDataset& dataset, std::span<const BprTriple> triples) {
  return bpr_terms(fused, dataset, triples, nullptr);
}

double bpr_gate_loss(const SelfExcitationParams& gate, std::span<const Matrix> relation_embeddings,
                     const InteractionDataset& dataset, std::span<const BprTriple> triples,
                     SelfExcitationParams* grad) {
  const auto active = all_relations(relation_embeddings.size());
  const GateTrace trace = gate_forward(gate, relation_embeddings, active);
  const Matrix fused = toa_weighted_sum(relation_embeddings, {trace.active, trace.weights});
  if (!grad) return bpr_terms(fused, dataset, triples, nullptr);
  Matrix d_fused = Matrix::Zero(fused.rows(), fused.cols());
  const double loss = bpr_terms(fused, dataset, triples, &d_fused);
  Vector d_weights(static_cast<Index>(active.size()));
  for (std::size_t r = 0; r < active.size(); ++r) {
    d_weights[static_cast<Index>(r)] = (d_fused.array() * relation_embeddings[r].array()).sum();
  }
  gate_backward(gate, trace, d_weights, *grad);
  return loss;
}

void FinetuneConfig::validate() const {
  if (epochs < 0) throw InputError("fine-tune epoch count must be non-negative");
  if (!(lr > 0.0)) throw InputError("fine-tune learning rate must be positive");
  if (!(l2 >= 0.0)) throw InputError("fine-tune L2 weight must be non-negative");
  if (batch_size < 1) throw InputError("fine-tune batch size must be at least 1");
  if (layers < 0) throw InputError("layer count must be non-negative");
  if (selection_cutoff < 1) throw InputError("selection cutoff must be at least 1");
  if (threads < 1) throw InputError("thread count must be at least 1");
}

FinetuneResult finetune(const ModelParams& pretrained, std::span<const Matrix> relation_embeddings,
                        const InteractionDataset& dataset, const FinetuneConfig& config,
                        std::span<const Matrix> eval_embeddings,
                        const std::function<void(const FinetuneEpoch&)>& on_epoch) {
  config.validate();
  if (relation_embeddings.size() != pretrained.num_relations()) {
    throw InputError("fine-tuning needs one embedding matrix per relation");
  }
  const std::span<const Matrix> eval_e = eval_embeddings.empty() ? relation_embeddings : eval_embeddings;
  const Index num_items = relation_embeddings[0].rows();

  FinetuneResult result;
  result.params = pretrained;
  result.opt_state = init_opt_state(pretrained, AdamConfig{config.lr, config.l2});
  std::mt19937_64 rng = make_rng(config.seed, 0xf17e);
  result.rng_state = rng_state(rng);
  if (config.epochs == 0) return result;

  const std::set<std::string> frozen = non_gate_tensors(pretrained);
  ModelParams params = pretrained;
  OptState opt = result.opt_state;
  double best = -std::numeric_limits<double>::infinity();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  EvalOptions eval_options;
  eval_options.topn = {config.selection_cutoff};
  eval_options.threads = config.threads;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<BprTriple> triples = sample_bpr_triples(dataset, num_items, rng);
    std::shuffle(triples.begin(), triples.end(), rng);
    double sum = 0.0;
    for (std::size_t lo = 0; lo < triples.size(); lo += batch_size) {
      const std::span<const BprTriple> batch(triples.data() + lo, std::min(batch_size, triples.size() - lo));
      ModelParams grad = params.zeros_like();
      const double loss = bpr_gate_loss(params.gate, relation_embeddings, dataset, batch, &grad.gate);
      if (!std::isfinite(loss)) {
        throw NumericalError(fmt::format("non-finite BPR loss at epoch {}, batch {}", epoch, lo / batch_size));
      }
      sum += loss;
      adam_step(params, grad, opt, frozen);
    }
    check_finite(params, fmt::format("gate after fine-tune epoch {}", epoch));

    FinetuneEpoch record;
    record.epoch = epoch;
    record.loss = triples.empty() ? 0.0 : sum / static_cast<double>(triples.size());
    record.weights = relation_weights(params.gate, relation_embeddings).weights;
    const EvalReport report =
        eval_zsir(fuse_all(params.gate, eval_e), dataset, CandidateSetting::All, Split::Valid, eval_options);
    bool improved = true;
    if (const CohortMetrics* all = report.find(Cohort::All)) {
      record.valid_ndcg = all->ndcg[0];
      improved = all->ndcg[0] > best;
      if (improved) best = all->ndcg[0];
    }
    if (improved) {
      result.params = params;
      result.opt_state = opt;
      result.rng_state = rng_state(rng);
      result.best_epoch = epoch;
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return result;
}

FinetuneResult finetune(const ModelParams& pretrained, const ProductKnowledgeGraph& graph,
                        const InteractionDataset& dataset, const FinetuneConfig& config,
                        std::span<const Matrix> eval_embeddings) {
  config.validate();
  const auto e = encode_relations(propagate_relations(graph, config.layers, config.threads), pretrained, config.threads);
  return finetune(pretrained, e, dataset, config, eval_embeddings);
}

std::string format_finetune_history_tsv(std::span<const FinetuneEpoch> history) {
  std::string out = "epoch\tL_BPR\tvalid_ndcg";
  const Index relations = history.empty() ? 0 : history.front().weights.size();
  for (Index r = 0; r < relations; ++r) out += fmt::format("\tw_{}", r);
  out += '\n';
  for (const FinetuneEpoch& h : history) {
    out += fmt::format("{}\t{:.17g}\t{}", h.epoch, h.loss,
                       h.valid_ndcg ? fmt::format("{:.17g}", *h.valid_ndcg) : std::string("NA"));
    for (Index r = 0; r < h.weights.size(); ++r) out += fmt::format("\t{:.17g}", h.weights[r]);
    out += '\n';
  }
  return out;
}

}  // namespace mpkg
