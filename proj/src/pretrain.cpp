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

#include "mpkg/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mpkg/encoder.hpp"
#include "mpkg/errors.hpp"
#include "mpkg/evaluation.hpp"
#include "mpkg/parallel.hpp"
#include "mpkg/random.hpp"

namespace mpkg {

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  kr += o.kr;
  fr += o.fr;
  hnr += o.hnr;
  mra += o.mra;
  total += o.total;
  return *this;
}

LossBreakdown& LossBreakdown::operator*=(double s) {
  kr *= s;
  fr *= s;
  hnr *= s;
  mra *= s;
  total *= s;
  return *this;
}

double total_loss(const LossWeights& w, const LossBreakdown& c) {
  return w.alpha * c.kr + w.beta * c.fr + w.theta * c.hnr + w.gamma * c.mra;
}

void PretrainConfig::validate() const {
  const LossWeights& w = weights;
  for (double v : {w.alpha, w.beta, w.theta, w.gamma}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("loss weights must be finite and non-negative");
  }
  if (w.alpha + w.beta + w.theta + w.gamma <= 0.0) throw InputError("at least one loss weight must be positive");
  if (hops < 1) throw InputError("hop count must be at least 1");
  if (layers < 0) throw InputError("layer count must be non-negative");
  if (dim < 1) throw InputError("embedding width must be at least 1");
  if (batch_size < 1) throw InputError("batch size must be at least 1");
  if (epochs < 0) throw InputError("epoch count must be non-negative");
  if (!(lr > 0.0)) throw InputError("learning rate must be positive");
  if (!(l2 >= 0.0)) throw InputError("L2 weight must be non-negative");
  if (negatives_per_positive < 1) throw InputError("negatives per positive must be at least 1");
  if (reduction < 1) throw InputError("gate reduction must be at least 1");
  if (threads < 1) throw InputError("thread count must be at least 1");
}

std::vector<Matrix> encode_relations(std::span<const Matrix> propagated, const ModelParams& params, int threads) {
  if (propagated.size() != params.encoder.size()) throw InputError("one encoder matrix per relation is required");
  std::vector<Matrix> out(propagated.size());
  for (std::size_t r = 0; r < propagated.size(); ++r) {
    const Matrix& p = propagated[r];
    const Matrix& w = params.encoder[r];
    if (p.cols() != w.rows()) throw InputError("propagated features do not match the encoder input width");
    Matrix e = Matrix::Zero(p.rows(), w.cols());
    parallel_for(0, p.rows(), threads, [&](Index i) {
      for (Index k = 0; k < w.rows(); ++k) e.row(i) += p(i, k) * w.row(k);
    });
    out[r] = std::move(e);
  }
  return out;
}

PretrainObjective::PretrainObjective(std::vector<Matrix> propagated, Matrix features, LossWeights weights,
                                     MraObjective mra)
    : propagated_(std::move(propagated)), features_(std::move(features)), weights_(weights), mra_(mra) {
  for (const Matrix& p : propagated_) {
    if (p.rows() != features_.rows() || p.cols() != features_.cols()) {
      throw InputError("propagated features must match the raw feature shape");
    }
  }
}

namespace {

void require_finite(double value, const char* term) {
  if (!std::isfinite(value)) throw NumericalError(fmt::format("non-finite {} loss", term));
}

}  // namespace

LossBreakdown PretrainObjective::evaluate(const ModelParams& params, const PretrainBatch& batch,
                                          ModelParams* grad) const {
  const std::size_t num_relations = propagated_.size();
  if (params.num_relations() != num_relations) throw InputError("parameter relation count does not match the graph");
  const std::vector<Matrix> e = encode_relations(propagated_, params);
  std::vector<Matrix> de;
  if (grad) {
    *grad = params.zeros_like();
    for (const Matrix& m : e) de.push_back(Matrix::Zero(m.rows(), m.cols()));
  }
  LossBreakdown out;
  const LossWeights& w = weights_;
  if (w.alpha > 0.0) {
    out.kr = kr_loss(e, batch.edges, grad ? &de : nullptr, w.alpha);
    require_finite(out.kr, "KR");
  }
  if (w.beta > 0.0 || w.theta > 0.0) {
    const Matrix concat = toa_concat(e);
    Matrix dconcat;
    if (grad) dconcat = Matrix::Zero(concat.rows(), concat.cols());
    if (w.beta > 0.0) {
      FrGradients g;
      if (grad) g = {&dconcat, &grad->decoder_weight, &grad->decoder_bias};
      out.fr = fr_loss(concat, params.decoder_weight, params.decoder_bias, features_, batch.items, batch.item_scale,
                       g, w.beta);
      require_finite(out.fr, "FR");
    }
    if (w.theta > 0.0) {
      out.hnr = hnr_loss(concat, batch.neighbors, grad ? &dconcat : nullptr, w.theta);
      require_finite(out.hnr, "HNR");
    }
    if (grad) {
      const Index d = e[0].cols();
      for (std::size_t r = 0; r < num_relations; ++r) de[r] += dconcat.middleCols(static_cast<Index>(r) * d, d);
    }
  }
  if (w.gamma > 0.0 && num_relations >= 2) {
    out.mra = mra_loss(e, params.gate, batch.edges, grad ? &de : nullptr, grad ? &grad->gate : nullptr, w.gamma, mra_);
    require_finite(out.mra, "MRA");
  }
  out.total = total_loss(w, out);
  require_finite(out.total, "total");
  if (grad) {
    for (std::size_t r = 0; r < num_relations; ++r) {
      grad->encoder[r].noalias() = propagated_[r].transpose() * de[r];
    }
  }
  return out;
}

namespace {

double validation_mrr(const PretrainObjective& objective, const ModelParams& params, const ProductKnowledgeGraph& graph,
                      std::span<const IndexedTriplet> validation, int threads) {
  const auto e = encode_relations(objective.propagated(), params, threads);
  EvalOptions options;
  options.threads = threads;
  const EvalReport report = eval_knowledge_prediction(e, validation, graph, nullptr, options);
  const CohortMetrics* all = report.find(Cohort::All);
  return all ? all->mrr : 0.0;
}

}  // namespace

PretrainResult pretrain(const ProductKnowledgeGraph& graph, const PretrainConfig& config_in,
                        std::span<const IndexedTriplet> validation, const EpochCallback& on_epoch) {
  PretrainConfig config = config_in;
  config.validate();
  const std::size_t num_relations = graph.num_relations();
  if (num_relations == 0) throw InputError("graph has no relations");
  if (graph.num_items() == 0) throw InputError("graph has no items");
  if (num_relations < 2 && config.weights.gamma > 0.0) {
    spdlog::warn("meta relation adaptation needs two relations; disabling it");
    config.weights.gamma = 0.0;
    if (total_loss(config.weights, {1.0, 1.0, 1.0, 1.0, 0.0}) <= 0.0) {
      throw InputError("no loss term left to train with a single relation");
    }
  }
  const LossWeights& w = config.weights;

  PretrainResult result;
  result.params = init_model_params(num_relations, graph.feature_dim(), config.dim, config.reduction, config.seed);
  result.opt_state = init_opt_state(result.params, AdamConfig{config.lr, config.l2});
  std::mt19937_64 rng = make_rng(config.seed, 0x7072);
  result.rng_state = rng_state(rng);
  if (config.epochs == 0) return result;

  PretrainObjective objective(propagate_relations(graph, config.layers, config.threads), graph.features(), w,
                              config.mra_objective);
  const ItemPool pool = ItemPool::of(graph);
  std::vector<Adjacency> adjacency;
  for (std::size_t r = 0; r < num_relations; ++r) adjacency.push_back(graph.relation_adjacency(static_cast<RelationId>(r)));
  NeighborhoodIndex neighborhoods;
  std::size_t budget = 0;
  if (w.theta > 0.0) {
    neighborhoods = khop_neighbors(graph, config.hops, config.neighbor_cap, config.seed);
    budget = hnr_budget(neighborhoods, graph.num_items(), config.hnr_pairs_per_item);
  }
  std::vector<ItemId> active_items;
  for (Index i = 0; i < graph.num_items(); ++i) {
    if (!graph.is_deleted(static_cast<ItemId>(i))) active_items.push_back(static_cast<ItemId>(i));
  }

  ModelParams params = result.params;
  OptState opt = result.opt_state;
  double best = -std::numeric_limits<double>::infinity();
  bool warned_saturated = false;
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::vector<PairSample>> edges(num_relations);
    if (w.alpha > 0.0 || w.gamma > 0.0) {
      for (std::size_t r = 0; r < num_relations; ++r) {
        std::vector<Edge> shuffled(graph.edges(static_cast<RelationId>(r)).begin(),
                                   graph.edges(static_cast<RelationId>(r)).end());
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::size_t skipped = 0;
        edges[r] = sample_edge_pairs(shuffled, adjacency[r], pool, config.negatives_per_positive, rng, &skipped);
        if (skipped > 0 && !warned_saturated) {
          spdlog::warn("skipping positives whose head is adjacent to every item (relation {})", r);
          warned_saturated = true;
        }
      }
    }
    std::vector<PairSample> neighbors;
    if (w.theta > 0.0) neighbors = sample_neighbor_pairs(neighborhoods, budget, pool, rng);
    std::vector<ItemId> items;
    if (w.beta > 0.0) {
      items = active_items;
      std::shuffle(items.begin(), items.end(), rng);
    }

    std::size_t steps = 1;
    for (const auto& e : edges) steps = std::max(steps, (e.size() + batch_size - 1) / batch_size);

    LossBreakdown sum;
    for (std::size_t b = 0; b < steps; ++b) {
      PretrainBatch batch;
      batch.edges.resize(num_relations);
      for (std::size_t r = 0; r < num_relations; ++r) {
        const std::size_t lo = std::min(edges[r].size(), b * batch_size);
        const std::size_t hi = std::min(edges[r].size(), (b + 1) * batch_size);
        batch.edges[r].assign(edges[r].begin() + static_cast<std::ptrdiff_t>(lo),
                              edges[r].begin() + static_cast<std::ptrdiff_t>(hi));
      }
      auto chunk = [&](const auto& all, auto& out) {
        const std::size_t lo = all.size() * b / steps;
        const std::size_t hi = all.size() * (b + 1) / steps;
        out.assign(all.begin() + static_cast<std::ptrdiff_t>(lo), all.begin() + static_cast<std::ptrdiff_t>(hi));
      };
      chunk(neighbors, batch.neighbors);
      chunk(items, batch.items);
      batch.item_scale = batch.items.empty()
                             ? 0.0
                             : static_cast<double>(active_items.size()) / static_cast<double>(batch.items.size());

      ModelParams grad;
      LossBreakdown step_loss;
      try {
        step_loss = objective.evaluate(params, batch, &grad);
      } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("{} at epoch {}, batch {}", e.what(), epoch, b));
      }
      adam_step(params, grad, opt);
      check_finite(params, fmt::format("parameters after epoch {}, batch {}", epoch, b));
      sum += step_loss;
    }
    sum *= 1.0 / static_cast<double>(steps);

    EpochRecord record{epoch, sum, std::nullopt};
    bool improved = validation.empty();
    if (!validation.empty()) {
      const double mrr = validation_mrr(objective, params, graph, validation, config.threads);
      record.valid_mrr = mrr;
      improved = mrr > best;
      if (improved) best = mrr;
    }
    if (improved) {
      result.params = params;
      result.opt_state = opt;
      result.rng_state = rng_state(rng);
      result.best_epoch = epoch;
    }
    spdlog::debug("pretrain epoch {}: total {:.6g}", epoch, sum.total);
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return result;
}

std::string format_history_tsv(std::span<const EpochRecord> history) {
  std::string out = "epoch\tL_KR\tL_FR\tL_HNR\tL_MRA\ttotal\tvalid_mrr\n";
  for (const EpochRecord& r : history) {
    out += fmt::format("{}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t{}\n", r.epoch, r.mean.kr, r.mean.fr,
                       r.mean.hnr, r.mean.mra, r.mean.total,
                       r.valid_mrr ? fmt::format("{:.17g}", *r.valid_mrr) : std::string("NA"));
  }
  return out;
}

}  // namespace mpkg
