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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/losses.hpp"
#include "mpkg/optim.hpp"
#include "mpkg/params.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

struct LossWeights {
  double alpha = 1.0;   // knowledge reconstruction
  double beta = 1e-3;   // feature reconstruction
  double theta = 1e-3;  // neighbor reconstruction
  double gamma = 1.0;   // meta relation adaptation
};

struct LossBreakdown {
  double kr = 0.0;
  double fr = 0.0;
  double hnr = 0.0;
  double mra = 0.0;
  double total = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& o);
  LossBreakdown& operator*=(double s);
};

/// alpha KR + beta FR + theta HNR + gamma MRA.
double total_loss(const LossWeights& weights, const LossBreakdown& components);

struct PretrainConfig {
  LossWeights weights;
  int hops = 2;
  int layers = 3;
  Index dim = 64;
  Index batch_size = 256;
  int epochs = 100;
  double lr = 5e-3;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
  int negatives_per_positive = 1;
  std::optional<std::size_t> neighbor_cap = kDefaultNeighborCap;
  std::size_t hnr_pairs_per_item = 50;
  int reduction = 4;
  MraObjective mra_objective = MraObjective::Bce;
  int threads = 1;

  /// Throws InputError on an invalid combination.
  void validate() const;
};

/// One optimizer step's worth of samples.
struct PretrainBatch {
  std::vector<std::vector<PairSample>> edges;  // per relation; KR and MRA
  std::vector<PairSample> neighbors;           // HNR
  std::vector<ItemId> items;                   // FR
  double item_scale = 1.0;                     // scales the FR chunk to a full-sum estimate
};

/// E^r = P^r W^r for every relation.
std::vector<Matrix> encode_relations(std::span<const Matrix> propagated, const ModelParams& params, int threads = 1);

/// The weighted pre-training loss over cached propagated features.
class PretrainObjective {
 public:
  PretrainObjective(std::vector<Matrix> propagated, Matrix features, LossWeights weights,
                    MraObjective mra = MraObjective::Bce);

  /// Components and weighted total. With `grad`, it is overwritten with the
  /// gradient of the total. Terms with zero weight are skipped. Throws
  /// NumericalError naming the first non-finite term.
  LossBreakdown evaluate(const ModelParams& params, const PretrainBatch& batch, ModelParams* grad = nullptr) const;

  const std::vector<Matrix>& propagated() const { return propagated_; }
  const LossWeights& weights() const { return weights_; }

 private:
  std::vector<Matrix> propagated_;
  Matrix features_;
  LossWeights weights_;
  MraObjective mra_;
};

struct EpochRecord {
  int epoch = 0;
  LossBreakdown mean;
  std::optional<double> valid_mrr;
};

struct PretrainResult {
  ModelParams params;  // at the selected epoch
  OptState opt_state;
  std::string rng_state;
  int best_epoch = 0;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains encoder, decoder and gate. After each epoch, knowledge-prediction
/// MRR on `validation` picks the returned parameters (earliest best epoch);
/// without validation triplets the last epoch is returned.
PretrainResult pretrain(const ProductKnowledgeGraph& graph, const PretrainConfig& config,
                        std::span<const IndexedTriplet> validation = {}, const EpochCallback& on_epoch = {});

/// `epoch L_KR L_FR L_HNR L_MRA total valid_mrr`, one row per record.
std::string format_history_tsv(std::span<const EpochRecord> history);

}  // namespace mpkg
