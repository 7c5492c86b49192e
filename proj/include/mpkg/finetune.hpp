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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mpkg/adaptation.hpp"
#include "mpkg/graph.hpp"
#include "mpkg/interactions.hpp"
#include "mpkg/optim.hpp"
#include "mpkg/params.hpp"

namespace mpkg {

struct BprTriple {
  UserId user = 0;
  ItemId positive = 0;
  ItemId negative = 0;
  auto operator<=>(const BprTriple&) const = default;
};

/// One triple per train event, the negative uniform over items in
/// [0, num_items) that the user has no train interaction with and that are
/// not flagged in `excluded`. Users who interacted with every item are
/// skipped.
std::vector<BprTriple> sample_bpr_triples(const InteractionDataset& dataset, Index num_items, std::mt19937_64& rng,
                                          const std::vector<bool>* excluded = nullptr);

/// -log sigma(p_ui - p_ui-) for fused embeddings, summed over the triples.
double bpr_loss(const Matrix& fused, const InteractionDataset& dataset, std::span<const BprTriple> triples);

/// BPR loss as a function of the gate with fixed relation embeddings. With
/// `grad`, the gate gradient is accumulated into it.
double bpr_gate_loss(const SelfExcitationParams& gate, std::span<const Matrix> relation_embeddings,
                     const InteractionDataset& dataset, std::span<const BprTriple> triples,
                     SelfExcitationParams* grad = nullptr);

struct FinetuneConfig {
  int epochs = 50;
  double lr = 5e-3;
  double l2 = 0.0;
  Index batch_size = 256;
  int layers = 3;
  std::uint64_t seed = 0;
  Index selection_cutoff = 20;
  int threads = 1;

  void validate() const;
};

struct FinetuneEpoch {
  int epoch = 0;
  double loss = 0.0;  // mean per triple
  std::optional<double> valid_ndcg;
  Vector weights;     // gate softmax over all relations
};

struct FinetuneResult {
  ModelParams params;
  OptState opt_state;
  std::string rng_state;
  int best_epoch = 0;
  std::vector<FinetuneEpoch> history;
};

/// Trains only the gate with BPR on the train split. `relation_embeddings`
/// are the frozen E^r on the training graph. Epochs are selected by validation
/// NDCG at the selection cutoff over all items, ranked with
/// `eval_embeddings` (E^r over the inference graph, defaulting to the training
/// embeddings).
FinetuneResult finetune(const ModelParams& pretrained, std::span<const Matrix> relation_embeddings,
                        const InteractionDataset& dataset, const FinetuneConfig& config,
                        std::span<const Matrix> eval_embeddings = {},
                        const std::function<void(const FinetuneEpoch&)>& on_epoch = {});

/// Computes the training embeddings from `graph` first.
FinetuneResult finetune(const ModelParams& pretrained, const ProductKnowledgeGraph& graph,
                        const InteractionDataset& dataset, const FinetuneConfig& config,
                        std::span<const Matrix> eval_embeddings = {});

/// `epoch L_BPR valid_ndcg w_0 w_1 ...`
std::string format_finetune_history_tsv(std::span<const FinetuneEpoch> history);

}  // namespace mpkg
