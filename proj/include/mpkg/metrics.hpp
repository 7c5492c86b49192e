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

#include <optional>
#include <span>
#include <vector>

#include "mpkg/types.hpp"

namespace mpkg {

// Ranked lists are best-first. Relevant sets may be given in any order and
// are treated as sets.

/// |top-N ∩ relevant| / |relevant|; nullopt for an empty relevant set.
std::optional<double> recall_at_n(std::span<const ItemId> ranked, std::span<const ItemId> relevant, Index n);

/// Binary-relevance NDCG with gain 1/log2(rank + 1), normalized by the ideal
/// DCG of min(|relevant|, N) hits; nullopt for an empty relevant set.
std::optional<double> ndcg_at_n(std::span<const ItemId> ranked, std::span<const ItemId> relevant, Index n);

/// Reciprocal rank of the first relevant item over the whole list, 0 if none.
double mrr(std::span<const ItemId> ranked, std::span<const ItemId> relevant);

/// Candidates sorted by descending score, ties by ascending id. `scores` is
/// aligned with `candidates`.
std::vector<ItemId> rank_candidates(std::span<const ItemId> candidates, std::span<const double> scores);

/// H_C / C: expected reciprocal rank of one relevant item among C uniformly
/// ordered candidates.
double random_mrr(Index candidates);

}  // namespace mpkg
