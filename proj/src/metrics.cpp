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

#include "mpkg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mpkg/errors.hpp"

namespace mpkg {
namespace {

std::vector<ItemId> as_set(std::span<const ItemId> relevant) {
  std::vector<ItemId> out(relevant.begin(), relevant.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool contains(const std::vector<ItemId>& set, ItemId i) { return std::binary_search(set.begin(), set.end(), i); }

void check_cutoff(Index n) {
  if (n < 1) throw InputError("ranking cutoff must be at least 1");
}

}  // namespace

std::optional<double> recall_at_n(std::span<const ItemId> ranked, std::span<const ItemId> relevant, Index n) {
  check_cutoff(n);
  const auto rel = as_set(relevant);
  if (rel.empty()) return std::nullopt;
  const auto top = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(n));
  std::size_t hits = 0;
  for (std::size_t k = 0; k < top; ++k) hits += contains(rel, ranked[k]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

std::optional<double> ndcg_at_n(std::span<const ItemId> ranked, std::span<const ItemId> relevant, Index n) {
  check_cutoff(n);
  const auto rel = as_set(relevant);
  if (rel.empty()) return std::nullopt;
  const auto top = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(n));
  double dcg = 0.0;
  for (std::size_t k = 0; k < top; ++k) {
    if (contains(rel, ranked[k])) dcg += 1.0 / std::log2(static_cast<double>(k) + 2.0);
  }
  const auto ideal_hits = std::min<std::size_t>(rel.size(), static_cast<std::size_t>(n));
  double ideal = 0.0;
  for (std::size_t k = 0; k < ideal_hits; ++k) ideal += 1.0 / std::log2(static_cast<double>(k) + 2.0);
  return dcg / ideal;
}

double mrr(std::span<const ItemId> ranked, std::span<const ItemId> relevant) {
  const auto rel = as_set(relevant);
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (contains(rel, ranked[k])) return 1.0 / static_cast<double>(k + 1);
  }
  return 0.0;
}

std::vector<ItemId> rank_candidates(std::span<const ItemId> candidates, std::span<const double> scores) {
  if (candidates.size() != scores.size()) throw InputError("rank_candidates: one score per candidate is required");
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });
  std::vector<ItemId> out;
  out.reserve(order.size());
  for (std::size_t k : order) out.push_back(candidates[k]);
  return out;
}

double random_mrr(Index candidates) {
  if (candidates < 1) return 0.0;
  double h = 0.0;
  for (Index k = 1; k <= candidates; ++k) h += 1.0 / static_cast<double>(k);
  return h / static_cast<double>(candidates);
}

}  // namespace mpkg
