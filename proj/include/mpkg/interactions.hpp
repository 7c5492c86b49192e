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
#include <span>
#include <vector>

#include "mpkg/types.hpp"

namespace mpkg {

struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  std::int64_t timestamp = 0;
  auto operator<=>(const Interaction&) const = default;
};

enum class Split : std::uint8_t { Train, Valid, Test };

/// Interaction events split chronologically, with per-user item lists.
struct InteractionDataset {
  std::vector<Interaction> events;  // input order
  std::vector<Split> split;         // one per event
  Index num_users = 0;
  Index num_items = 0;

  // Per-user items in event order; repeats are kept.
  std::vector<std::vector<ItemId>> train_items;
  std::vector<std::vector<ItemId>> valid_items;
  std::vector<std::vector<ItemId>> test_items;

  /// Items seen in valid/test but never in train.
  std::vector<bool> zero_shot;

  const std::vector<std::vector<ItemId>>& items(Split s) const;
  bool is_zero_shot(ItemId i) const { return i < zero_shot.size() && zero_shot[i]; }
  std::vector<ItemId> zero_shot_items() const;
  /// Sorted, unique train items of user u.
  std::vector<ItemId> train_item_set(UserId u) const;
};

/// Train gets every event with timestamp <= the ceil(0.8 N)-th smallest
/// timestamp, valid those up to the ceil(0.9 N)-th, test the rest.
/// `num_items`/`num_users` are raised to cover every id present.
InteractionDataset chronological_split(std::vector<Interaction> events, Index num_items = 0, Index num_users = 0);

/// Mean of the fused embeddings of u's train items. Throws InputError if u has
/// none.
Vector user_embedding(UserId u, const Matrix& fused, const InteractionDataset& dataset);

/// Mean of the given rows, repeats counted.
Vector mean_rows(const Matrix& embeddings, std::span<const ItemId> items);

inline double ranking_score(const Vector& user, const Matrix& fused, ItemId i) { return user.dot(fused.row(i)); }

}  // namespace mpkg
