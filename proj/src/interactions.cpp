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

#include "mpkg/interactions.hpp"

#include <algorithm>
#include <string>

#include "mpkg/errors.hpp"

namespace mpkg {

const std::vector<std::vector<ItemId>>& InteractionDataset::items(Split s) const {
  switch (s) {
    case Split::Train: return train_items;
    case Split::Valid: return valid_items;
    case Split::Test: return test_items;
  }
  return train_items;
}

std::vector<ItemId> InteractionDataset::zero_shot_items() const {
  std::vector<ItemId> out;
  for (std::size_t i = 0; i < zero_shot.size(); ++i) {
    if (zero_shot[i]) out.push_back(static_cast<ItemId>(i));
  }
  return out;
}

std::vector<ItemId> InteractionDataset::train_item_set(UserId u) const {
  std::vector<ItemId> out = train_items.at(u);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

InteractionDataset chronological_split(std::vector<Interaction> events, Index num_items, Index num_users) {
  if (events.empty()) throw InputError("chronological_split: no interaction events");
  InteractionDataset ds;
  for (const Interaction& e : events) {
    num_items = std::max<Index>(num_items, static_cast<Index>(e.item) + 1);
    num_users = std::max<Index>(num_users, static_cast<Index>(e.user) + 1);
  }
  ds.num_items = num_items;
  ds.num_users = num_users;

  std::vector<std::int64_t> times;
  times.reserve(events.size());
  for (const Interaction& e : events) times.push_back(e.timestamp);
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  const std::int64_t train_end = times[(8 * n + 9) / 10 - 1];
  const std::int64_t valid_end = times[(9 * n + 9) / 10 - 1];

  ds.train_items.resize(static_cast<std::size_t>(num_users));
  ds.valid_items.resize(static_cast<std::size_t>(num_users));
  ds.test_items.resize(static_cast<std::size_t>(num_users));
  ds.split.reserve(n);
  std::vector<bool> in_train(static_cast<std::size_t>(num_items), false);
  std::vector<bool> in_eval(static_cast<std::size_t>(num_items), false);
  for (const Interaction& e : events) {
    Split s = Split::Test;
    if (e.timestamp <= train_end) {
      s = Split::Train;
    } else if (e.timestamp <= valid_end) {
      s = Split::Valid;
    }
    ds.split.push_back(s);
    switch (s) {
      case Split::Train:
        ds.train_items[e.user].push_back(e.item);
        in_train[e.item] = true;
        break;
      case Split::Valid:
        ds.valid_items[e.user].push_back(e.item);
        in_eval[e.item] = true;
        break;
      case Split::Test:
        ds.test_items[e.user].push_back(e.item);
        in_eval[e.item] = true;
        break;
    }
  }
  ds.zero_shot.resize(static_cast<std::size_t>(num_items));
  for (std::size_t i = 0; i < ds.zero_shot.size(); ++i) ds.zero_shot[i] = in_eval[i] && !in_train[i];
  ds.events = std::move(events);
  return ds;
}

Vector mean_rows(const Matrix& embeddings, std::span<const ItemId> items) {
  Vector out = Vector::Zero(embeddings.cols());
  if (items.empty()) return out;
  for (ItemId i : items) {
    if (i >= embeddings.rows()) throw InputError("item " + std::to_string(i) + " has no embedding");
    out += embeddings.row(i).transpose();
  }
  return out / static_cast<double>(items.size());
}

Vector user_embedding(UserId u, const Matrix& fused, const InteractionDataset& dataset) {
  if (u >= dataset.train_items.size() || dataset.train_items[u].empty()) {
    throw InputError("user " + std::to_string(u) + " has no train interactions");
  }
  return mean_rows(fused, dataset.train_items[u]);
}

}  // namespace mpkg
