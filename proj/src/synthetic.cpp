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

#include "mpkg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "mpkg/errors.hpp"
#include "mpkg/random.hpp"

namespace mpkg {

void SyntheticSpec::validate() const {
  if (num_items < 1) throw InputError("synthetic spec needs at least one item");
  if (num_blocks < 1 || num_blocks > num_items) throw InputError("block count must be between 1 and the item count");
  if (num_relations < 1) throw InputError("synthetic spec needs at least one relation");
  if (d_in < 1) throw InputError("feature width must be at least 1");
  auto check_probs = [&](const std::vector<double>& p, const char* what) {
    if (p.size() != 1 && p.size() != static_cast<std::size_t>(num_relations)) {
      throw InputError(fmt::format("{} needs one value or one per relation", what));
    }
  };
  check_probs(p_in, "p_in");
  check_probs(p_out, "p_out");
  for (Index r = 0; r < num_relations; ++r) {
    const double pi = p_in_for(r);
    const double po = p_out_for(r);
    if (!(0.0 <= po && po < pi && pi <= 1.0)) throw InputError("edge probabilities must satisfy 0 <= p_out < p_in <= 1");
  }
  if (!(feature_noise >= 0.0)) throw InputError("feature noise must be non-negative");
  if (num_users < 0 || interactions_per_user < 0) throw InputError("user counts must be non-negative");
  if (aligned_relation >= num_relations) throw InputError("aligned relation out of range");
  if (!(zero_shot_fraction >= 0.0 && zero_shot_fraction <= 0.5)) {
    throw InputError("zero-shot fraction must lie in [0, 0.5]");
  }
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) throw InputError("held-out fraction must lie in [0, 1)");
  if (!(zs_heldout_fraction >= 0.0 && zs_heldout_fraction <= 1.0)) {
    throw InputError("zero-shot held-out fraction must lie in [0, 1]");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng = make_rng(spec.seed, 0x5e7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index n = spec.num_items;
  const auto num_relations = static_cast<std::size_t>(spec.num_relations);
  const auto n_zs = static_cast<Index>(std::llround(spec.zero_shot_fraction * static_cast<double>(n)));
  const Index n_warm = n - n_zs;
  if (n_warm < 1) throw InputError("synthetic spec leaves no warm items");

  SyntheticData out;
  for (std::size_t r = 0; r < num_relations; ++r) {
    out.relation_names.push_back(r < canonical_relations().size() ? canonical_relations()[r]
                                                                  : fmt::format("relation_{}", r));
  }
  for (Index i = 0; i < n; ++i) out.items.add(fmt::format("item_{}", i));

  std::vector<Index> base(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) base[i] = i % spec.num_blocks;
  std::shuffle(base.begin(), base.end(), rng);
  for (std::size_t r = 0; r < num_relations; ++r) {
    if (r == 0 || !spec.permute_relations) {
      out.blocks.push_back(base);
      continue;
    }
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Index> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[i] = base[perm[i]];
    out.blocks.push_back(std::move(labels));
  }

  std::vector<std::vector<Edge>> all_edges(num_relations);
  for (std::size_t r = 0; r < num_relations; ++r) {
    const double pi = spec.p_in_for(static_cast<Index>(r));
    const double po = spec.p_out_for(static_cast<Index>(r));
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double p = out.blocks[r][i] == out.blocks[r][j] ? pi : po;
        if (unit(rng) >= p) continue;
        const bool flip = unit(rng) < 0.5;
        const auto a = static_cast<ItemId>(flip ? j : i);
        const auto b = static_cast<ItemId>(flip ? i : j);
        all_edges[r].push_back({a, b});
      }
    }
  }

  Matrix centroids(spec.num_blocks, spec.d_in);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index k = 0; k < centroids.size(); ++k) centroids.data()[k] = gauss(rng);
  Matrix features(n, spec.d_in);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < spec.d_in; ++c) {
      const double v = centroids(base[i], c) + spec.feature_noise * gauss(rng);
      features(i, c) = static_cast<double>(static_cast<float>(v));
    }
  }

  const auto is_zs = [&](ItemId i) { return static_cast<Index>(i) >= n_warm; };
  std::vector<std::vector<Edge>> train_edges(num_relations);
  for (std::size_t r = 0; r < num_relations; ++r) {
    const auto rel = static_cast<RelationId>(r);
    std::vector<Edge> warm;
    std::map<ItemId, std::vector<Edge>> zs_groups;
    for (Edge e : all_edges[r]) {
      if (!is_zs(e.head) && !is_zs(e.tail)) {
        warm.push_back(e);
        continue;
      }
      if (!is_zs(e.head)) std::swap(e.head, e.tail);
      zs_groups[e.head].push_back(e);
    }
    std::shuffle(warm.begin(), warm.end(), rng);
    const auto held = static_cast<std::size_t>(std::floor(spec.heldout_fraction * static_cast<double>(warm.size())));
    const std::size_t valid = held / 2;
    for (std::size_t k = 0; k < warm.size(); ++k) {
      const IndexedTriplet t{warm[k].head, rel, warm[k].tail};
      if (k < valid) {
        out.valid_triplets.push_back(t);
      } else if (k < held) {
        out.test_triplets.push_back(t);
      } else {
        train_edges[r].push_back(warm[k]);
      }
    }
    for (auto& [head, group] : zs_groups) {
      std::shuffle(group.begin(), group.end(), rng);
      const auto zs_held =
          static_cast<std::size_t>(std::floor(spec.zs_heldout_fraction * static_cast<double>(group.size())));
      for (std::size_t k = 0; k < group.size(); ++k) {
        const IndexedTriplet t{group[k].head, rel, group[k].tail};
        (k < zs_held ? out.zs_test_triplets : out.zero_shot.edges).push_back(t);
      }
    }
  }
  out.graph = ProductKnowledgeGraph(out.relation_names, std::move(train_edges), features.topRows(n_warm));
  out.zero_shot.features = features.bottomRows(n_zs);

  for (Index u = 0; u < spec.num_users; ++u) out.users.add(fmt::format("user_{}", u));
  const Index aligned = spec.aligned_relation;
  std::uniform_int_distribution<Index> pick_block(0, spec.num_blocks - 1);
  std::vector<Index> home(static_cast<std::size_t>(spec.num_users));
  for (Index& h : home) h = pick_block(rng);
  std::vector<std::vector<ItemId>> warm_by_block(static_cast<std::size_t>(spec.num_blocks));
  std::vector<std::vector<ItemId>> zs_by_block(static_cast<std::size_t>(spec.num_blocks));
  for (Index i = 0; i < n; ++i) {
    const auto item = static_cast<ItemId>(i);
    (is_zs(item) ? zs_by_block : warm_by_block)[out.blocks[aligned][i]].push_back(item);
  }

  const auto total = static_cast<std::size_t>(spec.num_users * spec.interactions_per_user);
  std::vector<std::size_t> slot_at(total);  // position -> slot
  std::iota(slot_at.begin(), slot_at.end(), std::size_t{0});
  std::shuffle(slot_at.begin(), slot_at.end(), rng);
  const std::size_t train_slots = (8 * total + 9) / 10;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<std::vector<ItemId>> eval_pool;
  constexpr std::int64_t kBaseTime = 1'600'000'000;
  for (std::size_t pos = 0; pos < total; ++pos) {
    const auto user = static_cast<UserId>(slot_at[pos] / static_cast<std::size_t>(spec.interactions_per_user));
    const Index block = home[user];
    if (pos == train_slots) {
      eval_pool.resize(static_cast<std::size_t>(spec.num_blocks));
      for (Index b = 0; b < spec.num_blocks; ++b) {
        for (ItemId i : warm_by_block[b]) {
          if (seen[i]) eval_pool[b].push_back(i);
        }
        eval_pool[b].insert(eval_pool[b].end(), zs_by_block[b].begin(), zs_by_block[b].end());
      }
    }
    const auto& pool = pos < train_slots ? warm_by_block[block] : eval_pool[block];
    if (pool.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const ItemId item = pool[pick(rng)];
    if (pos < train_slots) seen[item] = true;
    out.events.push_back({user, item, kBaseTime + 60 * static_cast<std::int64_t>(pos)});
  }
  if (!out.events.empty()) out.dataset = chronological_split(out.events, n, spec.num_users);
  return out;
}

}  // namespace mpkg
