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

#include "mpkg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <unordered_set>

#include "mpkg/errors.hpp"
#include "mpkg/random.hpp"

namespace mpkg {

std::uint32_t Vocabulary::add(std::string_view key) {
  auto it = index_.find(std::string(key));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(keys_.size());
  keys_.emplace_back(key);
  index_.emplace(keys_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::at(std::string_view key) const {
  if (auto id = find(key)) return *id;
  throw InputError("unknown key '" + std::string(key) + "'");
}

const std::vector<std::string>& canonical_relations() {
  static const std::vector<std::string> names{"alsoBought", "alsoViewed", "boughtTogether"};
  return names;
}

namespace {

void build_compressed(Index n, const std::vector<std::vector<ItemId>>& rows,
                      std::vector<std::size_t>& offsets, std::vector<ItemId>& indices) {
  offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + rows[i].size();
  indices.clear();
  indices.reserve(offsets.back());
  for (const auto& row : rows) indices.insert(indices.end(), row.begin(), row.end());
}

std::vector<std::vector<ItemId>> symmetric_rows(Index n, std::span<const std::span<const Edge>> sets) {
  std::vector<std::vector<ItemId>> rows(static_cast<std::size_t>(n));
  for (auto edges : sets) {
    for (const Edge& e : edges) {
      rows[e.head].push_back(e.tail);
      rows[e.tail].push_back(e.head);
    }
  }
  for (auto& row : rows) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return rows;
}

}  // namespace

Adjacency::Adjacency(Index num_items, std::span<const Edge> edges) {
  const std::span<const Edge> sets[] = {edges};
  build_compressed(num_items, symmetric_rows(num_items, sets), offsets_, indices_);
}

Adjacency::Adjacency(Index num_items, std::span<const std::span<const Edge>> edge_sets) {
  build_compressed(num_items, symmetric_rows(num_items, edge_sets), offsets_, indices_);
}

bool Adjacency::contains(ItemId i, ItemId j) const {
  auto row = neighbors(i);
  return std::binary_search(row.begin(), row.end(), j);
}

ProductKnowledgeGraph::ProductKnowledgeGraph(std::vector<std::string> relation_names,
                                             std::vector<std::vector<Edge>> edges, Matrix features,
                                             std::vector<bool> deleted)
    : ProductKnowledgeGraph(std::move(relation_names), std::move(edges),
                            std::make_shared<const Matrix>(std::move(features)), std::move(deleted)) {}

ProductKnowledgeGraph::ProductKnowledgeGraph(std::vector<std::string> relation_names,
                                             std::vector<std::vector<Edge>> edges,
                                             std::shared_ptr<const Matrix> features, std::vector<bool> deleted)
    : relation_names_(std::move(relation_names)),
      edges_(std::move(edges)),
      features_(std::move(features)),
      deleted_(std::move(deleted)) {
  validate_and_normalize();
}

void ProductKnowledgeGraph::validate_and_normalize() {
  if (edges_.size() != relation_names_.size()) {
    throw InputError("edge sets (" + std::to_string(edges_.size()) + ") do not match relation count (" +
                     std::to_string(relation_names_.size()) + ")");
  }
  const Index n = num_items();
  if (!features_->allFinite()) throw InputError("feature matrix contains a non-finite entry");
  if (deleted_.empty()) deleted_.assign(static_cast<std::size_t>(n), false);
  if (static_cast<Index>(deleted_.size()) != n) throw InputError("deleted mask size does not match item count");
  for (std::size_t r = 0; r < edges_.size(); ++r) {
    auto& list = edges_[r];
    for (const Edge& e : list) {
      if (e.head >= n || e.tail >= n) {
        throw InputError("edge (" + std::to_string(e.head) + ", " + std::to_string(e.tail) + ") in relation " +
                         relation_names_[r] + " references an item outside [0, " + std::to_string(n) + ")");
      }
    }
    std::erase_if(list, [](const Edge& e) { return e.head == e.tail; });
    // Dedup while keeping first-seen order.
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(list.size());
    std::erase_if(list, [&seen](const Edge& e) {
      return !seen.insert((std::uint64_t{e.head} << 32) | e.tail).second;
    });
  }
}

std::optional<RelationId> ProductKnowledgeGraph::relation_id(std::string_view name) const {
  for (std::size_t r = 0; r < relation_names_.size(); ++r) {
    if (relation_names_[r] == name) return static_cast<RelationId>(r);
  }
  return std::nullopt;
}

std::size_t ProductKnowledgeGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : edges_) total += list.size();
  return total;
}

std::size_t ProductKnowledgeGraph::num_deleted() const {
  return static_cast<std::size_t>(std::count(deleted_.begin(), deleted_.end(), true));
}

Adjacency ProductKnowledgeGraph::union_adjacency() const {
  std::vector<std::span<const Edge>> sets(edges_.begin(), edges_.end());
  return Adjacency(num_items(), sets);
}

bool operator==(const ProductKnowledgeGraph& a, const ProductKnowledgeGraph& b) {
  if (a.relation_names_ != b.relation_names_ || a.edges_ != b.edges_ || a.deleted_ != b.deleted_) return false;
  if (a.features_ == b.features_) return true;
  return a.features_->rows() == b.features_->rows() && a.features_->cols() == b.features_->cols() &&
         *a.features_ == *b.features_;
}

ProductKnowledgeGraph build_graph(std::span<const Triplet> triplets, Matrix features,
                                  std::vector<std::string> relation_names, Vocabulary* items) {
  Vocabulary local;
  Vocabulary& vocab = items ? *items : local;
  const bool fixed = !vocab.empty();
  auto resolve = [&](const std::string& key) -> ItemId {
    return fixed ? vocab.at(key) : vocab.add(key);
  };

  std::vector<std::vector<Edge>> edges(relation_names.size());
  for (const Triplet& t : triplets) {
    auto it = std::find(relation_names.begin(), relation_names.end(), t.relation);
    if (it == relation_names.end()) throw InputError("unknown relation name '" + t.relation + "'");
    const ItemId head = resolve(t.head);
    const ItemId tail = resolve(t.tail);
    edges[static_cast<std::size_t>(it - relation_names.begin())].push_back({head, tail});
  }
  if (static_cast<std::size_t>(features.rows()) != vocab.size()) {
    throw InputError("feature matrix has " + std::to_string(features.rows()) + " rows but there are " +
                     std::to_string(vocab.size()) + " distinct items");
  }
  return ProductKnowledgeGraph(std::move(relation_names), std::move(edges), std::move(features));
}

RPkgView r_pkg(const ProductKnowledgeGraph& graph, RelationId r) {
  if (r >= graph.num_relations()) {
    throw InputError("relation index " + std::to_string(r) + " out of range (" +
                     std::to_string(graph.num_relations()) + " relations)");
  }
  return {r, graph.edges(r), graph.num_items(), &graph.features()};
}

bool NeighborhoodIndex::contains(ItemId i, ItemId j) const {
  const auto& row = neighbors[i];
  return std::binary_search(row.begin(), row.end(), j);
}

std::size_t NeighborhoodIndex::total_pairs() const {
  std::size_t total = 0;
  for (const auto& row : neighbors) total += row.size();
  return total;
}

NeighborhoodIndex khop_neighbors(const ProductKnowledgeGraph& graph, int hops, std::optional<std::size_t> cap,
                                 std::uint64_t seed) {
  if (hops < 1) throw InputError("hop count must be at least 1");
  const Index n = graph.num_items();
  const Adjacency adj = graph.union_adjacency();

  NeighborhoodIndex index;
  index.hops = hops;
  index.neighbors.resize(static_cast<std::size_t>(n));

  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  std::vector<ItemId> touched;
  std::deque<ItemId> frontier;
  for (Index s = 0; s < n; ++s) {
    const auto source = static_cast<ItemId>(s);
    auto& out = index.neighbors[source];
    depth[source] = 0;
    touched.assign(1, source);
    frontier.assign(1, source);
    while (!frontier.empty()) {
      const ItemId u = frontier.front();
      frontier.pop_front();
      if (depth[u] == hops) continue;
      for (ItemId v : adj.neighbors(u)) {
        if (depth[v] >= 0) continue;
        depth[v] = depth[u] + 1;
        touched.push_back(v);
        out.push_back(v);
        frontier.push_back(v);
      }
    }
    for (ItemId t : touched) depth[t] = -1;

    std::sort(out.begin(), out.end());
    if (cap && out.size() > *cap) {
      std::mt19937_64 rng = make_rng(seed, s);
      std::vector<ItemId> sample;
      sample.reserve(*cap);
      std::sample(out.begin(), out.end(), std::back_inserter(sample), *cap, rng);
      out = std::move(sample);
    }
  }
  return index;
}

ProductKnowledgeGraph delete_items(const ProductKnowledgeGraph& graph, std::span<const ItemId> items) {
  std::vector<bool> deleted = graph.deleted_mask();
  for (ItemId i : items) {
    if (i >= graph.num_items()) throw InputError("cannot delete unknown item " + std::to_string(i));
    deleted[i] = true;
  }
  std::vector<std::vector<Edge>> edges(graph.num_relations());
  for (std::size_t r = 0; r < edges.size(); ++r) {
    for (const Edge& e : graph.edges(static_cast<RelationId>(r))) {
      if (!deleted[e.head] && !deleted[e.tail]) edges[r].push_back(e);
    }
  }
  return ProductKnowledgeGraph(graph.relation_names(), std::move(edges), graph.shared_features(), std::move(deleted));
}

std::vector<IndexedTriplet> resolve_triplets(std::span<const Triplet> triplets, const Vocabulary& items,
                                             const std::vector<std::string>& relation_names) {
  std::vector<IndexedTriplet> out;
  out.reserve(triplets.size());
  for (const Triplet& t : triplets) {
    auto it = std::find(relation_names.begin(), relation_names.end(), t.relation);
    if (it == relation_names.end()) throw InputError("unknown relation name '" + t.relation + "'");
    out.push_back({items.at(t.head), static_cast<RelationId>(it - relation_names.begin()), items.at(t.tail)});
  }
  return out;
}

std::vector<Triplet> to_triplets(const ProductKnowledgeGraph& graph, const Vocabulary& items) {
  std::vector<Triplet> out;
  out.reserve(graph.edge_count());
  for (std::size_t r = 0; r < graph.num_relations(); ++r) {
    for (const Edge& e : graph.edges(static_cast<RelationId>(r))) {
      out.push_back({items.key(e.head), graph.relation_names()[r], items.key(e.tail)});
    }
  }
  return out;
}

}  // namespace mpkg
