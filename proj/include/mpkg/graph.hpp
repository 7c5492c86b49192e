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

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mpkg/types.hpp"

namespace mpkg {

struct Edge {
  ItemId head = 0;
  ItemId tail = 0;
  auto operator<=>(const Edge&) const = default;
};

/// A knowledge triplet keyed by external string identifiers.
struct Triplet {
  std::string head;
  std::string relation;
  std::string tail;
};

struct IndexedTriplet {
  ItemId head = 0;
  RelationId relation = 0;
  ItemId tail = 0;
  auto operator<=>(const IndexedTriplet&) const = default;
};

/// Bijective map between external string keys and dense indices.
class Vocabulary {
 public:
  /// Returns the index of `key`, assigning the next dense index if unseen.
  std::uint32_t add(std::string_view key);
  std::optional<std::uint32_t> find(std::string_view key) const;
  /// Throws InputError for unknown keys.
  std::uint32_t at(std::string_view key) const;
  const std::string& key(std::uint32_t index) const { return keys_.at(index); }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const std::vector<std::string>& keys() const { return keys_; }

  bool operator==(const Vocabulary& other) const { return keys_ == other.keys_; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> keys_;
};

/// alsoBought, alsoViewed, boughtTogether.
const std::vector<std::string>& canonical_relations();

/// Symmetrized neighbor lists in compressed layout; rows sorted, unique.
class Adjacency {
 public:
  Adjacency() = default;
  Adjacency(Index num_items, std::span<const Edge> edges);
  /// Union over several edge sets.
  Adjacency(Index num_items, std::span<const std::span<const Edge>> edge_sets);

  Index num_items() const { return static_cast<Index>(offsets_.size()) - 1; }
  std::span<const ItemId> neighbors(ItemId i) const {
    return {indices_.data() + offsets_[i], indices_.data() + offsets_[i + 1]};
  }
  Index degree(ItemId i) const { return static_cast<Index>(offsets_[i + 1] - offsets_[i]); }
  bool contains(ItemId i, ItemId j) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<ItemId> indices_;
};

/// Product knowledge graph: items, typed item-item edges and item features.
///
/// Edges are stored directed as supplied, deduplicated, without self-edges.
/// Everything downstream treats them as undirected. Items removed with
/// delete_items() keep their feature row and are flagged in deleted_mask().
class ProductKnowledgeGraph {
 public:
  ProductKnowledgeGraph() = default;
  /// Validates all invariants and deduplicates edges; self-edges are dropped.
  ProductKnowledgeGraph(std::vector<std::string> relation_names,
                        std::vector<std::vector<Edge>> edges, Matrix features,
                        std::vector<bool> deleted = {});

  Index num_items() const { return features_ ? features_->rows() : 0; }
  Index feature_dim() const { return features_ ? features_->cols() : 0; }
  std::size_t num_relations() const { return relation_names_.size(); }
  const std::vector<std::string>& relation_names() const { return relation_names_; }
  std::optional<RelationId> relation_id(std::string_view name) const;

  std::span<const Edge> edges(RelationId r) const { return edges_.at(r); }
  std::size_t edge_count() const;
  const Matrix& features() const { return *features_; }
  std::shared_ptr<const Matrix> shared_features() const { return features_; }

  const std::vector<bool>& deleted_mask() const { return deleted_; }
  bool is_deleted(ItemId i) const { return deleted_[i]; }
  std::size_t num_deleted() const;

  Adjacency relation_adjacency(RelationId r) const { return Adjacency(num_items(), edges(r)); }
  Adjacency union_adjacency() const;

  friend bool operator==(const ProductKnowledgeGraph& a, const ProductKnowledgeGraph& b);

 private:
  ProductKnowledgeGraph(std::vector<std::string> relation_names,
                        std::vector<std::vector<Edge>> edges,
                        std::shared_ptr<const Matrix> features, std::vector<bool> deleted);
  void validate_and_normalize();

  std::vector<std::string> relation_names_;
  std::vector<std::vector<Edge>> edges_;
  std::shared_ptr<const Matrix> features_;
  std::vector<bool> deleted_;

  friend ProductKnowledgeGraph delete_items(const ProductKnowledgeGraph&, std::span<const ItemId>);
};

/// Single-relation view over a graph. Holds no copies.
struct RPkgView {
  RelationId relation = 0;
  std::span<const Edge> edges;
  Index num_items = 0;
  const Matrix* features = nullptr;

  std::size_t edge_count() const { return edges.size(); }
};

/// Builds a graph from string-keyed triplets.
///
/// When `items` is non-empty its indices are used and every triplet key must
/// resolve against it; otherwise `items` (if given) is filled in first-seen
/// order. The feature matrix must have one row per item.
ProductKnowledgeGraph build_graph(std::span<const Triplet> triplets, Matrix features,
                                  std::vector<std::string> relation_names,
                                  Vocabulary* items = nullptr);

RPkgView r_pkg(const ProductKnowledgeGraph& graph, RelationId r);

/// Items within 1..K hops on the undirected union of all relations.
struct NeighborhoodIndex {
  int hops = 1;
  std::vector<std::vector<ItemId>> neighbors;  // sorted

  bool contains(ItemId i, ItemId j) const;
  std::size_t total_pairs() const;
};

inline constexpr std::size_t kDefaultNeighborCap = 200;

/// Breadth-first K-hop neighborhoods. With `cap`, nodes with more than `cap`
/// neighbors keep a uniform sample of that size drawn from a per-node stream
/// derived from `seed`.
NeighborhoodIndex khop_neighbors(const ProductKnowledgeGraph& graph, int hops,
                                 std::optional<std::size_t> cap = std::nullopt,
                                 std::uint64_t seed = 0);

/// Removes every edge incident to `items` and flags them as deleted. Rows and
/// ids are kept.
ProductKnowledgeGraph delete_items(const ProductKnowledgeGraph& graph, std::span<const ItemId> items);

/// Index triplets for string triplets, resolving keys against the vocabularies.
std::vector<IndexedTriplet> resolve_triplets(std::span<const Triplet> triplets, const Vocabulary& items,
                                             const std::vector<std::string>& relation_names);

std::vector<Triplet> to_triplets(const ProductKnowledgeGraph& graph, const Vocabulary& items);

}  // namespace mpkg
