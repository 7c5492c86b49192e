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
#include <string>
#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/inference.hpp"
#include "mpkg/interactions.hpp"

namespace mpkg {

/// Planted-block product graph with relation-aligned interactions.
struct SyntheticSpec {
  Index num_items = 300;
  Index num_blocks = 3;
  Index num_relations = 3;
  Index d_in = 64;
  // One entry per relation, or a single entry shared by all.
  std::vector<double> p_in{0.2};
  std::vector<double> p_out{0.01};
  double feature_noise = 0.3;
  Index num_users = 200;
  Index interactions_per_user = 10;
  RelationId aligned_relation = 0;
  double zero_shot_fraction = 0.1;
  // Share of warm edges held out, split evenly into validation and test.
  double heldout_fraction = 0.1;
  // Share of each zero-shot item's edges held out for evaluation rather than
  // attached at inference.
  double zs_heldout_fraction = 0.5;
  // Relations other than 0 get their blocks through a random item permutation.
  bool permute_relations = true;
  std::uint64_t seed = 0;

  double p_in_for(Index r) const { return p_in.size() == 1 ? p_in[0] : p_in.at(static_cast<std::size_t>(r)); }
  double p_out_for(Index r) const { return p_out.size() == 1 ? p_out[0] : p_out.at(static_cast<std::size_t>(r)); }
  void validate() const;
};

struct SyntheticData {
  std::vector<std::string> relation_names;
  Vocabulary items;  // warm items first, zero-shot items last
  Vocabulary users;
  /// Training graph over the warm items only.
  ProductKnowledgeGraph graph;
  std::vector<IndexedTriplet> valid_triplets;
  std::vector<IndexedTriplet> test_triplets;
  std::vector<Interaction> events;  // in timestamp order
  InteractionDataset dataset;
  /// Zero-shot items with the edges used to attach them.
  ZeroShotBatch zero_shot;
  /// Held-out edges of zero-shot items, head on the zero-shot side.
  std::vector<IndexedTriplet> zs_test_triplets;
  /// Block of every item under each relation.
  std::vector<std::vector<Index>> blocks;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace mpkg
