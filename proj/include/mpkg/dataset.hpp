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
#include <filesystem>
#include <string>
#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/inference.hpp"
#include "mpkg/interactions.hpp"
#include "mpkg/synthetic.hpp"

namespace mpkg {

/// A dataset directory in memory. Zero-shot items take ids after the warm
/// items of the training graph.
struct Dataset {
  std::vector<std::string> relation_names;
  Vocabulary items;      // warm items, the training graph's index space
  Vocabulary all_items;  // warm then zero-shot items
  Vocabulary users;
  ProductKnowledgeGraph graph;
  std::vector<IndexedTriplet> valid_triplets;
  std::vector<IndexedTriplet> test_triplets;
  std::vector<Interaction> events;
  InteractionDataset interactions;
  ZeroShotBatch zero_shot;
  std::vector<IndexedTriplet> zs_test_triplets;

  /// Flags every id at or past the warm item count.
  std::vector<bool> zero_shot_mask() const;
};

Dataset to_dataset(const SyntheticData& data);

struct ManifestEntry {
  std::string file;
  std::uint64_t hash = 0;
};

/// Writes relations.tsv, items.tsv, pkg_triplets.tsv, pkg_features.bin,
/// valid_triplets.tsv, test_triplets.tsv, interactions.tsv and users.tsv;
/// with zero-shot items also zs_items.tsv, zs_triplets.tsv, zs_features.bin
/// and zs_test_triplets.tsv. Finishes with manifest.tsv listing the FNV-1a
/// hash of each file. Creates `dir` if needed.
std::vector<ManifestEntry> write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Reads a directory written by write_dataset. Interaction and zero-shot files
/// are optional.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace mpkg
