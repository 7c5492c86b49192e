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


#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "mpkg/dataset.hpp"
#include "mpkg/inference.hpp"
#include "mpkg/io.hpp"
#include "mpkg/synthetic.hpp"

using namespace mpkg;
using namespace mpkg::testing;

namespace {

struct PairCounts {
  double intra_pairs = 0, intra_edges = 0, inter_pairs = 0, inter_edges = 0;
};

PairCounts count_pairs(const SyntheticData& d, RelationId r) {
  const auto& block = d.blocks[r];
  const Index n = d.graph.num_items();
  PairCounts c;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) (block[i] == block[j] ? c.intra_pairs : c.inter_pairs) += 1;
  }
  for (const Edge& e : d.graph.edges(r)) (block[e.head] == block[e.tail] ? c.intra_edges : c.inter_edges) += 1;
  return c;
}

}  // namespace

TEST_CASE("degenerate probabilities give disjoint cliques") {
  SyntheticSpec spec;
  spec.num_items = 20;
  spec.num_blocks = 2;
  spec.p_in = {1.0};
  spec.p_out = {0.0};
  spec.zero_shot_fraction = 0.0;
  spec.heldout_fraction = 0.0;
  spec.num_users = 5;
  const auto d = generate_synthetic(spec);
  for (RelationId r = 0; r < 3; ++r) {
    const auto c = count_pairs(d, r);
    CHECK(c.intra_edges == c.intra_pairs);
    CHECK(c.inter_edges == 0);
    CHECK(c.intra_pairs == 2 * 45);
  }
  CHECK(d.zero_shot.empty());
  CHECK(d.zs_test_triplets.empty());
}

TEST_CASE("intra-block density concentrates around p_in") {
  SyntheticSpec spec;
  spec.zero_shot_fraction = 0.0;
  spec.heldout_fraction = 0.0;
  spec.seed = 77;
  const auto d = generate_synthetic(spec);
  for (RelationId r = 0; r < 3; ++r) {
    const auto c = count_pairs(d, r);
    const double sd_in = std::sqrt(c.intra_pairs * 0.2 * 0.8);
    CHECK(std::abs(c.intra_edges - 0.2 * c.intra_pairs) <= 3.0 * sd_in);
    const double sd_out = std::sqrt(c.inter_pairs * 0.01 * 0.99);
    CHECK(std::abs(c.inter_edges - 0.01 * c.inter_pairs) <= 3.0 * sd_out);
  }
  // Relations other than the first use a permuted partition.
  CHECK(d.blocks[0] != d.blocks[1]);
}

TEST_CASE("zero-shot items are withheld from the training graph") {
  SyntheticSpec spec;
  spec.seed = 3;
  const auto d = generate_synthetic(spec);
  const Index warm = d.graph.num_items();
  CHECK(warm == 270);
  CHECK(d.zero_shot.size() == 30);
  CHECK(d.items.size() == 300);
  ZeroShotBatch rows_only;
  rows_only.features = d.zero_shot.features;
  const auto adj = attach(d.graph, rows_only).union_adjacency();
  for (Index i = warm; i < 300; ++i) CHECK(adj.degree(static_cast<ItemId>(i)) == 0);
  for (const auto& t : d.zero_shot.edges) {
    CHECK(t.head >= static_cast<ItemId>(warm));
    CHECK(t.head < 300);
  }
  for (const auto& t : d.zs_test_triplets) CHECK(t.head >= static_cast<ItemId>(warm));
  // The zero-shot items exist in the attached graph but had no training edges.
  for (const auto& t : d.valid_triplets) CHECK(t.head < static_cast<ItemId>(warm));
  for (const auto& t : d.test_triplets) CHECK(t.tail < static_cast<ItemId>(warm));
  CHECK(d.zero_shot.features.cols() == spec.d_in);
}

TEST_CASE("held-out warm edges are disjoint from training edges") {
  SyntheticSpec spec;
  spec.seed = 4;
  const auto d = generate_synthetic(spec);
  CHECK_FALSE(d.valid_triplets.empty());
  CHECK_FALSE(d.test_triplets.empty());
  for (const auto* list : {&d.valid_triplets, &d.test_triplets}) {
    for (const auto& t : *list) {
      const auto adj = d.graph.relation_adjacency(t.relation);
      CHECK_FALSE(adj.contains(t.head, t.tail));
    }
  }
}

TEST_CASE("interactions follow the chronological protocol") {
  SyntheticSpec spec;
  spec.seed = 5;
  const auto d = generate_synthetic(spec);
  CHECK(d.events.size() == static_cast<std::size_t>(spec.num_users * spec.interactions_per_user));
  CHECK(std::is_sorted(d.events.begin(), d.events.end(),
                       [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; }));
  CHECK_FALSE(d.dataset.zero_shot_items().empty());
  for (std::size_t k = 0; k < d.events.size(); ++k) {
    if (d.dataset.split[k] == Split::Train) CHECK(d.events[k].item < static_cast<ItemId>(d.graph.num_items()));
  }
}

TEST_CASE("same seed gives identical data") {
  SyntheticSpec spec;
  spec.num_items = 80;
  spec.seed = 9;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(a.graph == b.graph);
  CHECK(a.events == b.events);
  CHECK(a.zero_shot.features == b.zero_shot.features);
  CHECK(a.zero_shot.edges == b.zero_shot.edges);
  spec.seed = 10;
  CHECK_FALSE(generate_synthetic(spec).graph == a.graph);

  TempDir da("gen-a"), db("gen-b");
  const auto ma = write_dataset(da.path(), to_dataset(a));
  const auto mb = write_dataset(db.path(), to_dataset(b));
  REQUIRE(ma.size() == mb.size());
  for (std::size_t k = 0; k < ma.size(); ++k) {
    CHECK(ma[k].file == mb[k].file);
    CHECK(ma[k].hash == mb[k].hash);
    CHECK(ma[k].hash == fnv1a_file(da / ma[k].file));
  }
}

TEST_CASE("dataset directory round trip") {
  SyntheticSpec spec;
  spec.num_items = 90;
  spec.num_users = 30;
  spec.seed = 11;
  const auto original = to_dataset(generate_synthetic(spec));
  TempDir dir("ds");
  write_dataset(dir.path(), original);
  CHECK(std::filesystem::exists(dir / "manifest.tsv"));
  CHECK(std::filesystem::exists(dir / "zs_features.bin"));
  const auto back = read_dataset(dir.path());
  CHECK(back.relation_names == original.relation_names);
  CHECK(back.items == original.items);
  CHECK(back.all_items == original.all_items);
  CHECK(back.graph == original.graph);
  CHECK(back.valid_triplets == original.valid_triplets);
  CHECK(back.test_triplets == original.test_triplets);
  CHECK(back.events == original.events);
  CHECK(back.zero_shot.features == original.zero_shot.features);
  CHECK(back.zero_shot.edges == original.zero_shot.edges);
  CHECK(back.zs_test_triplets == original.zs_test_triplets);
  CHECK(back.zero_shot_mask() == original.zero_shot_mask());
}

TEST_CASE("no zero-shot files without zero-shot items") {
  SyntheticSpec spec;
  spec.num_items = 40;
  spec.zero_shot_fraction = 0.0;
  TempDir dir("nozs");
  write_dataset(dir.path(), to_dataset(generate_synthetic(spec)));
  for (const char* f : {"zs_items.tsv", "zs_triplets.tsv", "zs_features.bin", "zs_test_triplets.tsv"}) {
    CHECK_FALSE(std::filesystem::exists(dir / f));
  }
  const auto back = read_dataset(dir.path());
  CHECK(back.zero_shot.empty());
}

TEST_CASE("invalid specs are rejected") {
  SyntheticSpec spec;
  spec.num_blocks = 400;
  CHECK_THROWS_AS(generate_synthetic(spec), InputError);
  spec = {};
  spec.p_out = {0.3};
  CHECK_THROWS_AS(generate_synthetic(spec), InputError);
  spec = {};
  spec.zero_shot_fraction = 0.6;
  CHECK_THROWS_AS(generate_synthetic(spec), InputError);
  spec = {};
  spec.aligned_relation = 3;
  CHECK_THROWS_AS(generate_synthetic(spec), InputError);
}
