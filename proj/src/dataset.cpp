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

#include "mpkg/dataset.hpp"

#include <fmt/format.h>

#include "mpkg/errors.hpp"
#include "mpkg/io.hpp"

namespace mpkg {
namespace {

std::vector<Triplet> to_strings(std::span<const IndexedTriplet> triplets, const Vocabulary& items,
                                const std::vector<std::string>& names) {
  std::vector<Triplet> out;
  out.reserve(triplets.size());
  for (const IndexedTriplet& t : triplets) out.push_back({items.key(t.head), names.at(t.relation), items.key(t.tail)});
  return out;
}

Vocabulary names_vocab(const std::vector<std::string>& names) {
  Vocabulary v;
  for (const auto& n : names) v.add(n);
  return v;
}

}  // namespace

std::vector<bool> Dataset::zero_shot_mask() const {
  std::vector<bool> mask(all_items.size(), false);
  for (std::size_t i = items.size(); i < mask.size(); ++i) mask[i] = true;
  return mask;
}

Dataset to_dataset(const SyntheticData& data) {
  Dataset d;
  d.relation_names = data.relation_names;
  d.all_items = data.items;
  for (Index i = 0; i < data.graph.num_items(); ++i) d.items.add(data.items.key(static_cast<std::uint32_t>(i)));
  d.users = data.users;
  d.graph = data.graph;
  d.valid_triplets = data.valid_triplets;
  d.test_triplets = data.test_triplets;
  d.events = data.events;
  d.interactions = data.dataset;
  d.zero_shot = data.zero_shot;
  d.zs_test_triplets = data.zs_test_triplets;
  return d;
}

std::vector<ManifestEntry> write_dataset(const std::filesystem::path& dir, const Dataset& d) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto note = [&](const std::string& name) {
    written.push_back(name);
    return dir / name;
  };
  save_vocab(note("relations.tsv"), names_vocab(d.relation_names));
  save_vocab(note("items.tsv"), d.items);
  const auto pkg = to_triplets(d.graph, d.items);
  save_triplets(note("pkg_triplets.tsv"), pkg);
  save_features(note("pkg_features.bin"), d.graph.features());
  save_triplets(note("valid_triplets.tsv"), to_strings(d.valid_triplets, d.items, d.relation_names));
  save_triplets(note("test_triplets.tsv"), to_strings(d.test_triplets, d.items, d.relation_names));
  std::vector<InteractionRecord> records;
  records.reserve(d.events.size());
  for (const Interaction& e : d.events) {
    records.push_back({d.users.key(e.user), d.all_items.key(e.item), e.timestamp});
  }
  save_interactions(note("interactions.tsv"), records);
  save_vocab(note("users.tsv"), d.users);
  if (d.zero_shot.size() > 0) {
    Vocabulary zs;
    for (std::size_t i = d.items.size(); i < d.all_items.size(); ++i) zs.add(d.all_items.key(static_cast<std::uint32_t>(i)));
    save_vocab(note("zs_items.tsv"), zs, static_cast<std::uint32_t>(d.items.size()));
    save_triplets(note("zs_triplets.tsv"), to_strings(d.zero_shot.edges, d.all_items, d.relation_names));
    save_features(note("zs_features.bin"), d.zero_shot.features);
    save_triplets(note("zs_test_triplets.tsv"), to_strings(d.zs_test_triplets, d.all_items, d.relation_names));
  }
  std::vector<ManifestEntry> manifest;
  std::string text;
  for (const auto& name : written) {
    manifest.push_back({name, fnv1a_file(dir / name)});
    text += fmt::format("{}\t{:016x}\n", name, manifest.back().hash);
  }
  write_file(dir / "manifest.tsv", text);
  return manifest;
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.relation_names = load_vocab(dir / "relations.tsv").keys();
  d.items = load_vocab(dir / "items.tsv");
  Vocabulary items = d.items;
  d.graph = build_graph(load_triplets(dir / "pkg_triplets.tsv"), load_features(dir / "pkg_features.bin"),
                        d.relation_names, &items);
  d.valid_triplets = resolve_triplets(load_triplets(dir / "valid_triplets.tsv"), d.items, d.relation_names);
  d.test_triplets = resolve_triplets(load_triplets(dir / "test_triplets.tsv"), d.items, d.relation_names);

  d.all_items = d.items;
  if (std::filesystem::exists(dir / "zs_items.tsv")) {
    const Vocabulary zs = load_vocab(dir / "zs_items.tsv", static_cast<std::uint32_t>(d.items.size()));
    for (const auto& key : zs.keys()) {
      if (d.all_items.find(key)) throw FormatError(fmt::format("zero-shot item '{}' is also a warm item", key));
      d.all_items.add(key);
    }
    d.zero_shot.features = load_features(dir / "zs_features.bin");
    if (d.zero_shot.features.rows() != static_cast<Index>(zs.size())) {
      throw FormatError("zs_features.bin row count does not match zs_items.tsv");
    }
    d.zero_shot.edges = resolve_triplets(load_triplets(dir / "zs_triplets.tsv"), d.all_items, d.relation_names);
    d.zs_test_triplets =
        resolve_triplets(load_triplets(dir / "zs_test_triplets.tsv"), d.all_items, d.relation_names);
  } else {
    d.zero_shot.features = Matrix(0, d.graph.feature_dim());
  }

  if (std::filesystem::exists(dir / "interactions.tsv")) {
    if (std::filesystem::exists(dir / "users.tsv")) d.users = load_vocab(dir / "users.tsv");
    d.events = resolve_interactions(load_interactions(dir / "interactions.tsv"), d.all_items, d.users);
    if (!d.events.empty()) {
      d.interactions = chronological_split(d.events, static_cast<Index>(d.all_items.size()),
                                           static_cast<Index>(d.users.size()));
    }
  }
  return d;
}

}  // namespace mpkg
