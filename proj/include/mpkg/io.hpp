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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/interactions.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

namespace fs = std::filesystem;

/// `head<TAB>relation<TAB>tail` per line.
std::vector<Triplet> load_triplets(const fs::path& path);
void save_triplets(const fs::path& path, std::span<const Triplet> triplets);

/// Header line `MPKGF1 <rows> <cols>`, then rows*cols little-endian float32
/// values in row-major order. Values are stored at float precision.
Matrix load_features(const fs::path& path);
void save_features(const fs::path& path, const Matrix& features);

/// `key<TAB>index` per line, indices dense from `first_index` in file order.
/// The returned vocabulary numbers keys from 0.
Vocabulary load_vocab(const fs::path& path, std::uint32_t first_index = 0);
void save_vocab(const fs::path& path, const Vocabulary& vocab, std::uint32_t first_index = 0);

/// `user<TAB>item<TAB>unix_timestamp` with string keys.
struct InteractionRecord {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;
};

std::vector<InteractionRecord> load_interactions(const fs::path& path);
void save_interactions(const fs::path& path, std::span<const InteractionRecord> records);

/// Resolves item keys against `items` (which must contain them) and user
/// keys against `users`, adding unseen users.
std::vector<Interaction> resolve_interactions(std::span<const InteractionRecord> records, const Vocabulary& items,
                                              Vocabulary& users);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a_file(const fs::path& path);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view contents);

}  // namespace mpkg
