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
#include <map>
#include <optional>
#include <string>

#include "mpkg/optim.hpp"
#include "mpkg/params.hpp"

namespace mpkg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Named tensors plus everything needed to resume or reproduce a run.
struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::map<std::string, std::string> meta;
  ModelParams params;
  std::optional<OptState> opt_state;
  std::string rng_state;
};

/// Layout: "MPKGCKPT", u32 version, u64 config hash, u32 meta count and
/// (key, value) strings, u32 tensor count and (name, u64 rows, u64 cols, f64
/// data) records, u8 optimizer flag [u64 step, f64 lr l2 beta1 beta2 eps, f64
/// first and second moments per tensor], rng state string. Strings are u32
/// length plus bytes; everything little-endian.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws CheckpointError for a bad magic, version, structure or size.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mpkg
