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
#include <string_view>
#include <vector>

#include "mpkg/finetune.hpp"
#include "mpkg/pretrain.hpp"
#include "mpkg/synthetic.hpp"

namespace mpkg {

/// Flat `key = value` settings; `#` starts a comment.
class RunConfig {
 public:
  static RunConfig parse(std::string_view text, std::string_view origin = "config");
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, std::string fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<Index> get_indices(const std::string& key, std::vector<Index> fallback) const;

  /// Throws InputError naming the first key that is not recognized.
  void check_known_keys() const;

  /// FNV-1a over the sorted `key=value` lines, ignoring keys that do not
  /// affect results (threads, paths).
  std::uint64_t hash() const;

  PretrainConfig pretrain_config() const;
  FinetuneConfig finetune_config() const;
  SyntheticSpec synthetic_spec() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<Index> parse_index_list(std::string_view csv);

}  // namespace mpkg
