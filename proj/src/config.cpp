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

#include "mpkg/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <fmt/format.h>

#include "mpkg/errors.hpp"
#include "mpkg/io.hpp"

namespace mpkg {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(fmt::format("config key '{}': cannot parse '{}'", key, text));
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      // run
      "seed", "threads", "out", "data", "checkpoint", "task", "setting", "topn", "emit_plots",
      // pre-training
      "alpha", "beta", "theta", "gamma", "hops", "layers", "dim", "batch_size", "epochs", "lr", "l2",
      "negatives_per_positive", "neighbor_cap", "hnr_pairs_per_item", "reduction", "mra_objective",
      // fine-tuning
      "finetune_epochs", "finetune_lr", "finetune_l2", "finetune_batch_size", "selection_cutoff",
      // gradient check
      "gradcheck_h", "gradcheck_tol", "gradcheck_samples",
      // synthetic data
      "num_items", "num_blocks", "num_relations", "d_in", "p_in", "p_out", "feature_noise", "num_users",
      "interactions_per_user", "aligned_relation", "zero_shot_fraction", "heldout_fraction", "zs_heldout_fraction",
      "permute_relations"};
  return keys;
}

}  // namespace

std::vector<Index> parse_index_list(std::string_view csv) {
  std::vector<Index> out;
  for (std::string_view item : split_csv(csv)) out.push_back(parse_number<Index>("list", item));
  return out;
}

RunConfig RunConfig::parse(std::string_view text, std::string_view origin) {
  RunConfig config;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw InputError(fmt::format("{}:{}: empty key", origin, line_no));
    config.values_[key] = value;
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

std::string RunConfig::get_string(const std::string& key, std::string fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::int64_t>(key, it->second);
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw InputError(fmt::format("config key '{}': expected true or false, got '{}'", key, it->second));
}

std::vector<double> RunConfig::get_doubles(const std::string& key, std::vector<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (std::string_view item : split_csv(it->second)) out.push_back(parse_number<double>(key, item));
  return out;
}

std::vector<Index> RunConfig::get_indices(const std::string& key, std::vector<Index> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<Index> out;
  for (std::string_view item : split_csv(it->second)) out.push_back(parse_number<Index>(key, item));
  return out;
}

void RunConfig::check_known_keys() const {
  for (const auto& [key, value] : values_) {
    if (!known_keys().count(key)) throw InputError(fmt::format("unknown config key '{}'", key));
  }
}

std::uint64_t RunConfig::hash() const {
  static const std::set<std::string> ignored{"threads", "out", "data", "checkpoint", "emit_plots"};
  std::string text;
  for (const auto& [key, value] : values_) {
    if (!ignored.count(key)) text += key + "=" + value + "\n";
  }
  return fnv1a(text);
}

PretrainConfig RunConfig::pretrain_config() const {
  PretrainConfig c;
  c.weights.alpha = get_double("alpha", c.weights.alpha);
  c.weights.beta = get_double("beta", c.weights.beta);
  c.weights.theta = get_double("theta", c.weights.theta);
  c.weights.gamma = get_double("gamma", c.weights.gamma);
  c.hops = static_cast<int>(get_int("hops", c.hops));
  c.layers = static_cast<int>(get_int("layers", c.layers));
  c.dim = get_int("dim", c.dim);
  c.batch_size = get_int("batch_size", c.batch_size);
  c.epochs = static_cast<int>(get_int("epochs", c.epochs));
  c.lr = get_double("lr", c.lr);
  c.l2 = get_double("l2", c.l2);
  c.seed = get_u64("seed", c.seed);
  c.negatives_per_positive = static_cast<int>(get_int("negatives_per_positive", c.negatives_per_positive));
  if (has("neighbor_cap")) {
    const auto cap = get_int("neighbor_cap", 0);
    c.neighbor_cap = cap > 0 ? std::optional<std::size_t>(static_cast<std::size_t>(cap)) : std::nullopt;
  }
  c.hnr_pairs_per_item = static_cast<std::size_t>(get_int("hnr_pairs_per_item", 50));
  c.reduction = static_cast<int>(get_int("reduction", c.reduction));
  const std::string mra = get_string("mra_objective", "bce");
  if (mra == "bce") {
    c.mra_objective = MraObjective::Bce;
  } else if (mra == "mse") {
    c.mra_objective = MraObjective::Mse;
  } else {
    throw InputError(fmt::format("mra_objective must be bce or mse, got '{}'", mra));
  }
  c.threads = static_cast<int>(get_int("threads", c.threads));
  c.validate();
  return c;
}

FinetuneConfig RunConfig::finetune_config() const {
  FinetuneConfig c;
  c.epochs = static_cast<int>(get_int("finetune_epochs", c.epochs));
  c.lr = get_double("finetune_lr", c.lr);
  c.l2 = get_double("finetune_l2", c.l2);
  c.batch_size = get_int("finetune_batch_size", c.batch_size);
  c.layers = static_cast<int>(get_int("layers", c.layers));
  c.seed = get_u64("seed", c.seed);
  c.selection_cutoff = get_int("selection_cutoff", c.selection_cutoff);
  c.threads = static_cast<int>(get_int("threads", c.threads));
  c.validate();
  return c;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec s;
  s.num_items = get_int("num_items", s.num_items);
  s.num_blocks = get_int("num_blocks", s.num_blocks);
  s.num_relations = get_int("num_relations", s.num_relations);
  s.d_in = get_int("d_in", s.d_in);
  s.p_in = get_doubles("p_in", s.p_in);
  s.p_out = get_doubles("p_out", s.p_out);
  s.feature_noise = get_double("feature_noise", s.feature_noise);
  s.num_users = get_int("num_users", s.num_users);
  s.interactions_per_user = get_int("interactions_per_user", s.interactions_per_user);
  const auto aligned = get_int("aligned_relation", 0);
  if (aligned < 0) throw InputError("aligned_relation must be non-negative");
  s.aligned_relation = static_cast<RelationId>(aligned);
  s.zero_shot_fraction = get_double("zero_shot_fraction", s.zero_shot_fraction);
  s.heldout_fraction = get_double("heldout_fraction", s.heldout_fraction);
  s.zs_heldout_fraction = get_double("zs_heldout_fraction", s.zs_heldout_fraction);
  s.permute_relations = get_bool("permute_relations", s.permute_relations);
  s.seed = get_u64("seed", s.seed);
  s.validate();
  return s;
}

}  // namespace mpkg
