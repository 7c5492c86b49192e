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

#include "mpkg/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mpkg/errors.hpp"

namespace mpkg {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError(fmt::format("write to {} failed", path.string()));
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

// Calls fn(line_number, fields) for each non-empty line.
template <typename Fn>
void for_each_row(const fs::path& path, std::size_t expected_fields, Fn&& fn) {
  const std::string text = read_file(path);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != expected_fields) {
      throw FormatError(fmt::format("{}:{}: expected {} tab-separated fields, found {}", path.string(), line_no,
                                    expected_fields, fields.size()));
    }
    for (std::string_view f : fields) {
      if (f.empty()) throw FormatError(fmt::format("{}:{}: empty field", path.string(), line_no));
    }
    fn(line_no, fields);
  }
}

template <typename Int>
Int parse_int(std::string_view text, const fs::path& path, std::size_t line_no) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(fmt::format("{}:{}: '{}' is not an integer", path.string(), line_no, text));
  }
  return value;
}

}  // namespace

std::vector<Triplet> load_triplets(const fs::path& path) {
  std::vector<Triplet> out;
  for_each_row(path, 3, [&](std::size_t, const auto& f) {
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
  });
  return out;
}

void save_triplets(const fs::path& path, std::span<const Triplet> triplets) {
  std::string text;
  for (const Triplet& t : triplets) text += fmt::format("{}\t{}\t{}\n", t.head, t.relation, t.tail);
  write_file(path, text);
}

Matrix load_features(const fs::path& path) {
  const std::string data = read_file(path);
  const std::size_t newline = data.find('\n');
  if (newline == std::string::npos) throw FormatError(fmt::format("{}: missing feature header", path.string()));
  std::istringstream header(data.substr(0, newline));
  std::string magic;
  long long rows = -1;
  long long cols = -1;
  std::string extra;
  if (!(header >> magic >> rows >> cols) || magic != "MPKGF1" || rows < 0 || cols < 0 || (header >> extra)) {
    throw FormatError(fmt::format("{}: malformed feature header '{}'", path.string(), data.substr(0, newline)));
  }
  const std::size_t expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * sizeof(float);
  const std::size_t payload = data.size() - newline - 1;
  if (payload < expected) {
    throw FormatError(fmt::format("{}: truncated feature payload: {} of {} bytes", path.string(), payload, expected));
  }
  if (payload > expected) {
    throw FormatError(fmt::format("{}: {} unexpected bytes after the feature payload", path.string(),
                                  payload - expected));
  }
  Matrix out(rows, cols);
  const char* p = data.data() + newline + 1;
  for (Index k = 0; k < out.size(); ++k) {
    float v;
    std::memcpy(&v, p + k * static_cast<Index>(sizeof(float)), sizeof v);
    out.data()[k] = v;
  }
  return out;
}

void save_features(const fs::path& path, const Matrix& features) {
  std::string data = fmt::format("MPKGF1 {} {}\n", features.rows(), features.cols());
  const std::size_t offset = data.size();
  data.resize(offset + static_cast<std::size_t>(features.size()) * sizeof(float));
  for (Index k = 0; k < features.size(); ++k) {
    const auto v = static_cast<float>(features.data()[k]);
    std::memcpy(data.data() + offset + static_cast<std::size_t>(k) * sizeof(float), &v, sizeof v);
  }
  write_file(path, data);
}

Vocabulary load_vocab(const fs::path& path, std::uint32_t first_index) {
  Vocabulary vocab;
  for_each_row(path, 2, [&](std::size_t line_no, const auto& f) {
    const auto index = parse_int<std::uint32_t>(f[1], path, line_no);
    if (vocab.find(f[0])) throw FormatError(fmt::format("{}:{}: duplicate key '{}'", path.string(), line_no, f[0]));
    if (index != first_index + vocab.size()) {
      throw FormatError(fmt::format("{}:{}: index {} is not the next dense index {}", path.string(), line_no, index,
                                    first_index + vocab.size()));
    }
    vocab.add(f[0]);
  });
  return vocab;
}

void save_vocab(const fs::path& path, const Vocabulary& vocab, std::uint32_t first_index) {
  std::string text;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    text += fmt::format("{}\t{}\n", vocab.key(static_cast<std::uint32_t>(i)), first_index + i);
  }
  write_file(path, text);
}

std::vector<InteractionRecord> load_interactions(const fs::path& path) {
  std::vector<InteractionRecord> out;
  for_each_row(path, 3, [&](std::size_t line_no, const auto& f) {
    out.push_back({std::string(f[0]), std::string(f[1]), parse_int<std::int64_t>(f[2], path, line_no)});
  });
  return out;
}

void save_interactions(const fs::path& path, std::span<const InteractionRecord> records) {
  std::string text;
  for (const auto& r : records) text += fmt::format("{}\t{}\t{}\n", r.user, r.item, r.timestamp);
  write_file(path, text);
}

std::vector<Interaction> resolve_interactions(std::span<const InteractionRecord> records, const Vocabulary& items,
                                              Vocabulary& users) {
  std::vector<Interaction> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto item = items.find(r.item);
    if (!item) throw InputError(fmt::format("interaction refers to unknown item '{}'", r.item));
    out.push_back({users.add(r.user), *item, r.timestamp});
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const fs::path& path) { return fnv1a(read_file(path)); }

}  // namespace mpkg
