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

#include "mpkg/checkpoint.hpp"

#include <cstring>
#include <set>

#include <fmt/format.h>

#include "mpkg/errors.hpp"
#include "mpkg/io.hpp"

namespace mpkg {
namespace {

constexpr char kMagic[8] = {'M', 'P', 'K', 'G', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto at = buf_.size();
    buf_.resize(at + sizeof(T));
    std::memcpy(buf_.data() + at, &value, sizeof(T));
  }
  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void put_doubles(const double* data, Index count) {
    const auto at = buf_.size();
    buf_.resize(at + static_cast<std::size_t>(count) * sizeof(double));
    if (count > 0) std::memcpy(buf_.data() + at, data, static_cast<std::size_t>(count) * sizeof(double));
  }
  void raw(std::string_view s) { buf_.append(s); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string(const char* what) {
    const auto n = get<std::uint32_t>(what);
    need(n, what);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void get_doubles(double* out, std::uint64_t count, const char* what) {
    if (count > (data_.size() - pos_) / sizeof(double)) fail_truncated(what);
    const auto bytes = static_cast<std::size_t>(count) * sizeof(double);
    if (bytes > 0) std::memcpy(out, data_.data() + pos_, bytes);
    pos_ += bytes;
  }
  std::string_view raw(std::size_t n, const char* what) {
    need(n, what);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (n > data_.size() - pos_) fail_truncated(what);
  }
  [[noreturn]] void fail_truncated(const char* what) const {
    throw CheckpointError(fmt::format("checkpoint truncated while reading {} at byte {}", what, pos_));
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(std::string_view(kMagic, sizeof kMagic));
  w.put(kCheckpointVersion);
  w.put(ckpt.config_hash);
  w.put(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.put_string(k);
    w.put_string(v);
  }
  const auto tensors = named_tensors(ckpt.params);
  w.put(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    w.put_string(t.name);
    w.put(static_cast<std::uint64_t>(t.rows));
    w.put(static_cast<std::uint64_t>(t.cols));
    w.put_doubles(t.data, t.size());
  }
  w.put(static_cast<std::uint8_t>(ckpt.opt_state ? 1 : 0));
  if (ckpt.opt_state) {
    const OptState& s = *ckpt.opt_state;
    if (s.first_moment.size() != tensors.size() || s.second_moment.size() != tensors.size()) {
      throw CheckpointError("optimizer state does not match the parameter tensors");
    }
    w.put(s.step);
    for (double v : {s.config.lr, s.config.l2, s.config.beta1, s.config.beta2, s.config.eps}) w.put(v);
    for (const auto* moments : {&s.first_moment, &s.second_moment}) {
      for (std::size_t k = 0; k < tensors.size(); ++k) {
        const Matrix& m = (*moments)[k];
        if (m.size() != tensors[k].size()) throw CheckpointError("optimizer moment shape mismatch for " + tensors[k].name);
        w.put_doubles(m.data(), m.size());
      }
    }
  }
  w.put_string(ckpt.rng_state);
  return w.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  r.raw(sizeof kMagic, "magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(fmt::format("unsupported checkpoint version {} (expected {})", version, kCheckpointVersion));
  }
  Checkpoint ckpt;
  ckpt.config_hash = r.get<std::uint64_t>("config hash");
  const auto meta_count = r.get<std::uint32_t>("metadata count");
  for (std::uint32_t k = 0; k < meta_count; ++k) {
    std::string key = r.get_string("metadata key");
    ckpt.meta[std::move(key)] = r.get_string("metadata value");
  }

  struct Raw {
    std::uint64_t rows;
    std::uint64_t cols;
    std::vector<double> data;
  };
  std::map<std::string, Raw> raw;
  std::vector<std::string> order;
  const auto tensor_count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t k = 0; k < tensor_count; ++k) {
    std::string name = r.get_string("tensor name");
    Raw t;
    t.rows = r.get<std::uint64_t>("tensor rows");
    t.cols = r.get<std::uint64_t>("tensor cols");
    if (t.cols != 0 && t.rows > bytes.size() / t.cols) throw CheckpointError("tensor " + name + " has an implausible shape");
    t.data.resize(static_cast<std::size_t>(t.rows * t.cols));
    r.get_doubles(t.data.data(), t.data.size(), "tensor data");
    if (!raw.emplace(name, std::move(t)).second) throw CheckpointError("duplicate tensor " + name);
    order.push_back(std::move(name));
  }

  std::size_t relations = 0;
  while (raw.count(fmt::format("encoder.W.{}", relations))) ++relations;
  if (relations == 0 || !raw.count("gate.fc1.weight")) throw CheckpointError("checkpoint lacks encoder or gate tensors");
  const Raw& w0 = raw.at("encoder.W.0");
  ckpt.params = shaped_params(relations, static_cast<Index>(w0.rows), static_cast<Index>(w0.cols),
                              static_cast<Index>(raw.at("gate.fc1.weight").cols));
  auto tensors = named_tensors(ckpt.params);
  if (tensors.size() != raw.size()) {
    throw CheckpointError(fmt::format("checkpoint has {} tensors, model expects {}", raw.size(), tensors.size()));
  }
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const auto& t = tensors[k];
    if (order[k] != t.name) throw CheckpointError("unexpected tensor order at " + order[k]);
    const Raw& src = raw.at(t.name);
    if (src.rows != static_cast<std::uint64_t>(t.rows) || src.cols != static_cast<std::uint64_t>(t.cols)) {
      throw CheckpointError(fmt::format("tensor {} has shape {}x{}, expected {}x{}", t.name, src.rows, src.cols,
                                        t.rows, t.cols));
    }
    if (!src.data.empty()) std::memcpy(t.data, src.data.data(), src.data.size() * sizeof(double));
  }

  const auto has_opt = r.get<std::uint8_t>("optimizer flag");
  if (has_opt > 1) throw CheckpointError("corrupt optimizer flag");
  if (has_opt) {
    OptState s;
    s.step = r.get<std::uint64_t>("optimizer step");
    s.config.lr = r.get<double>("optimizer lr");
    s.config.l2 = r.get<double>("optimizer l2");
    s.config.beta1 = r.get<double>("optimizer beta1");
    s.config.beta2 = r.get<double>("optimizer beta2");
    s.config.eps = r.get<double>("optimizer eps");
    for (auto* moments : {&s.first_moment, &s.second_moment}) {
      for (const auto& t : tensors) {
        Matrix m(t.rows, t.cols);
        r.get_doubles(m.data(), static_cast<std::uint64_t>(m.size()), "optimizer moments");
        moments->push_back(std::move(m));
      }
    }
    ckpt.opt_state = std::move(s);
  }
  ckpt.rng_state = r.get_string("rng state");
  if (!r.done()) throw CheckpointError("unexpected trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace mpkg
