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

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/errors.hpp"
#include "mpkg/random.hpp"

namespace mpkg::testing {

inline ProductKnowledgeGraph make_graph(Index n, std::vector<std::vector<Edge>> edges, Index d_in = 2) {
  std::vector<std::string> names;
  for (std::size_t r = 0; r < edges.size(); ++r) names.push_back("r" + std::to_string(r));
  Matrix x = Matrix::Zero(n, d_in);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d_in; ++k) x(i, k) = 0.1 * static_cast<double>(i + 1) - 0.05 * static_cast<double>(k);
  }
  return ProductKnowledgeGraph(std::move(names), std::move(edges), std::move(x));
}

/// Erdos-Renyi edges over n items, one list per relation.
inline std::vector<std::vector<Edge>> random_edges(Index n, std::size_t relations, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::vector<Edge>> edges(relations);
  for (auto& list : edges) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (coin(rng)) list.push_back({static_cast<ItemId>(i), static_cast<ItemId>(j)});
      }
    }
  }
  return edges;
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> gauss(0.0, sd);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
  return m;
}

/// Dense D^-1/2 (A+I) D^-1/2 built from scratch with symmetrized edges.
inline Matrix dense_normalized(Index n, std::span<const Edge> edges) {
  Matrix a = Matrix::Identity(n, n);
  for (const Edge& e : edges) {
    if (e.head == e.tail) continue;
    a(e.head, e.tail) = 1.0;
    a(e.tail, e.head) = 1.0;
  }
  const Vector inv = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  return inv.asDiagonal() * a * inv.asDiagonal();
}

inline Matrix dense_propagate(Index n, std::span<const Edge> edges, const Matrix& x, int layers) {
  const Matrix s = dense_normalized(n, edges);
  Matrix power = Matrix::Identity(n, n);
  for (int m = 0; m < layers; ++m) power = power * s;
  return power * x;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mpkg-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace mpkg::testing
