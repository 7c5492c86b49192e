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

#include <algorithm>
#include <vector>

#include "mpkg/errors.hpp"
#include "mpkg/parallel.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

/// Compressed sparse row matrix. Column indices are sorted and unique per row.
template <typename Scalar>
struct CsrMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_offsets{0};
  std::vector<Index> col_indices;
  std::vector<Scalar> values;

  Index nnz() const { return static_cast<Index>(values.size()); }

  Scalar coeff(Index i, Index j) const {
    auto first = col_indices.begin() + row_offsets[i];
    auto last = col_indices.begin() + row_offsets[i + 1];
    auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? values[static_cast<std::size_t>(it - col_indices.begin())] : Scalar(0);
  }

  MatrixX<Scalar> to_dense() const {
    MatrixX<Scalar> dense = MatrixX<Scalar>::Zero(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index k = row_offsets[i]; k < row_offsets[i + 1]; ++k) dense(i, col_indices[k]) = values[k];
    }
    return dense;
  }

  /// Exact (bitwise) symmetry of values.
  bool is_symmetric() const {
    if (rows != cols) return false;
    for (Index i = 0; i < rows; ++i) {
      for (Index k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
        if (coeff(col_indices[k], i) != values[k]) return false;
      }
    }
    return true;
  }
};

/// Sparse times dense. Each output row accumulates its nonzeros in ascending
/// column order, so the result is identical for any thread count.
template <typename Scalar, typename Derived>
MatrixX<Scalar> spmm(const CsrMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& x, int threads = 1) {
  if (x.rows() != a.cols) {
    throw InputError("spmm shape mismatch: sparse is " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     ", dense has " + std::to_string(x.rows()) + " rows");
  }
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(a.rows, x.cols());
  parallel_for(0, a.rows, threads, [&](Index i) {
    for (Index k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      out.row(i) += a.values[k] * x.row(a.col_indices[k]);
    }
  });
  return out;
}

}  // namespace mpkg
