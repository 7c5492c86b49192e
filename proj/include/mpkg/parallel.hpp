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
#include <exception>
#include <thread>
#include <vector>

#include "mpkg/types.hpp"

namespace mpkg {

/// Runs body(i) for i in [begin, end) over at most `threads` workers, each
/// owning one contiguous chunk. Callers write to disjoint outputs per index,
/// so results never depend on the worker count.
template <typename Body>
void parallel_for(Index begin, Index end, int threads, Body&& body) {
  const Index count = end - begin;
  if (count <= 0) return;
  const Index workers = std::clamp<Index>(threads, 1, count);
  if (workers == 1) {
    for (Index i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Index w = 0; w < workers; ++w) {
      const Index lo = begin + count * w / workers;
      const Index hi = begin + count * (w + 1) / workers;
      pool.emplace_back([lo, hi, &body, &error = errors[static_cast<std::size_t>(w)]] {
        try {
          for (Index i = lo; i < hi; ++i) body(i);
        } catch (...) {
          error = std::current_exception();
        }
      });
    }
  }
  // Lowest chunk wins so the reported error does not depend on timing.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mpkg
