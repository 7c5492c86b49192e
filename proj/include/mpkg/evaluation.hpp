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

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpkg/graph.hpp"
#include "mpkg/interactions.hpp"
#include "mpkg/types.hpp"

namespace mpkg {

enum class CandidateSetting { All, ZeroShot };
enum class Cohort { All, Warm, ZeroShot };

std::string_view to_string(CandidateSetting setting);
std::string_view to_string(Cohort cohort);
std::optional<CandidateSetting> parse_candidate_setting(std::string_view text);

struct CohortMetrics {
  Cohort cohort = Cohort::All;
  std::size_t queries = 0;
  std::vector<double> recall;  // aligned with EvalReport::topn
  std::vector<double> ndcg;
  double mrr = 0.0;
  /// Mean H_C/C over the queries; knowledge prediction only.
  std::optional<double> random_mrr;
};

struct EvalReport {
  std::string task;
  CandidateSetting setting = CandidateSetting::All;
  std::vector<Index> topn;
  std::vector<CohortMetrics> cohorts;  // cohorts with no queries are omitted

  const CohortMetrics* find(Cohort cohort) const;
};

struct EvalOptions {
  std::vector<Index> topn{20};
  int threads = 1;
};

/// Filtered tail ranking for held-out triplets under each triplet's relation,
/// scoring candidates by E^r_i . E^r_j (the same order as its sigmoid).
/// Candidates exclude the head, deleted items, the head's neighbors in
/// `graph`, and other held-out tails of the same head and relation. With
/// `zero_shot`, heads are also reported by cohort.
EvalReport eval_knowledge_prediction(std::span<const Matrix> embeddings, std::span<const IndexedTriplet> heldout,
                                     const ProductKnowledgeGraph& graph, const std::vector<bool>* zero_shot = nullptr,
                                     const EvalOptions& options = {});

/// Ranks items for every user by e_u . E_i, excluding the user's train items.
/// Relevant items are the user's items in `split`. With
/// CandidateSetting::ZeroShot the candidates are the zero-shot items that
/// occur in `split`.
EvalReport eval_zsir(const Matrix& fused, const InteractionDataset& dataset, CandidateSetting setting,
                     Split split = Split::Test, const EvalOptions& options = {});

/// Header `task setting cohort metric value`, then one row per metric.
void write_report_tsv(std::ostream& out, const EvalReport& report, bool header = true);
std::string format_report_table(const EvalReport& report);

std::string metric_name(std::string_view metric, Index n);

}  // namespace mpkg
