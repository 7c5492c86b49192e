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

#include "mpkg/evaluation.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mpkg/errors.hpp"
#include "mpkg/metrics.hpp"
#include "mpkg/parallel.hpp"

namespace mpkg {

std::string_view to_string(CandidateSetting setting) {
  return setting == CandidateSetting::All ? "all" : "zs";
}

std::string_view to_string(Cohort cohort) {
  switch (cohort) {
    case Cohort::All: return "all";
    case Cohort::Warm: return "warm";
    case Cohort::ZeroShot: return "zs";
  }
  return "all";
}

std::optional<CandidateSetting> parse_candidate_setting(std::string_view text) {
  if (text == "all") return CandidateSetting::All;
  if (text == "zs") return CandidateSetting::ZeroShot;
  return std::nullopt;
}

const CohortMetrics* EvalReport::find(Cohort cohort) const {
  for (const CohortMetrics& c : cohorts) {
    if (c.cohort == cohort) return &c;
  }
  return nullptr;
}

std::string metric_name(std::string_view metric, Index n) { return fmt::format("{}@{}", metric, n); }

namespace {

struct QueryResult {
  bool valid = false;
  std::vector<double> recall;
  std::vector<double> ndcg;
  double mrr = 0.0;
  double random_mrr = 0.0;
};

struct Accumulator {
  CohortMetrics metrics;
  bool with_random = false;

  void add(const QueryResult& q) {
    if (metrics.recall.empty()) {
      metrics.recall.assign(q.recall.size(), 0.0);
      metrics.ndcg.assign(q.ndcg.size(), 0.0);
    }
    ++metrics.queries;
    for (std::size_t k = 0; k < q.recall.size(); ++k) {
      metrics.recall[k] += q.recall[k];
      metrics.ndcg[k] += q.ndcg[k];
    }
    metrics.mrr += q.mrr;
    if (with_random) metrics.random_mrr = metrics.random_mrr.value_or(0.0) + q.random_mrr;
  }

  std::optional<CohortMetrics> finish() {
    if (metrics.queries == 0) return std::nullopt;
    const double inv = 1.0 / static_cast<double>(metrics.queries);
    for (double& v : metrics.recall) v *= inv;
    for (double& v : metrics.ndcg) v *= inv;
    metrics.mrr *= inv;
    if (metrics.random_mrr) *metrics.random_mrr *= inv;
    return metrics;
  }
};

QueryResult score_query(std::span<const ItemId> ranked, std::span<const ItemId> relevant, std::span<const Index> topn) {
  QueryResult q;
  q.valid = true;
  for (Index n : topn) {
    q.recall.push_back(*recall_at_n(ranked, relevant, n));
    q.ndcg.push_back(*ndcg_at_n(ranked, relevant, n));
  }
  q.mrr = mrr(ranked, relevant);
  return q;
}

void check_topn(const EvalOptions& options) {
  if (options.topn.empty()) throw InputError("at least one ranking cutoff is required");
  for (Index n : options.topn) {
    if (n < 1) throw InputError("ranking cutoffs must be at least 1");
  }
}

}  // namespace

EvalReport eval_knowledge_prediction(std::span<const Matrix> embeddings, std::span<const IndexedTriplet> heldout,
                                     const ProductKnowledgeGraph& graph, const std::vector<bool>* zero_shot,
                                     const EvalOptions& options) {
  check_topn(options);
  const std::size_t num_relations = graph.num_relations();
  if (embeddings.size() != num_relations) throw InputError("knowledge prediction needs one embedding per relation");
  const Index n = graph.num_items();
  for (const Matrix& e : embeddings) {
    if (e.rows() != n) throw InputError("relation embeddings do not cover every item of the graph");
  }
  std::vector<Adjacency> adjacency;
  for (std::size_t r = 0; r < num_relations; ++r) adjacency.push_back(graph.relation_adjacency(static_cast<RelationId>(r)));

  // Held-out edges in both directions, for filtering.
  std::vector<IndexedTriplet> known;
  for (const IndexedTriplet& t : heldout) {
    if (t.relation >= num_relations || t.head >= n || t.tail >= n) {
      throw InputError("held-out triplet refers to an unknown item or relation");
    }
    known.push_back(t);
    known.push_back({t.tail, t.relation, t.head});
  }
  std::sort(known.begin(), known.end());
  known.erase(std::unique(known.begin(), known.end()), known.end());

  std::vector<QueryResult> results(heldout.size());
  parallel_for(0, static_cast<Index>(heldout.size()), options.threads, [&](Index qi) {
    const IndexedTriplet& t = heldout[static_cast<std::size_t>(qi)];
    if (t.head == t.tail || graph.is_deleted(t.head) || graph.is_deleted(t.tail)) return;
    const auto lo = std::lower_bound(known.begin(), known.end(), IndexedTriplet{t.head, t.relation, 0});
    const auto hi = std::lower_bound(known.begin(), known.end(), IndexedTriplet{t.head, t.relation + 1, 0});
    std::vector<bool> excluded(static_cast<std::size_t>(n), false);
    excluded[t.head] = true;
    for (ItemId j : adjacency[t.relation].neighbors(t.head)) excluded[j] = true;
    for (auto it = lo; it != hi; ++it) excluded[it->tail] = true;
    excluded[t.tail] = false;

    const Matrix& e = embeddings[t.relation];
    std::vector<ItemId> candidates;
    std::vector<double> scores;
    for (Index j = 0; j < n; ++j) {
      if (excluded[j] || graph.is_deleted(static_cast<ItemId>(j))) continue;
      candidates.push_back(static_cast<ItemId>(j));
      scores.push_back(e.row(t.head).dot(e.row(j)));
    }
    const auto ranked = rank_candidates(candidates, scores);
    const ItemId relevant[] = {t.tail};
    QueryResult q = score_query(ranked, relevant, options.topn);
    q.random_mrr = random_mrr(static_cast<Index>(candidates.size()));
    results[static_cast<std::size_t>(qi)] = std::move(q);
  });

  Accumulator all;
  all.metrics.cohort = Cohort::All;
  all.with_random = true;
  Accumulator warm;
  warm.metrics.cohort = Cohort::Warm;
  warm.with_random = true;
  Accumulator zs;
  zs.metrics.cohort = Cohort::ZeroShot;
  zs.with_random = true;
  std::size_t skipped = 0;
  for (std::size_t qi = 0; qi < results.size(); ++qi) {
    if (!results[qi].valid) {
      ++skipped;
      continue;
    }
    all.add(results[qi]);
    if (zero_shot) {
      const ItemId head = heldout[qi].head;
      const bool is_zs = head < zero_shot->size() && (*zero_shot)[head];
      (is_zs ? zs : warm).add(results[qi]);
    }
  }
  if (skipped > 0) spdlog::debug("knowledge prediction skipped {} triplets touching deleted items", skipped);

  EvalReport report{"kp", CandidateSetting::All, options.topn, {}};
  for (Accumulator* acc : {&all, &warm, &zs}) {
    if (auto m = acc->finish()) report.cohorts.push_back(std::move(*m));
  }
  return report;
}

EvalReport eval_zsir(const Matrix& fused, const InteractionDataset& dataset, CandidateSetting setting, Split split,
                     const EvalOptions& options) {
  check_topn(options);
  const Index n = fused.rows();
  if (dataset.num_items > n) throw InputError("fused embeddings do not cover every interacted item");
  const auto& eval_items = dataset.items(split);

  std::vector<bool> zs_pool(static_cast<std::size_t>(n), false);
  if (setting == CandidateSetting::ZeroShot) {
    for (const auto& items : eval_items) {
      for (ItemId i : items) {
        if (dataset.is_zero_shot(i)) zs_pool[i] = true;
      }
    }
  }
  auto is_candidate_pool = [&](ItemId i) { return setting == CandidateSetting::All || zs_pool[i]; };

  struct UserResult {
    QueryResult all;
    QueryResult warm;
    QueryResult zs;
  };
  const auto num_users = static_cast<Index>(dataset.train_items.size());
  std::vector<UserResult> results(static_cast<std::size_t>(num_users));
  std::vector<char> no_history(static_cast<std::size_t>(num_users), 0);
  parallel_for(0, num_users, options.threads, [&](Index ui) {
    const auto u = static_cast<UserId>(ui);
    if (ui >= static_cast<Index>(eval_items.size()) || eval_items[u].empty()) return;
    if (dataset.train_items[u].empty()) {
      no_history[u] = 1;
      return;
    }
    const std::vector<ItemId> history = dataset.train_item_set(u);
    std::vector<ItemId> relevant;
    for (ItemId i : eval_items[u]) {
      if (is_candidate_pool(i) && !std::binary_search(history.begin(), history.end(), i)) relevant.push_back(i);
    }
    std::sort(relevant.begin(), relevant.end());
    relevant.erase(std::unique(relevant.begin(), relevant.end()), relevant.end());
    if (relevant.empty()) return;

    const Vector eu = mean_rows(fused, dataset.train_items[u]);
    std::vector<ItemId> candidates;
    std::vector<double> scores;
    for (Index j = 0; j < n; ++j) {
      const auto item = static_cast<ItemId>(j);
      if (!is_candidate_pool(item) || std::binary_search(history.begin(), history.end(), item)) continue;
      candidates.push_back(item);
      scores.push_back(eu.dot(fused.row(j)));
    }
    const auto ranked = rank_candidates(candidates, scores);
    std::vector<ItemId> warm;
    std::vector<ItemId> zs;
    for (ItemId i : relevant) (dataset.is_zero_shot(i) ? zs : warm).push_back(i);
    UserResult& out = results[u];
    out.all = score_query(ranked, relevant, options.topn);
    if (!warm.empty()) out.warm = score_query(ranked, warm, options.topn);
    if (!zs.empty()) out.zs = score_query(ranked, zs, options.topn);
  });

  Accumulator all;
  all.metrics.cohort = Cohort::All;
  all.with_random = false;
  Accumulator warm;
  warm.metrics.cohort = Cohort::Warm;
  warm.with_random = false;
  Accumulator zs;
  zs.metrics.cohort = Cohort::ZeroShot;
  zs.with_random = false;
  for (const UserResult& r : results) {
    if (r.all.valid) all.add(r.all);
    if (r.warm.valid) warm.add(r.warm);
    if (r.zs.valid) zs.add(r.zs);
  }
  const auto skipped = std::count(no_history.begin(), no_history.end(), 1);
  if (skipped > 0) spdlog::info("zsir: {} users without train interactions skipped", skipped);

  EvalReport report{"zsir", setting, options.topn, {}};
  for (Accumulator* acc : {&all, &warm, &zs}) {
    if (auto m = acc->finish()) report.cohorts.push_back(std::move(*m));
  }
  return report;
}

void write_report_tsv(std::ostream& out, const EvalReport& report, bool header) {
  if (header) out << "task\tsetting\tcohort\tmetric\tvalue\n";
  auto row = [&](const CohortMetrics& c, const std::string& metric, double value) {
    out << fmt::format("{}\t{}\t{}\t{}\t{:.17g}\n", report.task, to_string(report.setting), to_string(c.cohort),
                       metric, value);
  };
  for (const CohortMetrics& c : report.cohorts) {
    for (std::size_t k = 0; k < report.topn.size(); ++k) {
      row(c, metric_name("Recall", report.topn[k]), c.recall[k]);
      row(c, metric_name("NDCG", report.topn[k]), c.ndcg[k]);
    }
    row(c, "MRR", c.mrr);
    if (c.random_mrr) row(c, "RandomMRR", *c.random_mrr);
  }
}

std::string format_report_table(const EvalReport& report) {
  std::vector<std::string> columns;
  for (Index n : report.topn) {
    columns.push_back(metric_name("Recall", n));
    columns.push_back(metric_name("NDCG", n));
  }
  columns.push_back("MRR");
  const bool with_random = std::any_of(report.cohorts.begin(), report.cohorts.end(),
                                       [](const CohortMetrics& c) { return c.random_mrr.has_value(); });
  if (with_random) columns.push_back("RandomMRR");

  std::string out = fmt::format("{} ({} candidates)\n{:<8}{:>9}", report.task, to_string(report.setting), "cohort",
                                "queries");
  for (const auto& c : columns) out += fmt::format("{:>12}", c);
  out += '\n';
  for (const CohortMetrics& c : report.cohorts) {
    out += fmt::format("{:<8}{:>9}", to_string(c.cohort), c.queries);
    for (std::size_t k = 0; k < report.topn.size(); ++k) {
      out += fmt::format("{:>12.4f}{:>12.4f}", c.recall[k], c.ndcg[k]);
    }
    out += fmt::format("{:>12.4f}", c.mrr);
    if (with_random) out += c.random_mrr ? fmt::format("{:>12.4f}", *c.random_mrr) : fmt::format("{:>12}", "-");
    out += '\n';
  }
  return out;
}

}  // namespace mpkg
