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


#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "metric_oracle.hpp"
#include "mpkg/evaluation.hpp"
#include "mpkg/interactions.hpp"
#include "mpkg/metrics.hpp"

using namespace mpkg;
using namespace mpkg::testing;

namespace {

// Three users over six items; items 3, 4 and 5 never appear in train.
InteractionDataset toy_dataset() {
  InteractionDataset ds;
  ds.num_users = 3;
  ds.num_items = 6;
  ds.train_items = {{0, 1}, {1, 2}, {0}};
  ds.valid_items = {{}, {}, {}};
  ds.test_items = {{3, 4}, {5}, {4, 0}};
  for (UserId u = 0; u < 3; ++u) {
    for (ItemId i : ds.train_items[u]) {
      ds.events.push_back({u, i, 1});
      ds.split.push_back(Split::Train);
    }
    for (ItemId i : ds.test_items[u]) {
      ds.events.push_back({u, i, 2});
      ds.split.push_back(Split::Test);
    }
  }
  ds.zero_shot = {false, false, false, true, true, true};
  return ds;
}

Matrix toy_embeddings() {
  Matrix e(6, 2);
  e << 1.0, 0.0,
       0.8, 0.6,
       0.0, 1.0,
       0.9, -0.2,
       -0.5, 0.5,
       0.3, 0.9;
  return e;
}

struct Reference {
  double ndcg = 0.0;
  double recall = 0.0;
  double mrr = 0.0;
  std::size_t users = 0;
};

Reference zsir_reference(const Matrix& e, const InteractionDataset& ds, bool zs_only, Index n) {
  Reference ref;
  for (UserId u = 0; u < 3; ++u) {
    const auto& train = ds.train_items[u];
    Vector eu = Vector::Zero(e.cols());
    for (ItemId i : train) eu += e.row(i).transpose();
    eu /= static_cast<double>(train.size());
    auto allowed = [&](ItemId i) {
      const bool seen = std::find(train.begin(), train.end(), i) != train.end();
      return !seen && (!zs_only || ds.zero_shot[i]);
    };
    std::vector<ItemId> ids;
    std::vector<double> scores;
    for (ItemId i = 0; i < 6; ++i) {
      if (!allowed(i)) continue;
      ids.push_back(i);
      scores.push_back(eu.dot(e.row(i)));
    }
    std::vector<ItemId> relevant;
    for (ItemId i : ds.test_items[u]) {
      if (allowed(i)) relevant.push_back(i);
    }
    if (relevant.empty()) continue;
    const auto m = brute_metrics(ids, scores, relevant, static_cast<std::size_t>(n));
    ref.ndcg += m.ndcg;
    ref.recall += m.recall;
    ref.mrr += m.mrr;
    ++ref.users;
  }
  ref.ndcg /= static_cast<double>(ref.users);
  ref.recall /= static_cast<double>(ref.users);
  ref.mrr /= static_cast<double>(ref.users);
  return ref;
}

}  // namespace

TEST_CASE("knowledge prediction with perfectly separated tails") {
  auto g = make_graph(6, {{{2, 3}}});
  Matrix e(6, 1);
  e << 1, 10, -10, -10, -10, -10;
  std::vector<Matrix> emb{e};
  const IndexedTriplet held[] = {{0, 0, 1}};
  const auto report = eval_knowledge_prediction(emb, held, g);
  const auto* all = report.find(Cohort::All);
  REQUIRE(all != nullptr);
  CHECK(all->mrr == 1.0);
  CHECK(all->recall[0] == 1.0);
  CHECK(all->ndcg[0] == 1.0);
  CHECK(*all->random_mrr == doctest::Approx(random_mrr(5)));
}

TEST_CASE("knowledge prediction with two candidates") {
  auto g = make_graph(3, {{}});
  Matrix e(3, 1);
  e << 1, 1, 2;
  std::vector<Matrix> emb{e};
  const IndexedTriplet held[] = {{0, 0, 1}};
  const auto report = eval_knowledge_prediction(emb, held, g);
  CHECK(report.find(Cohort::All)->mrr == 0.5);
  CHECK(*report.find(Cohort::All)->random_mrr == 0.75);
  CHECK(report.find(Cohort::Warm) == nullptr);
}

TEST_CASE("knowledge prediction filters known tails") {
  // Item 2 is a training neighbour of 0 and item 3 another held-out tail;
  // both outscore the target but are filtered away. Item 4 is deleted.
  auto g = make_graph(6, {{{0, 2}, {4, 5}}});
  const ItemId gone[] = {4};
  g = delete_items(g, gone);
  Matrix e(6, 1);
  e << 1, 1, 5, 4, 9, 0;
  std::vector<Matrix> emb{e};
  const IndexedTriplet held[] = {{0, 0, 1}, {3, 0, 0}};
  const auto report = eval_knowledge_prediction(emb, held, g);
  const auto* all = report.find(Cohort::All);
  REQUIRE(all != nullptr);
  // Query (0,1): candidates {1, 5}, target first. Query (3,0): candidates {0,1,2,5}, scores 4,4,20,0.
  CHECK(all->queries == 2);
  CHECK(all->mrr == doctest::Approx((1.0 + 0.5) / 2.0));
  CHECK(*all->random_mrr == doctest::Approx((random_mrr(2) + random_mrr(4)) / 2.0));
}

TEST_CASE("knowledge prediction cohorts follow the zero-shot mask") {
  std::mt19937_64 rng(3);
  const Index n = 20;
  auto g = make_graph(n, random_edges(n, 2, 0.1, rng));
  std::vector<Matrix> emb{random_matrix(n, 3, rng), random_matrix(n, 3, rng)};
  const std::vector<IndexedTriplet> held{{0, 0, 5}, {1, 1, 7}, {18, 0, 3}, {19, 1, 2}};
  std::vector<bool> zs(static_cast<std::size_t>(n), false);
  zs[18] = zs[19] = true;
  const auto report = eval_knowledge_prediction(emb, held, g, &zs);
  CHECK(report.find(Cohort::All)->queries == 4);
  CHECK(report.find(Cohort::Warm)->queries == 2);
  CHECK(report.find(Cohort::ZeroShot)->queries == 2);
  const double mixed = (report.find(Cohort::Warm)->mrr + report.find(Cohort::ZeroShot)->mrr) / 2.0;
  CHECK(report.find(Cohort::All)->mrr == doctest::Approx(mixed).epsilon(1e-14));

  EvalOptions threaded;
  threaded.threads = 3;
  const auto again = eval_knowledge_prediction(emb, held, g, &zs, threaded);
  std::ostringstream a, b;
  write_report_tsv(a, report);
  write_report_tsv(b, again);
  CHECK(a.str() == b.str());
}

TEST_CASE("knowledge prediction matches a brute-force reference") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 15 + trial;
    auto edges = random_edges(n, 1, 0.15, rng);
    auto g = make_graph(n, edges);
    const Matrix e = random_matrix(n, 2, rng);
    std::vector<Matrix> emb{e};
    const IndexedTriplet held[] = {{0, 0, static_cast<ItemId>(n - 1)}};
    const auto report = eval_knowledge_prediction(emb, held, g);
    std::vector<ItemId> ids;
    std::vector<double> scores;
    for (ItemId j = 1; j < n; ++j) {
      bool neighbour = false;
      for (const Edge& x : edges[0]) neighbour |= (x.head == 0 && x.tail == j) || (x.tail == 0 && x.head == j);
      if (neighbour && j != n - 1) continue;
      ids.push_back(j);
      scores.push_back(e.row(0).dot(e.row(j)));
    }
    const auto m = brute_metrics(ids, scores, {static_cast<ItemId>(n - 1)}, 20);
    CHECK(report.find(Cohort::All)->mrr == doctest::Approx(m.mrr).epsilon(1e-12));
    CHECK(report.find(Cohort::All)->ndcg[0] == doctest::Approx(m.ndcg).epsilon(1e-12));
  }
}

TEST_CASE("zsir toy fixture matches the brute-force reference") {
  const auto ds = toy_dataset();
  const Matrix e = toy_embeddings();
  EvalOptions options;
  options.topn = {1, 2, 20};
  for (bool zs_only : {false, true}) {
    const auto report = eval_zsir(e, ds, zs_only ? CandidateSetting::ZeroShot : CandidateSetting::All, Split::Test,
                                  options);
    const auto* all = report.find(Cohort::All);
    REQUIRE(all != nullptr);
    for (std::size_t k = 0; k < options.topn.size(); ++k) {
      const auto ref = zsir_reference(e, ds, zs_only, options.topn[k]);
      CHECK(all->queries == ref.users);
      CHECK(all->ndcg[k] == doctest::Approx(ref.ndcg).epsilon(1e-12));
      CHECK(all->recall[k] == doctest::Approx(ref.recall).epsilon(1e-12));
      CHECK(all->mrr == doctest::Approx(ref.mrr).epsilon(1e-12));
    }
    CHECK_FALSE(all->random_mrr.has_value());
  }
}

TEST_CASE("zsir perfect user and skipped users") {
  InteractionDataset ds;
  ds.num_users = 3;
  ds.num_items = 4;
  ds.train_items = {{0}, {}, {1}};
  ds.valid_items = {{}, {}, {}};
  ds.test_items = {{2}, {3}, {0}};
  ds.zero_shot = {false, false, true, true};
  Matrix e(4, 2);
  e << 1, 0, 0, 1, 2, 0, -1, 0;
  EvalOptions options;
  // User 1 has no history; user 2 only has warm test items.
  const auto all = eval_zsir(e, ds, CandidateSetting::All, Split::Test, options);
  CHECK(all.find(Cohort::All)->queries == 2);
  const auto zs = eval_zsir(e, ds, CandidateSetting::ZeroShot, Split::Test, options);
  REQUIRE(zs.find(Cohort::All) != nullptr);
  CHECK(zs.find(Cohort::All)->queries == 1);
  CHECK(zs.find(Cohort::All)->ndcg[0] == 1.0);
  CHECK(zs.find(Cohort::All)->mrr == 1.0);
  CHECK(zs.find(Cohort::Warm) == nullptr);
}

TEST_CASE("report formats") {
  const auto ds = toy_dataset();
  EvalOptions options;
  options.topn = {5, 20};
  const auto report = eval_zsir(toy_embeddings(), ds, CandidateSetting::All, Split::Test, options);
  std::ostringstream out;
  write_report_tsv(out, report);
  const std::string tsv = out.str();
  CHECK(tsv.starts_with("task\tsetting\tcohort\tmetric\tvalue\n"));
  CHECK(tsv.find("zsir\tall\tall\tNDCG@20\t") != std::string::npos);
  CHECK(tsv.find("zsir\tall\tzs\tMRR\t") != std::string::npos);
  CHECK(format_report_table(report).find("Recall@5") != std::string::npos);
  CHECK(parse_candidate_setting("zs") == CandidateSetting::ZeroShot);
  CHECK_FALSE(parse_candidate_setting("cold").has_value());
  CHECK_THROWS_AS(eval_zsir(toy_embeddings(), ds, CandidateSetting::All, Split::Test, {.topn = {0}}), InputError);
}
