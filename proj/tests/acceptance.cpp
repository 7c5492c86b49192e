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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "metric_oracle.hpp"
#include "mpkg/adaptation.hpp"
#include "mpkg/checkpoint.hpp"
#include "mpkg/dataset.hpp"
#include "mpkg/encoder.hpp"
#include "mpkg/evaluation.hpp"
#include "mpkg/finetune.hpp"
#include "mpkg/gradcheck_suite.hpp"
#include "mpkg/inference.hpp"
#include "mpkg/io.hpp"
#include "mpkg/metrics.hpp"
#include "mpkg/pretrain.hpp"
#include "mpkg/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mpkg;
using namespace mpkg::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note("failed: " + what);
    }
  }
  void note(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

SyntheticSpec planted_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.num_items = 300;
  s.num_blocks = 3;
  s.num_relations = 3;
  s.p_in = {0.2};
  s.p_out = {0.01};
  s.seed = seed;
  return s;
}

PretrainConfig planted_config(std::uint64_t seed) {
  PretrainConfig c;
  c.dim = 32;
  c.layers = 3;
  c.hops = 2;
  c.epochs = 200;
  c.seed = seed;
  return c;
}

EvalReport knowledge_report(const InferenceResult& inferred, const SyntheticData& data,
                            std::span<const IndexedTriplet> heldout) {
  std::vector<bool> mask(static_cast<std::size_t>(inferred.graph.num_items()), false);
  for (Index i = data.graph.num_items(); i < inferred.graph.num_items(); ++i) mask[i] = true;
  return eval_knowledge_prediction(inferred.relation_embeddings, heldout, inferred.graph, &mask);
}

// MRR of an oracle that knows every planted block and orders candidates at
// random within the same-block and other-block groups. Monte Carlo over
// jittered block indicator embeddings, ranked by the same filtered protocol.
double block_oracle_mrr(const InferenceResult& inferred, const SyntheticData& data,
                        std::span<const IndexedTriplet> heldout, Cohort cohort) {
  const Index n = inferred.graph.num_items();
  const auto blocks = static_cast<Index>(data.blocks.empty() ? 0 : 1 + *std::max_element(data.blocks[0].begin(),
                                                                                         data.blocks[0].end()));
  std::mt19937_64 rng(99);
  std::normal_distribution<double> jitter(0.0, 1e-3);
  const int draws = 20;
  double total = 0.0;
  for (int draw = 0; draw < draws; ++draw) {
    std::vector<Matrix> oracle;
    for (std::size_t r = 0; r < data.blocks.size(); ++r) {
      Matrix e = Matrix::Zero(n, blocks + 4);
      for (Index i = 0; i < n; ++i) {
        e(i, data.blocks[r][i]) = 10.0;
        for (Index k = 0; k < 4; ++k) e(i, blocks + k) = jitter(rng);
      }
      oracle.push_back(std::move(e));
    }
    InferenceResult fake{inferred.graph, std::move(oracle), Matrix()};
    total += knowledge_report(fake, data, heldout).find(cohort)->mrr;
  }
  return total / draws;
}

Verdict criterion_gradients() {
  const auto start = Clock::now();
  Verdict v;
  const auto checks = run_gradcheck_suite(0);
  double worst = 0.0;
  for (const auto& c : checks) {
    worst = std::max(worst, c.report.max_rel_error);
    v.require(c.report.passed, c.loss + " gradient");
  }
  v.require(checks.size() == 6, "six losses checked");
  const double t = seconds_since(start);
  v.require(t < 10.0, "runtime under 10 s");
  v.note("max rel error " + num(worst) + ", " + num(t, 3) + " s");
  return v;
}

Verdict criterion_propagation() {
  const auto start = Clock::now();
  Verdict v;
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = std::uniform_int_distribution<Index>(1, 50)(rng);
    const double p = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    const auto edges = random_edges(n, 1, p, rng);
    const int layers = 1 + trial % 3;
    const Matrix x = random_matrix(n, 6, rng, 1.0);
    const auto adj = build_normalized_adjacency(r_pkg(make_graph(n, edges), 0));
    const Matrix sparse = propagate(adj, x, layers);
    const Matrix dense = dense_propagate(n, edges[0], x, layers);
    worst = std::max(worst, (sparse - dense).cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(start);
  v.require(worst <= 1e-10, "sparse matches dense within 1e-10");
  v.require(t < 5.0, "runtime under 5 s");
  v.note("max abs diff " + num(worst) + ", " + num(t, 3) + " s");
  return v;
}

struct PlantedRun {
  SyntheticData data;
  PretrainResult result;
  InferenceResult inferred;
  double seconds = 0.0;
};

PlantedRun run_planted(std::uint64_t seed, const LossWeights& weights = {}) {
  PlantedRun run;
  run.data = generate_synthetic(planted_spec(seed));
  PretrainConfig config = planted_config(seed);
  config.weights = weights;
  const auto start = Clock::now();
  run.result = pretrain(run.data.graph, config, run.data.valid_triplets);
  run.seconds = seconds_since(start);
  run.inferred = inductive_infer(run.data.graph, run.data.zero_shot, run.result.params, config.layers);
  return run;
}

Verdict criterion_planted(const PlantedRun& run) {
  Verdict v;
  const auto report = knowledge_report(run.inferred, run.data, run.data.test_triplets);
  const auto* warm = report.find(Cohort::Warm);
  if (!warm) {
    v.require(false, "warm held-out triplets exist");
    return v;
  }
  const double ratio = warm->mrr / *warm->random_mrr;
  const double ceiling = block_oracle_mrr(run.inferred, run.data, run.data.test_triplets, Cohort::Warm);
  const auto& history = run.result.history;
  v.require(ratio >= 5.0, "MRR at least 5x random");
  v.require(history.size() == 200 && history.back().mean.total < history.front().mean.total,
            "epoch 200 loss below epoch 1");
  v.require(run.seconds < 120.0, "runtime under 2 min");
  v.note("MRR " + num(warm->mrr) + " vs random " + num(*warm->random_mrr) + " (" + num(ratio, 3) + "x)");
  v.note("block-oracle ceiling " + num(ceiling) + " (" + num(ceiling / *warm->random_mrr, 3) + "x)");
  v.note("loss " + num(history.front().mean.total) + " -> " + num(history.back().mean.total));
  v.note(num(run.seconds, 3) + " s");
  return v;
}

Verdict criterion_zero_shot(const PlantedRun& run) {
  Verdict v;
  const auto& params = run.result.params;
  const int layers = planted_config(0).layers;
  const auto report = knowledge_report(run.inferred, run.data, run.data.zs_test_triplets);
  const auto* zs = report.find(Cohort::ZeroShot);
  if (!zs) {
    v.require(false, "zero-shot held-out triplets exist");
  } else {
    const double ratio = zs->mrr / *zs->random_mrr;
    const double ceiling = block_oracle_mrr(run.inferred, run.data, run.data.zs_test_triplets, Cohort::ZeroShot);
    v.require(ratio >= 3.0, "zero-shot MRR at least 3x random");
    v.note("zs MRR " + num(zs->mrr) + " vs random " + num(*zs->random_mrr) + " (" + num(ratio, 3) + "x)");
    v.note("block-oracle ceiling " + num(ceiling) + " (" + num(ceiling / *zs->random_mrr, 3) + "x)");
  }

  // Strip the first zero-shot item's edges so it arrives isolated.
  const auto lone = static_cast<ItemId>(run.data.graph.num_items());
  ZeroShotBatch batch = run.data.zero_shot;
  std::erase_if(batch.edges, [&](const IndexedTriplet& t) { return t.head == lone || t.tail == lone; });
  const auto isolated = inductive_infer(run.data.graph, batch, params, layers);
  bool exact = true;
  for (std::size_t r = 0; r < params.num_relations(); ++r) {
    for (Index c = 0; c < params.embedding_dim(); ++c) {
      double expected = 0.0;
      for (Index k = 0; k < params.input_dim(); ++k) expected += batch.features(0, k) * params.encoder[r](k, c);
      exact = exact && isolated.relation_embeddings[r](lone, c) == expected;
    }
  }
  v.require(exact, "isolated item embedding equals feature . W exactly");

  // Delete ten warm items with edges, then re-attach their training edges.
  const auto& graph = run.data.graph;
  std::vector<ItemId> victims;
  for (ItemId i = 0; victims.size() < 10 && static_cast<Index>(i) < graph.num_items(); i += 7) {
    for (RelationId r = 0; r < graph.num_relations(); ++r) {
      if (graph.relation_adjacency(r).degree(i) > 0) {
        victims.push_back(i);
        break;
      }
    }
  }
  ZeroShotBatch restore;
  restore.features = Matrix(0, graph.feature_dim());
  for (RelationId r = 0; r < graph.num_relations(); ++r) {
    for (const Edge& e : graph.edges(r)) {
      const bool touches = std::find(victims.begin(), victims.end(), e.head) != victims.end() ||
                           std::find(victims.begin(), victims.end(), e.tail) != victims.end();
      if (touches) restore.edges.push_back({e.head, r, e.tail});
    }
  }
  const auto original = inductive_infer(graph, {}, params, layers);
  const auto restored = inductive_infer(delete_items(graph, victims), restore, params, layers);
  double worst = 0.0;
  for (std::size_t r = 0; r < params.num_relations(); ++r) {
    worst = std::max(worst, (restored.relation_embeddings[r] - original.relation_embeddings[r]).cwiseAbs().maxCoeff());
  }
  v.require(worst <= 1e-12, "warm re-insertion within 1e-12");
  v.note("re-insertion max diff " + num(worst));
  return v;
}

Verdict criterion_finetune(const PlantedRun& run) {
  Verdict v;
  Checkpoint ckpt;
  ckpt.params = run.result.params;
  const ModelParams pretrained = deserialize_checkpoint(serialize_checkpoint(ckpt)).params;
  const int layers = planted_config(0).layers;
  const auto train_embeddings = encode_relations(propagate_relations(run.data.graph, layers), pretrained);

  FinetuneConfig config;
  config.epochs = 50;
  config.layers = layers;
  config.seed = 0;
  const auto result =
      finetune(pretrained, train_embeddings, run.data.dataset, config, run.inferred.relation_embeddings);

  const Vector w = relation_weights(result.params.gate, train_embeddings).weights;
  Index best = 0;
  w.maxCoeff(&best);
  v.require(best == 0, "relation 0 has the largest weight");

  EvalOptions options;
  options.topn = {20};
  const auto ndcg = [&](const SelfExcitationParams& gate) {
    const Matrix fused = fuse_all(gate, run.inferred.relation_embeddings);
    return eval_zsir(fused, run.data.dataset, CandidateSetting::All, Split::Test, options).find(Cohort::All)->ndcg[0];
  };
  SelfExcitationParams uniform = result.params.gate;
  uniform.fc2_weight.setZero();
  const double tuned = ndcg(result.params.gate);
  const double flat = ndcg(uniform);
  v.require(tuned >= flat, "NDCG@20 at least the uniform-weight value");

  const auto before = named_tensors(pretrained);
  const auto after = named_tensors(result.params);
  bool identical = before.size() == after.size();
  for (std::size_t k = 0; identical && k < before.size(); ++k) {
    if (is_gate_tensor(before[k].name)) continue;
    identical = before[k].name == after[k].name &&
                std::equal(before[k].values().begin(), before[k].values().end(), after[k].values().begin());
  }
  v.require(identical, "non-gate tensors bit-identical");

  std::string weights;
  for (Index r = 0; r < w.size(); ++r) weights += (r ? "/" : "") + num(w[r], 3);
  std::string last;
  const Vector& wl = result.history.back().weights;
  for (Index r = 0; r < wl.size(); ++r) last += (r ? "/" : "") + num(wl[r], 3);
  v.note("selected epoch " + std::to_string(result.best_epoch) + " weights " + weights + " (epoch " +
         std::to_string(result.history.back().epoch) + ": " + last + ")");
  v.note("NDCG@20 " + num(tuned) + " vs uniform " + num(flat));
  return v;
}

Verdict criterion_metrics() {
  Verdict v;
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = random_metric_fixture(rng);
    const auto ranked = rank_candidates(f.ids, f.scores);
    const auto oracle = brute_metrics(f.ids, f.scores, f.relevant, f.n);
    const auto n = static_cast<Index>(f.n);
    worst = std::max({worst, std::abs(*recall_at_n(ranked, f.relevant, n) - oracle.recall),
                      std::abs(*ndcg_at_n(ranked, f.relevant, n) - oracle.ndcg),
                      std::abs(mrr(ranked, f.relevant) - oracle.mrr)});
  }
  v.require(worst <= 1e-12, "brute-force agreement within 1e-12");

  std::vector<ItemId> ranked(40);
  for (ItemId i = 0; i < 40; ++i) ranked[i] = i;
  const std::vector<ItemId> four{3, 10, 25, 30}, top{0}, third{2}, fourth{3};
  v.require(*recall_at_n(ranked, four, 20) == 0.5, "recall example");
  v.require(*ndcg_at_n(ranked, third, 20) == 0.5 && *ndcg_at_n(ranked, top, 20) == 1.0, "ndcg examples");
  v.require(mrr(ranked, fourth) == 0.25 && mrr(ranked, top) == 1.0, "mrr examples");
  v.note("max diff " + num(worst) + " over 1000 fixtures");
  return v;
}

// Runs gen, pretrain, finetune and eval through the command-line tool.
bool run_pipeline(const fs::path& config, const fs::path& out, int threads) {
  const std::string tool = MPKG_TOOL_PATH;
  const std::string common = " --config '" + config.string() + "' --seed 11 --out '" + out.string() +
                             "' --threads " + std::to_string(threads) + " >/dev/null 2>&1";
  for (const char* step : {"gen", "pretrain", "finetune", "eval --task kp --setting all",
                           "eval --task zsir --setting all", "eval --task zsir --setting zs"}) {
    if (std::system(("'" + tool + "' " + step + common).c_str()) != 0) return false;
  }
  return true;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) out[fs::relative(entry.path(), root).string()] = read_file(entry.path());
  }
  return out;
}

std::vector<double> report_values(const std::string& tsv) {
  std::vector<double> out;
  std::istringstream lines(tsv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) out.push_back(std::stod(line.substr(line.rfind('\t') + 1)));
  return out;
}

Verdict criterion_determinism() {
  Verdict v;
  TempDir dir("acceptance");
  write_file(dir / "run.cfg",
             "num_items = 300\nnum_blocks = 3\nnum_relations = 3\np_in = 0.2\np_out = 0.01\n"
             "dim = 32\nlayers = 3\nhops = 2\nepochs = 15\nfinetune_epochs = 10\n");
  const bool ran = run_pipeline(dir / "run.cfg", dir / "a", 1) && run_pipeline(dir / "run.cfg", dir / "b", 1) &&
                   run_pipeline(dir / "run.cfg", dir / "c", 4);
  v.require(ran, "pipeline runs succeed");
  if (!ran) return v;

  const auto a = read_tree(dir / "a");
  const auto b = read_tree(dir / "b");
  v.require(a == b, "single-threaded outputs byte-identical");
  const auto c = read_tree(dir / "c");
  double worst = 0.0;
  std::size_t reports = 0;
  for (const auto& [name, text] : a) {
    if (!name.starts_with("eval_")) continue;
    ++reports;
    const auto it = c.find(name);
    const auto x = report_values(text);
    const auto y = it == c.end() ? std::vector<double>{} : report_values(it->second);
    if (x.size() != y.size()) {
      v.require(false, name + " has the same rows with 4 threads");
      continue;
    }
    for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x[k] - y[k]));
  }
  v.require(reports == 3, "three reports written");
  v.require(worst <= 1e-12, "4-thread reports within 1e-12");
  v.note(std::to_string(a.size()) + " files compared, 4-thread max diff " + num(worst));
  return v;
}

Verdict criterion_ablation(const PlantedRun& seed0) {
  Verdict v;
  double full = 0.0;
  double ablated = 0.0;
  LossWeights no_kr;
  no_kr.alpha = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto mrr_of = [&](const PlantedRun& run) {
      return knowledge_report(run.inferred, run.data, run.data.test_triplets).find(Cohort::All)->mrr;
    };
    full += seed == 0 ? mrr_of(seed0) : mrr_of(run_planted(seed));
    ablated += mrr_of(run_planted(seed, no_kr));
  }
  full /= 5.0;
  ablated /= 5.0;
  v.require(ablated < full, "alpha = 0 lowers mean MRR");
  v.note("mean MRR full " + num(full) + " vs alpha=0 " + num(ablated));
  return v;
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failed;
    std::printf("criterion %d %s  %-28s %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  };

  report(1, "gradient exactness", criterion_gradients);
  report(2, "propagation oracle", criterion_propagation);
  PlantedRun planted;
  report(3, "planted-structure pretraining", [&] {
    planted = run_planted(0);
    return criterion_planted(planted);
  });
  report(4, "zero-shot induction", [&] { return criterion_zero_shot(planted); });
  report(5, "fine-tuning adapts the gate", [&] { return criterion_finetune(planted); });
  report(6, "metric oracles", criterion_metrics);
  report(7, "determinism", criterion_determinism);
  report(8, "ablation direction", [&] { return criterion_ablation(planted); });
  std::printf("acceptance complete: %d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
