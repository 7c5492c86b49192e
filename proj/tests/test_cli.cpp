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

#include <fstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mpkg/checkpoint.hpp"
#include "mpkg/cli.hpp"
#include "mpkg/config.hpp"
#include "mpkg/io.hpp"
#include "mpkg/params.hpp"

using namespace mpkg;
using mpkg::testing::TempDir;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "mpkg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

const char* kSmall =
    "# tiny end-to-end run\n"
    "num_items = 60\nnum_blocks = 3\nnum_relations = 2\nd_in = 8\n"
    "p_in = 0.3\np_out = 0.02\nnum_users = 20\ninteractions_per_user = 8\n"
    "dim = 8\nlayers = 1\nhops = 1\nepochs = 2\nbatch_size = 64\n"
    "finetune_epochs = 2\nfinetune_batch_size = 32\n";

std::string write_config(const TempDir& dir, const std::string& extra = "") {
  const auto path = dir / "run.cfg";
  write_file(path, std::string(kSmall) + extra);
  return path.string();
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  TempDir dir("cli_usage");
  CHECK(run({}) == kExitUsage);
  CHECK(run({"nonsense"}) == kExitUsage);
  CHECK(run({"gen", "--out", (dir / "d").string()}) == kExitUsage);
  CHECK(run({"eval", "--seed", "1", "--task", "bogus"}) == kExitUsage);
  CHECK(run({"eval", "--seed", "1", "--setting", "cold"}) == kExitUsage);
  CHECK(run({"gen", "--seed", "1", "--threads", "0", "--out", (dir / "d").string()}) == kExitUsage);
}

TEST_CASE("input errors exit 2") {
  TempDir dir("cli_input");
  CHECK(run({"pretrain", "--seed", "1", "--data", (dir / "missing").string(), "--out", dir.path().string()}) ==
        kExitInput);
  write_file(dir / "bad.cfg", "num_items = 60\nnot_a_key = 3\n");
  CHECK(run({"gen", "--seed", "1", "--config", (dir / "bad.cfg").string(), "--out", (dir / "d").string()}) ==
        kExitInput);
  write_file(dir / "bad2.cfg", "num_blocks = 0\n");
  CHECK(run({"gen", "--seed", "1", "--config", (dir / "bad2.cfg").string(), "--out", (dir / "d").string()}) ==
        kExitInput);
  CHECK(run({"gen", "--seed", "1", "--config", (dir / "absent.cfg").string()}) == kExitInput);
}

TEST_CASE("gradcheck exit codes") {
  CHECK(run({"gradcheck", "--seed", "0"}) == kExitOk);
  CHECK(run({"gradcheck", "--seed", "0", "--tol", "1e-12"}) == kExitGradCheck);
}

TEST_CASE("gen is deterministic and honors zero_shot_fraction") {
  TempDir dir("cli_gen");
  const auto cfg = write_config(dir);
  REQUIRE(run({"gen", "--seed", "3", "--config", cfg, "--out", (dir / "a").string()}) == kExitOk);
  REQUIRE(run({"gen", "--seed", "3", "--config", cfg, "--out", (dir / "b").string(), "--threads", "4"}) == kExitOk);
  CHECK(read_file(dir / "a" / "manifest.tsv") == read_file(dir / "b" / "manifest.tsv"));
  REQUIRE(run({"gen", "--seed", "4", "--config", cfg, "--out", (dir / "c").string()}) == kExitOk);
  CHECK(read_file(dir / "a" / "manifest.tsv") != read_file(dir / "c" / "manifest.tsv"));

  const auto cold = write_config(dir, "zero_shot_fraction = 0\n");
  REQUIRE(run({"gen", "--seed", "3", "--config", cold, "--out", (dir / "z").string()}) == kExitOk);
  CHECK_FALSE(std::filesystem::exists(dir / "z" / "zs_items.tsv"));
  CHECK_FALSE(std::filesystem::exists(dir / "z" / "zs_features.bin"));
  CHECK(std::filesystem::exists(dir / "z" / "pkg_triplets.tsv"));
}

TEST_CASE("pipeline end to end") {
  TempDir dir("cli_pipeline");
  const auto cfg = write_config(dir);
  const auto out = (dir / "run").string();
  REQUIRE(run({"gen", "--seed", "5", "--config", cfg, "--out", out}) == kExitOk);
  REQUIRE(run({"pretrain", "--seed", "5", "--config", cfg, "--out", out}) == kExitOk);
  CHECK(std::filesystem::exists(dir / "run" / "pretrained.ckpt"));
  CHECK(std::filesystem::exists(dir / "run" / "pretrain_history.tsv"));

  REQUIRE(run({"finetune", "--seed", "5", "--config", cfg, "--out", out}) == kExitOk);
  const Checkpoint pre = load_checkpoint(dir / "run" / "pretrained.ckpt");
  const Checkpoint fine = load_checkpoint(dir / "run" / "finetuned.ckpt");
  const auto a = named_tensors(pre.params);
  const auto b = named_tensors(fine.params);
  REQUIRE(a.size() == b.size());
  bool gate_moved = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    REQUIRE(a[k].name == b[k].name);
    const bool same = std::equal(a[k].values().begin(), a[k].values().end(), b[k].values().begin());
    if (is_gate_tensor(a[k].name)) {
      gate_moved = gate_moved || !same;
    } else {
      CHECK_MESSAGE(same, a[k].name);
    }
  }
  CHECK(gate_moved);

  SUBCASE("eval writes reports and plots") {
    REQUIRE(run({"eval", "--seed", "5", "--config", cfg, "--out", out, "--task", "kp", "--setting", "all"}) ==
            kExitOk);
    REQUIRE(run({"eval", "--seed", "5", "--config", cfg, "--out", out, "--task", "zsir", "--setting", "zs",
                 "--topn", "5,10", "--emit-plots"}) == kExitOk);
    CHECK(std::filesystem::exists(dir / "run" / "eval_kp_all.tsv"));
    const std::string zsir = read_file(dir / "run" / "eval_zsir_zs.tsv");
    CHECK(zsir.find("NDCG@10") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "run" / "plots" / "eval_zsir_zs_NDCG@5.tsv"));
    CHECK(run({"eval", "--seed", "5", "--config", cfg, "--out", out, "--topn", "0"}) == kExitUsage);
  }

  SUBCASE("infer writes one row per item") {
    REQUIRE(run({"infer", "--seed", "5", "--config", cfg, "--out", out}) == kExitOk);
    const Matrix e = load_features(dir / "run" / "embeddings.bin");
    CHECK(e.rows() == 60);
    CHECK(e.cols() == 8);
    CHECK(e.allFinite());
  }

  SUBCASE("zero fine-tuning epochs keep every tensor") {
    const auto zero = write_config(dir, "finetune_epochs = 0\n");
    const auto out0 = (dir / "zero").string();
    REQUIRE(run({"finetune", "--seed", "5", "--config", zero, "--data", out,
                 "--checkpoint", (dir / "run" / "pretrained.ckpt").string(), "--out", out0}) == kExitOk);
    CHECK(load_checkpoint(dir / "zero" / "finetuned.ckpt").params == pre.params);
  }

  SUBCASE("corrupt or mismatched checkpoints exit 4") {
    std::string bytes = read_file(dir / "run" / "pretrained.ckpt");
    bytes[0] = 'X';
    write_file(dir / "bad.ckpt", bytes);
    CHECK(run({"eval", "--seed", "5", "--out", out, "--checkpoint", (dir / "bad.ckpt").string()}) ==
          kExitCheckpoint);
    write_file(dir / "short.ckpt", read_file(dir / "run" / "pretrained.ckpt").substr(0, 40));
    CHECK(run({"infer", "--seed", "5", "--out", out, "--checkpoint", (dir / "short.ckpt").string()}) ==
          kExitCheckpoint);
  }
}

TEST_CASE("pretrain with zero epochs still writes a checkpoint") {
  TempDir dir("cli_zero");
  const auto cfg = write_config(dir, "epochs = 0\n");
  const auto out = (dir / "run").string();
  REQUIRE(run({"gen", "--seed", "2", "--config", cfg, "--out", out}) == kExitOk);
  REQUIRE(run({"pretrain", "--seed", "2", "--config", cfg, "--out", out}) == kExitOk);
  const Checkpoint ckpt = load_checkpoint(dir / "run" / "pretrained.ckpt");
  CHECK(ckpt.params.num_relations() == 2);
  CHECK(ckpt.params.embedding_dim() == 8);
}

TEST_CASE("config parsing") {
  const auto cfg = RunConfig::parse("# header\n  seed = 9  # trailing\n\np_in = 0.1, 0.2\ntopn=5,10\n");
  CHECK(cfg.get_u64("seed", 0) == 9);
  CHECK(cfg.get_doubles("p_in", {}) == std::vector<double>{0.1, 0.2});
  CHECK(cfg.get_indices("topn", {}) == std::vector<Index>{5, 10});
  CHECK(cfg.get_int("absent", 7) == 7);
  CHECK_NOTHROW(cfg.check_known_keys());
  CHECK_THROWS_AS(RunConfig::parse("seed 9\n"), InputError);
  CHECK_THROWS_AS(RunConfig::parse(" = 9\n"), InputError);
  CHECK_THROWS_AS(RunConfig::parse("seed = nine\n").get_u64("seed", 0), InputError);
  CHECK_THROWS_AS(RunConfig::parse("emit_plots = maybe\n").get_bool("emit_plots", false), InputError);

  auto a = RunConfig::parse("seed = 1\nlr = 0.01\n");
  auto b = a;
  b.set("threads", "8");
  b.set("out", "/elsewhere");
  CHECK(a.hash() == b.hash());
  b.set("lr", "0.02");
  CHECK(a.hash() != b.hash());
}
