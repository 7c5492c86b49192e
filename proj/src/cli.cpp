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

#include "mpkg/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mpkg/checkpoint.hpp"
#include "mpkg/config.hpp"
#include "mpkg/dataset.hpp"
#include "mpkg/encoder.hpp"
#include "mpkg/errors.hpp"
#include "mpkg/evaluation.hpp"
#include "mpkg/finetune.hpp"
#include "mpkg/gradcheck_suite.hpp"
#include "mpkg/inference.hpp"
#include "mpkg/io.hpp"
#include "mpkg/pretrain.hpp"

namespace mpkg {
namespace {

namespace fs = std::filesystem;

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  std::string data;
  std::string checkpoint;
  std::string task = "kp";
  std::string setting = "all";
  std::string topn;
  bool emit_plots = false;
  std::optional<double> tol;
  bool verbose = false;
};

RunConfig effective_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (o.threads) cfg.set("threads", std::to_string(*o.threads));
  if (!o.out.empty()) cfg.set("out", o.out);
  if (!o.data.empty()) cfg.set("data", o.data);
  if (!o.checkpoint.empty()) cfg.set("checkpoint", o.checkpoint);
  if (!o.topn.empty()) cfg.set("topn", o.topn);
  if (o.tol) cfg.set("gradcheck_tol", fmt::format("{:.17g}", *o.tol));
  cfg.check_known_keys();
  if (!cfg.has("seed")) throw UsageError("a seed is required (--seed or 'seed' in the config file)");
  if (cfg.get_int("threads", 1) < 1) throw UsageError("--threads must be at least 1");
  return cfg;
}

fs::path out_dir(const RunConfig& cfg) { return cfg.get_string("out", "."); }
fs::path data_dir(const RunConfig& cfg) { return cfg.get_string("data", out_dir(cfg).string()); }
int threads(const RunConfig& cfg) { return static_cast<int>(cfg.get_int("threads", 1)); }

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += sep;
    out += parts[k];
  }
  return out;
}

int meta_int(const Checkpoint& ckpt, const std::string& key) {
  const auto it = ckpt.meta.find(key);
  if (it == ckpt.meta.end()) throw CheckpointError(fmt::format("checkpoint metadata lacks '{}'", key));
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw CheckpointError(fmt::format("checkpoint metadata '{}' is not an integer", key));
  }
}

void check_compatible(const Checkpoint& ckpt, const Dataset& data) {
  const auto it = ckpt.meta.find("relations");
  if (it == ckpt.meta.end() || it->second != join(data.relation_names, ',')) {
    throw CheckpointError("checkpoint relations do not match the dataset");
  }
  if (ckpt.params.input_dim() != data.graph.feature_dim()) {
    throw CheckpointError("checkpoint input width does not match the dataset features");
  }
}

fs::path checkpoint_path(const RunConfig& cfg, const char* fallback) {
  if (cfg.has("checkpoint")) return cfg.get_string("checkpoint", "");
  return out_dir(cfg) / fallback;
}

int cmd_gen(const RunConfig& cfg) {
  const SyntheticSpec spec = cfg.synthetic_spec();
  const SyntheticData data = generate_synthetic(spec);
  const auto manifest = write_dataset(out_dir(cfg), to_dataset(data));
  std::cout << fmt::format("wrote {} files to {}\n", manifest.size() + 1, out_dir(cfg).string());
  for (const auto& m : manifest) std::cout << fmt::format("  {:<24}{:016x}\n", m.file, m.hash);
  return kExitOk;
}

int cmd_pretrain(const RunConfig& cfg) {
  const PretrainConfig config = cfg.pretrain_config();
  const Dataset data = read_dataset(data_dir(cfg));
  const PretrainResult result = pretrain(data.graph, config, data.valid_triplets, [](const EpochRecord& r) {
    spdlog::debug("epoch {} total {:.6f} valid MRR {:.4f}", r.epoch, r.mean.total, r.valid_mrr.value_or(0.0));
  });
  Checkpoint ckpt;
  ckpt.config_hash = cfg.hash();
  ckpt.meta = {{"stage", "pretrain"},
               {"relations", join(data.relation_names, ',')},
               {"layers", std::to_string(config.layers)},
               {"hops", std::to_string(config.hops)},
               {"best_epoch", std::to_string(result.best_epoch)}};
  ckpt.params = result.params;
  ckpt.opt_state = result.opt_state;
  ckpt.rng_state = result.rng_state;
  const fs::path out = out_dir(cfg);
  save_checkpoint(out / "pretrained.ckpt", ckpt);
  write_file(out / "pretrain_history.tsv", format_history_tsv(result.history));
  std::cout << fmt::format("pretrained {} epochs; selected epoch {}\n", config.epochs, result.best_epoch);
  if (!result.history.empty() && result.best_epoch > 0) {
    const auto& best = result.history[static_cast<std::size_t>(result.best_epoch - 1)];
    if (best.valid_mrr) std::cout << fmt::format("validation MRR {:.4f}\n", *best.valid_mrr);
  }
  return kExitOk;
}

int cmd_finetune(const RunConfig& cfg) {
  const FinetuneConfig config = cfg.finetune_config();
  const Dataset data = read_dataset(data_dir(cfg));
  if (data.events.empty()) throw InputError("fine-tuning needs interactions.tsv in the data directory");
  const Checkpoint input = load_checkpoint(checkpoint_path(cfg, "pretrained.ckpt"));
  check_compatible(input, data);
  const int layers = meta_int(input, "layers");
  const auto train_e = encode_relations(propagate_relations(data.graph, layers, threads(cfg)), input.params, threads(cfg));
  const auto inferred = inductive_infer(data.graph, data.zero_shot, input.params, layers, threads(cfg));
  const FinetuneResult result =
      finetune(input.params, train_e, data.interactions, config, inferred.relation_embeddings);

  Checkpoint ckpt = input;
  ckpt.config_hash = cfg.hash();
  ckpt.meta["stage"] = "finetune";
  ckpt.meta["finetune_best_epoch"] = std::to_string(result.best_epoch);
  ckpt.params = result.params;
  ckpt.opt_state = result.opt_state;
  ckpt.rng_state = result.rng_state;
  const fs::path out = out_dir(cfg);
  save_checkpoint(out / "finetuned.ckpt", ckpt);
  write_file(out / "finetune_history.tsv", format_finetune_history_tsv(result.history));
  const Vector w = relation_weights(result.params.gate, train_e).weights;
  std::cout << fmt::format("fine-tuned {} epochs; selected epoch {}\nrelation weights:", config.epochs,
                           result.best_epoch);
  for (Index r = 0; r < w.size(); ++r) std::cout << fmt::format(" {}={:.4f}", data.relation_names[r], w[r]);
  std::cout << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const Options& o) {
  const auto setting = parse_candidate_setting(o.setting);
  EvalOptions options;
  options.topn = cfg.get_indices("topn", {20});
  options.threads = threads(cfg);
  for (Index n : options.topn) {
    if (n < 1) throw UsageError("--topn values must be at least 1");
  }
  const Dataset data = read_dataset(data_dir(cfg));
  fs::path path = checkpoint_path(cfg, "finetuned.ckpt");
  if (!cfg.has("checkpoint") && !fs::exists(path)) path = out_dir(cfg) / "pretrained.ckpt";
  const Checkpoint ckpt = load_checkpoint(path);
  check_compatible(ckpt, data);
  const auto inferred = inductive_infer(data.graph, data.zero_shot, ckpt.params, meta_int(ckpt, "layers"), threads(cfg));

  EvalReport report;
  if (o.task == "kp") {
    std::vector<IndexedTriplet> heldout;
    if (setting == CandidateSetting::All) heldout = data.test_triplets;
    heldout.insert(heldout.end(), data.zs_test_triplets.begin(), data.zs_test_triplets.end());
    const auto mask = data.zero_shot_mask();
    report = eval_knowledge_prediction(inferred.relation_embeddings, heldout, inferred.graph, &mask, options);
    report.setting = *setting;
  } else {
    if (data.events.empty()) throw InputError("zsir evaluation needs interactions.tsv in the data directory");
    report = eval_zsir(inferred.fused, data.interactions, *setting, Split::Test, options);
  }

  const fs::path out = out_dir(cfg);
  const std::string stem = fmt::format("eval_{}_{}", o.task, o.setting);
  std::ostringstream tsv;
  write_report_tsv(tsv, report);
  write_file(out / (stem + ".tsv"), tsv.str());
  if (o.emit_plots || cfg.get_bool("emit_plots", false)) {
    std::map<std::string, std::string> per_metric;
    std::istringstream rows(tsv.str());
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
      std::vector<std::string> f;
      std::istringstream fields(line);
      for (std::string part; std::getline(fields, part, '\t');) f.push_back(part);
      auto& text = per_metric[f[3]];
      if (text.empty()) text = "cohort\tvalue\n";
      text += f[2] + "\t" + f[4] + "\n";
    }
    for (const auto& [metric, text] : per_metric) write_file(out / "plots" / (stem + "_" + metric + ".tsv"), text);
  }
  std::cout << format_report_table(report);
  return kExitOk;
}

int cmd_infer(const RunConfig& cfg) {
  const Dataset data = read_dataset(data_dir(cfg));
  fs::path path = checkpoint_path(cfg, "finetuned.ckpt");
  if (!cfg.has("checkpoint") && !fs::exists(path)) path = out_dir(cfg) / "pretrained.ckpt";
  const Checkpoint ckpt = load_checkpoint(path);
  check_compatible(ckpt, data);
  const auto inferred = inductive_infer(data.graph, data.zero_shot, ckpt.params, meta_int(ckpt, "layers"), threads(cfg));
  save_features(out_dir(cfg) / "embeddings.bin", inferred.fused);
  std::cout << fmt::format("wrote {} x {} embeddings\n", inferred.fused.rows(), inferred.fused.cols());
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& cfg) {
  GradCheckOptions options;
  options.h = cfg.get_double("gradcheck_h", options.h);
  options.tol = cfg.get_double("gradcheck_tol", options.tol);
  options.samples_per_tensor = cfg.get_int("gradcheck_samples", options.samples_per_tensor);
  options.seed = cfg.get_u64("seed", 0);
  if (!(options.h > 0.0)) throw UsageError("gradcheck step must be positive");
  const auto checks = run_gradcheck_suite(options.seed, options);
  std::cout << format_suite(checks);
  bool passed = true;
  for (const auto& c : checks) passed = passed && c.report.passed;
  std::cout << (passed ? "gradcheck passed\n" : "gradcheck FAILED\n");
  return passed ? kExitOk : kExitGradCheck;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key = value settings file");
  sub->add_option("--seed", o.seed, "random seed (required here or in the config)");
  sub->add_option("--threads", o.threads, "worker threads");
  sub->add_option("--out", o.out, "output directory");
  sub->add_flag("-v,--verbose", o.verbose, "debug logging");
}

void setup_logging(bool verbose) {
  auto logger = spdlog::get("mpkg");
  if (!logger) logger = spdlog::stderr_color_mt("mpkg");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Multi-relational product knowledge graph pre-training"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  auto* pre = app.add_subcommand("pretrain", "pre-train the encoder, decoder and gate");
  auto* fine = app.add_subcommand("finetune", "fine-tune the gate on interactions");
  auto* eval = app.add_subcommand("eval", "evaluate knowledge prediction or recommendation");
  auto* infer = app.add_subcommand("infer", "embed all items including zero-shot ones");
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  for (auto* sub : {gen, pre, fine, eval, infer, grad}) add_common(sub, o);
  for (auto* sub : {pre, fine, eval, infer}) sub->add_option("--data", o.data, "dataset directory (default: --out)");
  for (auto* sub : {fine, eval, infer}) sub->add_option("--checkpoint", o.checkpoint, "checkpoint to load");
  eval->add_option("--task", o.task, "kp or zsir")->check(CLI::IsMember({"kp", "zsir"}));
  eval->add_option("--setting", o.setting, "all or zs candidates")->check(CLI::IsMember({"all", "zs"}));
  eval->add_option("--topn", o.topn, "comma-separated cutoffs (default 20)");
  eval->add_flag("--emit-plots", o.emit_plots, "write per-metric TSVs under plots/");
  grad->add_option("--tol", o.tol, "maximum relative error (default 1e-4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  setup_logging(o.verbose);

  try {
    const RunConfig cfg = effective_config(o);
    if (*gen) return cmd_gen(cfg);
    if (*pre) return cmd_pretrain(cfg);
    if (*fine) return cmd_finetune(cfg);
    if (*eval) return cmd_eval(cfg, o);
    if (*infer) return cmd_infer(cfg);
    if (*grad) return cmd_gradcheck(cfg);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const CheckpointError& e) {
    spdlog::error("checkpoint: {}", e.what());
    return kExitCheckpoint;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kExitNumerical;
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace mpkg
