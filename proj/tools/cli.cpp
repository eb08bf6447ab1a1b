#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tkgc/checkpoint.hpp"
#include "tkgc/config.hpp"
#include "tkgc/eval.hpp"
#include "tkgc/ingest.hpp"
#include "tkgc/training.hpp"

namespace tkgc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kDataDirEnv = "TKGC_DATA_DIR";

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::string data_dir;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string score_fn;
  std::string tie_mode;
  std::string filter_mode;
  std::vector<std::string> overrides;
};

struct CommandError : Error {
  using Error::Error;
};

void add_config_options(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--config", o.config_path, "Config file (key = value lines)");
  cmd.add_option("--preset", o.preset, "Dataset preset: icews14, icews05-15, gdelt");
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--threads", o.threads, "Worker threads (1 = bit-exact training)");
  cmd.add_option("--score-fn", o.score_fn, "distmult or complex");
  cmd.add_option("--tie-mode", o.tie_mode, "pessimistic or mean");
  cmd.add_option("--filter-mode", o.filter_mode, "time-aware or static");
  cmd.add_option("--set", o.overrides, "Extra key=value config overrides");
}

void add_data_options(CLI::App& cmd, CommonOptions& o, bool need_out) {
  cmd.add_option("--data-dir", o.data_dir, std::string("Dataset directory (default $") + kDataDirEnv + ")");
  auto* out = cmd.add_option("--out-dir", o.out_dir, "Output directory");
  if (need_out) out->required();
}

RunConfig resolve_config(const CommonOptions& o) {
  RunConfig cfg = o.preset.empty() ? RunConfig{} : RunConfig::for_dataset(o.preset);
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw CommandError("cannot read config file: " + o.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    // Preset only provides defaults; the file wins wherever it sets a key.
    try {
      cfg = RunConfig::from_text(cfg.to_text() + ss.str());
    } catch (const Error& e) {
      throw CommandError(o.config_path + ": " + e.what());
    }
  }
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    cfg.set(key, kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.score_fn.empty()) cfg.set("score_fn", o.score_fn);
  if (!o.tie_mode.empty()) cfg.set("tie_mode", o.tie_mode);
  if (!o.filter_mode.empty()) cfg.set("filter_mode", o.filter_mode);
  cfg.validate();
  return cfg;
}

fs::path data_dir_of(const CommonOptions& o) {
  std::string dir = o.data_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv(kDataDirEnv)) dir = env;
  }
  if (dir.empty()) throw CommandError("no data directory: pass --data-dir or set " + std::string(kDataDirEnv));
  if (!fs::is_directory(dir)) throw CommandError("data directory not found: " + dir);
  return dir;
}

std::uint64_t hash_inputs(const fs::path& data_dir, const RunConfig& cfg) {
  std::uint64_t h = fnv1a64(cfg.to_text());
  for (const char* name : {"train.txt", "valid.txt", "test.txt"}) {
    std::ifstream in(data_dir / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    h = fnv1a64(ss.str(), h);
  }
  return h;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  std::istringstream in(cfg.to_text());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

ordered_json metrics_json(const MetricsReport& m) { return ordered_json::parse(m.to_json()); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError("cannot write " + path.string());
  out << text;
}

void print_resolved(const RunConfig& cfg) {
  std::cout << "# resolved config (hash " << hex64(cfg.hash()) << ")\n" << cfg.to_text() << std::flush;
}

struct RunOutcome {
  MetricsReport test;
  double best_valid_mrr = 0.0;
  std::size_t best_epoch = 0;
};

// Train on `ds`, keep best/last checkpoints and the JSON-lines log in `out`,
// then evaluate the best parameters on the test split.
RunOutcome train_and_evaluate(const Dataset& ds, const RunConfig& cfg, const fs::path& out,
                              const std::string& variant, std::uint64_t input_hash) {
  fs::create_directories(out);
  write_text(out / "config.txt", cfg.to_text());
  const TrainingData data = TrainingData::from_splits(ds.splits, ds.vocab_sizes());
  std::ofstream log(out / "train_log.jsonl", std::ios::binary);
  if (!log) throw CommandError("cannot write " + (out / "train_log.jsonl").string());

  std::size_t saved_best = 0;
  auto on_epoch = [&](const EpochRecord& rec, const TrainState& st) {
    log << rec.to_json_line(cfg.log_wall_seconds) << '\n' << std::flush;
    save_checkpoint(out / "last.ckpt", {cfg, ds.vocab_sizes(), st});
    if (st.best_epoch != saved_best) {
      save_checkpoint(out / "best.ckpt", {cfg, ds.vocab_sizes(), st});
      saved_best = st.best_epoch;
    }
    std::cerr << "epoch " << rec.epoch << " loss " << rec.train_loss;
    if (rec.valid) std::cerr << " valid_mrr " << rec.valid->mrr;
    std::cerr << '\n';
  };
  TrainResult result = train(data, cfg, on_epoch);
  if (result.state.best_epoch == 0) {
    save_checkpoint(out / "best.ckpt", {cfg, ds.vocab_sizes(), result.state});
  }

  RunOutcome outcome;
  outcome.best_epoch = result.state.best_epoch;
  outcome.best_valid_mrr = result.state.best_valid_mrr;
  outcome.test = evaluate(data.train_kg, data.test_raw, data.filter, result.state.best_params, cfg);
  outcome.test.variant = variant;
  write_rank_dump(out / "test_ranks.tsv", outcome.test);

  ordered_json report;
  report["variant"] = variant;
  report["config"] = config_json(cfg);
  report["config_hash"] = hex64(cfg.hash());
  report["input_hash"] = hex64(input_hash);
  report["best_epoch"] = outcome.best_epoch;
  report["best_valid_mrr"] = outcome.best_valid_mrr;
  report["test"] = metrics_json(outcome.test);
  write_text(out / "report.json", report.dump(2) + "\n");
  write_text(out / "report.csv", MetricsReport::csv_header() + "\n" + outcome.test.csv_row() + "\n");
  return outcome;
}

int cmd_stats(const CommonOptions& o) {
  const Dataset ds = load_dataset_dir(data_dir_of(o));
  std::cout << ds.stats.to_json() << '\n';
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    write_text(fs::path(o.out_dir) / "stats.json", ds.stats.to_json() + "\n");
  }
  return kExitOk;
}

int cmd_gen_unseen(const CommonOptions& o) {
  const Dataset ds = load_dataset_dir(data_dir_of(o));
  const auto calendar = calendar_of(ds.time_axis, ds.stats.n_timestamps);
  const SplitSet splits = make_unseen_split(ds.splits.train, calendar, o.seed.value_or(0));
  DatasetStats stats = compute_stats(splits);
  write_split_files(o.out_dir, splits, ds, stats);
  std::cout << stats.to_json() << '\n';
  return kExitOk;
}

int cmd_gen_irregular(const CommonOptions& o) {
  const Dataset ds = load_dataset_dir(data_dir_of(o));
  const IrregularSplit split = make_irregular_split(ds, o.seed.value_or(0));
  write_split_files(o.out_dir, split.splits, ds, split.stats);
  std::ofstream snaps(fs::path(o.out_dir) / "snapshots.txt");
  for (TimeIndex t : split.snapshots) snaps << t << '\n';
  std::cout << split.stats.to_json() << '\n';
  return kExitOk;
}

int cmd_train(const CommonOptions& o) {
  const RunConfig cfg = resolve_config(o);
  const fs::path dir = data_dir_of(o);
  print_resolved(cfg);
  const Dataset ds = load_dataset_dir(dir);
  const RunOutcome r = train_and_evaluate(ds, cfg, o.out_dir, "baseline", hash_inputs(dir, cfg));
  std::cout << r.test.to_json() << '\n';
  return kExitOk;
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint_path, const std::string& split) {
  const fs::path dir = data_dir_of(o);
  const fs::path ckpt = checkpoint_path.empty() ? fs::path(o.out_dir) / "best.ckpt" : fs::path(checkpoint_path);
  if (!fs::exists(ckpt)) throw CommandError("checkpoint not found: " + ckpt.string());
  Checkpoint ck = load_checkpoint(ckpt);
  CommonOptions flags = o;
  flags.config_path.clear();
  flags.preset.clear();
  // Checkpoint config first, then command-line overrides.
  RunConfig cfg = RunConfig::from_text(ck.config.to_text());
  for (const std::string& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.threads) cfg.eval_threads = *o.threads;
  if (!o.tie_mode.empty()) cfg.set("tie_mode", o.tie_mode);
  if (!o.filter_mode.empty()) cfg.set("filter_mode", o.filter_mode);
  if (!o.score_fn.empty() && o.score_fn != to_string(cfg.score_fn)) {
    throw CommandError("--score-fn cannot change the score function of a trained checkpoint");
  }
  cfg.validate();
  print_resolved(cfg);

  const Dataset ds = load_dataset_dir(dir);
  if (!(ds.vocab_sizes() == ck.vocab)) throw CommandError("checkpoint vocabulary does not match the dataset");
  const TrainingData data = TrainingData::from_splits(ds.splits, ds.vocab_sizes());
  const auto& facts = split == "valid" ? data.valid_raw : data.test_raw;
  MetricsReport report = evaluate(data.train_kg, facts, data.filter, ck.state.best_params, cfg);
  report.variant = split;

  fs::create_directories(o.out_dir);
  ordered_json j;
  j["split"] = split;
  j["checkpoint"] = ckpt.string();
  j["config"] = config_json(cfg);
  j["config_hash"] = hex64(cfg.hash());
  j["input_hash"] = hex64(hash_inputs(dir, cfg));
  j["metrics"] = metrics_json(report);
  write_text(fs::path(o.out_dir) / ("eval_" + split + ".json"), j.dump(2) + "\n");
  write_text(fs::path(o.out_dir) / ("eval_" + split + ".csv"),
             MetricsReport::csv_header() + "\n" + report.csv_row() + "\n");
  write_rank_dump(fs::path(o.out_dir) / ("eval_" + split + "_ranks.tsv"), report);
  std::cout << report.to_json() << '\n';
  return kExitOk;
}

RunConfig apply_variant(RunConfig cfg, const std::string& variant) {
  if (variant == "absolute-time") {
    cfg.time_encoder_variant = TimeEncoderVariant::kAbsolute;
  } else if (variant == "random-sample") {
    cfg.sampler_variant = SamplerVariant::kUniform;
  } else if (variant == "whole-neighborhood") {
    cfg.sampler_variant = SamplerVariant::kAll;
  } else {
    throw CommandError("unknown ablation variant '" + variant +
                       "' (expected absolute-time, random-sample or whole-neighborhood)");
  }
  return cfg;
}

int cmd_ablate(const CommonOptions& o, const std::string& variant) {
  const RunConfig base = resolve_config(o);
  const RunConfig cfg = apply_variant(base, variant);
  const fs::path dir = data_dir_of(o);
  print_resolved(cfg);
  const Dataset ds = load_dataset_dir(dir);
  const fs::path out = fs::path(o.out_dir) / variant;
  const RunOutcome r = train_and_evaluate(ds, cfg, out, variant, hash_inputs(dir, cfg));

  ordered_json j;
  j["variant"] = variant;
  j["changed_keys"] = config_diff(base, cfg);
  j["baseline_config"] = config_json(base);
  j["config"] = config_json(cfg);
  j["config_hash"] = hex64(cfg.hash());
  j["input_hash"] = hex64(hash_inputs(dir, cfg));
  j["test"] = metrics_json(r.test);
  write_text(fs::path(o.out_dir) / ("ablation_" + variant + ".json"), j.dump(2) + "\n");
  write_text(fs::path(o.out_dir) / ("ablation_" + variant + ".csv"),
             MetricsReport::csv_header() + "\n" + r.test.csv_row() + "\n");
  std::cout << r.test.to_json() << '\n';
  return kExitOk;
}

std::vector<std::optional<TimeIndex>> parse_ranges(const std::string& text) {
  std::vector<std::optional<TimeIndex>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all" || item == "max") {
      out.push_back(kUnbounded);
      continue;
    }
    RunConfig probe;
    probe.set("search_range", item);
    out.push_back(probe.search_range);
  }
  if (out.empty()) throw CommandError("--ranges is empty");
  return out;
}

int cmd_sweep_range(const CommonOptions& o, const std::string& ranges_text) {
  const RunConfig base = resolve_config(o);
  const fs::path dir = data_dir_of(o);
  print_resolved(base);
  const auto ranges = parse_ranges(ranges_text);
  const Dataset ds = load_dataset_dir(dir);
  fs::create_directories(o.out_dir);

  std::ostringstream csv;
  csv << "range,mrr,hits1,hits3,hits10\n";
  ordered_json rows = ordered_json::array();
  bool failed = false;
  for (const auto& range : ranges) {
    const std::string label = range ? std::to_string(*range) : "all";
    RunConfig cfg = base;
    cfg.search_range = range;
    ordered_json row;
    row["range"] = label;
    try {
      const RunOutcome r = train_and_evaluate(ds, cfg, fs::path(o.out_dir) / ("range_" + label),
                                              "range_" + label, hash_inputs(dir, cfg));
      char line[256];
      std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.6f\n", label.c_str(), r.test.mrr,
                    r.test.hits1, r.test.hits3, r.test.hits10);
      csv << line;
      row["mrr"] = r.test.mrr;
      row["hits1"] = r.test.hits1;
      row["hits3"] = r.test.hits3;
      row["hits10"] = r.test.hits10;
    } catch (const std::exception& e) {
      failed = true;
      std::cerr << "range " << label << " failed: " << e.what() << '\n';
      row["error"] = e.what();
    }
    rows.push_back(row);
  }
  ordered_json j;
  j["config"] = config_json(base);
  j["config_hash"] = hex64(base.hash());
  j["input_hash"] = hex64(hash_inputs(dir, base));
  j["rows"] = rows;
  write_text(fs::path(o.out_dir) / "sweep_range.csv", csv.str());
  write_text(fs::path(o.out_dir) / "sweep_range.json", j.dump(2) + "\n");
  std::cout << csv.str();
  return failed ? kExitError : kExitOk;
}

int cmd_params(const CommonOptions& o, std::optional<std::size_t> entities,
               std::optional<std::size_t> relations) {
  const RunConfig cfg = resolve_config(o);
  VocabSizes vocab;
  if (entities && relations) {
    vocab = {*entities, *relations, 1};
  } else {
    vocab = load_dataset_dir(data_dir_of(o)).vocab_sizes();
  }
  const ParameterCount count = count_parameters(cfg, vocab);
  std::cout << count.to_json() << '\n';
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    ordered_json j = ordered_json::parse(count.to_json());
    j["config"] = config_json(cfg);
    j["num_entities"] = vocab.num_entities;
    j["num_base_relations"] = vocab.num_base_relations;
    write_text(fs::path(o.out_dir) / "params.json", j.dump(2) + "\n");
    write_text(fs::path(o.out_dir) / "params.csv", count.to_csv());
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Temporal knowledge graph completion: training, evaluation and dataset tools", "tkgc"};
  app.require_subcommand(1);

  CommonOptions o;
  std::string variant;
  std::string ranges;
  std::string split = "test";
  std::string checkpoint;
  std::optional<std::size_t> num_entities;
  std::optional<std::size_t> num_relations;

  auto* stats = app.add_subcommand("stats", "Dataset statistics of train/valid/test.txt");
  add_data_options(*stats, o, false);

  auto* unseen = app.add_subcommand("gen-unseen", "Build the unseen-timestamp split");
  add_data_options(*unseen, o, true);
  unseen->add_option("--seed", o.seed, "Shuffle seed for the valid/test halving");

  auto* irregular = app.add_subcommand("gen-irregular", "Build the irregular-snapshot split");
  add_data_options(*irregular, o, true);
  irregular->add_option("--seed", o.seed, "Gap sampling seed");

  auto* train_cmd = app.add_subcommand("train", "Train, checkpoint and evaluate on test");
  add_data_options(*train_cmd, o, true);
  add_config_options(*train_cmd, o);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_data_options(*eval_cmd, o, true);
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint (default <out-dir>/best.ckpt)");
  eval_cmd->add_option("--split", split, "valid or test")->check(CLI::IsMember({"valid", "test"}));
  eval_cmd->add_option("--threads", o.threads, "Evaluation threads");
  eval_cmd->add_option("--tie-mode", o.tie_mode, "pessimistic or mean");
  eval_cmd->add_option("--filter-mode", o.filter_mode, "time-aware or static");
  eval_cmd->add_option("--score-fn", o.score_fn, "Must match the checkpoint");
  eval_cmd->add_option("--set", o.overrides, "Extra key=value config overrides");

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate one ablation variant");
  add_data_options(*ablate, o, true);
  add_config_options(*ablate, o);
  ablate->add_option("--variant", variant, "absolute-time, random-sample or whole-neighborhood")
      ->required();

  auto* sweep = app.add_subcommand("sweep-range", "Train and evaluate per neighbor search range");
  add_data_options(*sweep, o, true);
  add_config_options(*sweep, o);
  sweep->add_option("--ranges", ranges, "Comma-separated ranges; 'all' for the whole timeline")
      ->required();

  auto* params = app.add_subcommand("params", "Parameter count with per-tensor breakdown");
  add_data_options(*params, o, false);
  add_config_options(*params, o);
  params->add_option("--num-entities", num_entities, "|E| (instead of --data-dir)");
  params->add_option("--num-relations", num_relations, "Base |R| (instead of --data-dir)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*stats) return cmd_stats(o);
    if (*unseen) return cmd_gen_unseen(o);
    if (*irregular) return cmd_gen_irregular(o);
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_eval(o, checkpoint, split);
    if (*ablate) return cmd_ablate(o, variant);
    if (*sweep) return cmd_sweep_range(o, ranges);
    if (*params) return cmd_params(o, num_entities, num_relations);
  } catch (const DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace tkgc::cli
