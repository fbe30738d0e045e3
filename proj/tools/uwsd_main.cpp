// uwsd: unsupervised word sense disambiguation runs over CoarseWSD-format data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_config.hpp"

namespace {

using namespace uwsd;
using namespace uwsd::cli;

void log(const std::string& msg) { std::cerr << "[uwsd] " << msg << "\n"; }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << text;
}

// Flags shared by `evaluate` and `disambiguate`. Values land in `flags`;
// only options actually given on the command line override the config.
struct MethodFlags {
  RunConfig flags;
  std::string config_file;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON config file (flags take precedence)");
    track(cmd->add_option("--dataset", flags.dataset, "dataset root directory"), "dataset");
    track(cmd->add_option("--method", flags.method, "cosine-cache | cosine-static | wmd | mfs | random | random-expected"),
          "method");
    track(cmd->add_option("--cache", flags.cache, "contextual cache file or directory (repeatable)"), "cache");
    track(cmd->add_option("--vectors", flags.vectors, "static word vector text file"), "vectors");
    track(cmd->add_option("--overrides", flags.overrides, "sense descriptor override JSON"), "overrides");
    track(cmd->add_option("--pooling", flags.pooling, "uniform | softmax"), "pooling");
    track(cmd->add_option("--projection", flags.projection, "JSON array scoring vector for softmax pooling"),
          "projection");
    track(cmd->add_option("--layer-weights", flags.layer_weights, "per-layer mixing weights, summing to 1")
              ->delimiter(','),
          "layer_weights");
    track(cmd->add_option("--gamma", flags.gamma, "scale applied to the mixed layers"), "gamma");
    track(cmd->add_option("--window", window_, "context tokens on each side of the target"), "window");
    track(cmd->add_option("--seed", seed_, "seed for the random baseline"), "seed");
    track(cmd->add_flag("--skip-errors", skip_, "exclude unscorable instances instead of counting misses"),
          "skip");
    track(cmd->add_option("--words", flags.words, "restrict to these words")->delimiter(','), "words");
    track(cmd->add_option("--jobs", flags.jobs, "worker threads (default: all cores)"), "jobs");
    track(cmd->add_option("--strategy", flags.strategy, "strategy name recorded in the report"), "strategy");
  }

  RunConfig resolve() {
    RunConfig cfg;
    if (!config_file.empty()) cfg.apply_json_file(config_file);
    cfg.apply_environment();
    for (const auto& [opt, key] : tracked_) {
      if (opt->count() == 0) continue;
      if (key == "dataset") cfg.dataset = flags.dataset;
      else if (key == "method") cfg.method = flags.method;
      else if (key == "cache") cfg.cache = flags.cache;
      else if (key == "vectors") cfg.vectors = flags.vectors;
      else if (key == "overrides") cfg.overrides = flags.overrides;
      else if (key == "pooling") cfg.pooling = flags.pooling;
      else if (key == "projection") cfg.projection = flags.projection;
      else if (key == "layer_weights") cfg.layer_weights = flags.layer_weights;
      else if (key == "gamma") cfg.gamma = flags.gamma;
      else if (key == "window") cfg.window = window_;
      else if (key == "seed") cfg.seed = seed_;
      else if (key == "skip") cfg.strict = !skip_;
      else if (key == "words") cfg.words = flags.words;
      else if (key == "jobs") cfg.jobs = flags.jobs;
      else if (key == "strategy") cfg.strategy = flags.strategy;
    }
    return cfg;
  }

 private:
  void track(CLI::Option* opt, std::string key) { tracked_.emplace_back(opt, std::move(key)); }

  std::vector<std::pair<CLI::Option*, std::string>> tracked_;
  std::size_t window_ = 0;
  std::uint64_t seed_ = 0;
  bool skip_ = false;
};

int cmd_evaluate(MethodFlags& mf, bool require_full, const std::string& out_json, const std::string& out_table) {
  RunConfig cfg = mf.resolve();
  if (require_full) cfg.require_full = true;
  if (!out_json.empty()) cfg.out_json = out_json;
  if (!out_table.empty()) cfg.out_table = out_table;
  cfg.validate();

  Dataset ds = load_configured_dataset(cfg);
  log("loaded " + std::to_string(ds.words.size()) + " words, " + std::to_string(ds.instance_count(Split::test)) +
      " test instances");

  EvaluationReport report;
  nlohmann::json fp = cfg.fingerprint();
  if (cfg.method == "random-expected") {
    report = expected_random_report(ds);
    report.config = fp;
    if (!cfg.strategy.empty()) report.strategy = cfg.strategy;
  } else {
    BuiltPredictor built = build_predictor(cfg, ds);
    if (!built.cache_model.empty()) fp["cache_model"] = built.cache_model;
    EvalOptions opts;
    opts.strategy = built.strategy;
    opts.strict = cfg.strict;
    opts.jobs = cfg.jobs;
    opts.config = fp;
    report = evaluate(ds, built.predictor, opts);
  }

  for (std::size_t i = 0; i < report.diagnostics.size() && i < 20; ++i) log("error: " + report.diagnostics[i]);
  if (report.diagnostics.size() > 20) log("... " + std::to_string(report.diagnostics.size() - 20) + " more errors");

  const std::string json = report_to_json(report);
  if (!cfg.out_json.empty()) write_text(cfg.out_json, json);
  const std::string table = format_report(report);
  if (!cfg.out_table.empty()) write_text(cfg.out_table, table);
  if (cfg.out_json.empty()) std::cout << json;
  else if (cfg.out_table.empty()) std::cout << table;

  if (cfg.strict && report.global.errors > 0) {
    log(std::to_string(report.global.errors) + " instances could not be scored and were counted as misses");
    return kCoverage;
  }
  return kOk;
}

int cmd_disambiguate(MethodFlags& mf, const std::string& sentence, std::size_t index, const std::string& word,
                     const std::string& id) {
  RunConfig cfg = mf.resolve();
  if (cfg.method == "random" && !cfg.seed) cfg.seed = 0;
  cfg.validate();
  if (cfg.method == "random-expected") throw Error(ErrorKind::usage, "random-expected has no per-sentence prediction");

  Dataset ds = load_configured_dataset(cfg);
  const std::string key = to_lower(word);
  const WordData& data = ds.word(key);

  Instance inst;
  inst.id = id.empty() ? key + ".query.1" : id;
  inst.target_word = key;
  inst.tokens = split_whitespace(sentence);
  inst.target_index = index;
  if (inst.tokens.empty()) throw Error(ErrorKind::usage, "empty sentence");
  if (index >= inst.tokens.size())
    throw Error(ErrorKind::usage, "target index " + std::to_string(index) + " out of range for " +
                                      std::to_string(inst.tokens.size()) + " tokens");

  BuiltPredictor built = build_predictor(cfg, ds, inst.tokens);
  Prediction p = built.predictor(inst, data.inventory);
  const Sense& chosen = data.inventory.sense(p.predicted_sense);
  std::cout << "word: " << key << "\n";
  std::cout << "strategy: " << built.strategy << "\n";
  std::cout << "predicted: " << chosen.id << " " << chosen.label << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-14s %s\n", "sense", "score", "label");
  std::cout << line;
  for (const auto& [sid, value] : p.per_sense_scores) {
    std::snprintf(line, sizeof line, "%-6d %-14.9f %s%s\n", sid, value, data.inventory.sense(sid).label.c_str(),
                  sid == p.predicted_sense ? "  *" : "");
    std::cout << line;
  }
  return kOk;
}

int cmd_cache_info(const std::string& path, const std::string& dataset_root, const std::vector<std::string>& words) {
  ContextualCache cache = load_cache_dir(path);
  std::cout << "model: " << cache.model << "\n";
  std::cout << "dimension: " << cache.dimension << "\n";
  std::cout << "layers: " << cache.layers << "\n";
  std::cout << "instances: " << cache.instance_vectors.size() << "\n";
  std::cout << "senses: " << cache.sense_vectors.size() << "\n";
  if (!cache.metadata.empty()) std::cout << "metadata: " << cache.metadata.dump() << "\n";
  if (dataset_root.empty()) return kOk;

  std::optional<std::vector<std::string>> filter;
  if (!words.empty()) filter = words;
  Dataset ds = load_dataset(dataset_root, filter);
  std::size_t gaps = 0;
  std::cout << "coverage:\n";
  char line[160];
  std::snprintf(line, sizeof line, "  %-10s %8s %8s %8s %8s\n", "word", "test", "missing", "senses", "missing");
  std::cout << line;
  std::vector<std::string> missing_ids;
  for (const auto& [word, data] : ds.words) {
    std::size_t missing_inst = 0, missing_sense = 0;
    for (const auto& inst : data.test)
      if (!cache.has_instance(inst.id)) {
        ++missing_inst;
        missing_ids.push_back(inst.id);
      }
    for (const auto& s : data.inventory.senses)
      if (!cache.has_sense(word, s.id)) {
        ++missing_sense;
        missing_ids.push_back(word + "/sense/" + std::to_string(s.id));
      }
    gaps += missing_inst + missing_sense;
    std::snprintf(line, sizeof line, "  %-10s %8zu %8zu %8zu %8zu\n", word.c_str(), data.test.size(), missing_inst,
                  data.inventory.size(), missing_sense);
    std::cout << line;
  }
  std::cout << "missing:";
  for (const auto& id : missing_ids) std::cout << " " << id;
  std::cout << "\n";
  return gaps == 0 ? kOk : kCoverage;
}

int cmd_compare(const std::vector<std::string>& files) {
  std::vector<EvaluationReport> reports;
  for (const auto& f : files) reports.push_back(load_report(f));
  std::cout << format_comparison(compare_reports(reports));
  return kOk;
}

int cmd_plot(const std::string& method, const std::string& mfs, const std::string& ro, const std::string& out) {
  write_text(out, emit_plot_data(load_report(method), load_report(mfs), load_report(ro)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised word sense disambiguation by context-aware semantic similarity"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  auto* evaluate = app.add_subcommand("evaluate", "score a method on the test split and write a report");
  MethodFlags eval_flags;
  eval_flags.add(evaluate);
  bool require_full = false;
  std::string out_json, out_table;
  evaluate->add_flag("--require-full", require_full, "fail unless all 20 benchmark words are present");
  evaluate->add_option("--out-json", out_json, "report JSON path (default: stdout)");
  evaluate->add_option("--out-table", out_table, "plain-text report path");

  auto* disamb = app.add_subcommand("disambiguate", "predict the sense of one target word in a sentence");
  MethodFlags dis_flags;
  dis_flags.add(disamb);
  std::string sentence, word, query_id;
  std::size_t index = 0;
  disamb->add_option("--sentence", sentence, "whitespace-tokenized sentence")->required();
  disamb->add_option("--index", index, "0-based target token position")->required();
  disamb->add_option("--word", word, "target word (must have an inventory)")->required();
  disamb->add_option("--id", query_id, "instance id used for cache lookup (default <word>.query.1)");

  auto* info = app.add_subcommand("cache-info", "summarize and validate a contextual cache");
  std::string cache_path, info_dataset;
  std::vector<std::string> info_words;
  info->add_option("cache", cache_path, "cache file or directory")->required();
  info->add_option("--dataset", info_dataset, "report coverage against this dataset");
  info->add_option("--words", info_words, "restrict coverage to these words")->delimiter(',');

  auto* compare = app.add_subcommand("compare", "rank reports by global accuracy");
  std::vector<std::string> report_files;
  compare->add_option("reports", report_files, "report JSON files")->required();

  auto* plot = app.add_subcommand("plot", "per-word CSV of method, MFS and RO accuracy");
  std::string plot_method, plot_mfs, plot_ro, plot_out;
  plot->add_option("--method-report", plot_method)->required();
  plot->add_option("--mfs-report", plot_mfs)->required();
  plot->add_option("--ro-report", plot_ro)->required();
  plot->add_option("--out", plot_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*evaluate) return cmd_evaluate(eval_flags, require_full, out_json, out_table);
    if (*disamb) return cmd_disambiguate(dis_flags, sentence, index, word, query_id);
    if (*info) return cmd_cache_info(cache_path, info_dataset, info_words);
    if (*compare) return cmd_compare(report_files);
    if (*plot) return cmd_plot(plot_method, plot_mfs, plot_ro, plot_out);
  } catch (const Error& e) {
    log(std::string(to_string(e.kind())) + " error: " + e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    log(std::string("internal error: ") + e.what());
    return kInternal;
  }
  return kUsage;
}
