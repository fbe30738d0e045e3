#pragma once

// Run configuration for the command-line tool: defaults, JSON config file,
// environment and flags, resolved in that order of increasing precedence.

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "uwsd/uwsd.hpp"

namespace uwsd::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInput = 3,      // unreadable input
  kSchema = 4,     // malformed or inconsistent input
  kCoverage = 5,   // strict mode, some instances could not be scored
  kNumeric = 6,    // solver failure
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kInput;
    case ErrorKind::parse:
    case ErrorKind::schema: return kSchema;
    case ErrorKind::coverage: return kCoverage;
    case ErrorKind::usage: return kUsage;
    case ErrorKind::numeric: return kNumeric;
  }
  return kInternal;
}

inline constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success, complete report written\n"
    "  1  internal error\n"
    "  2  usage or configuration error\n"
    "  3  input file missing or unreadable\n"
    "  4  malformed or inconsistent input\n"
    "  5  strict mode: instances could not be scored (report written, misses counted)\n"
    "  6  numeric failure in the transport solver\n"
    "Environment: UWSD_DATASET_ROOT, UWSD_CACHE_DIR\n";

inline const std::vector<std::string> kMethods = {"cosine-cache", "cosine-static", "wmd", "mfs", "random",
                                                  "random-expected"};

struct RunConfig {
  std::string dataset;
  std::string method;
  std::vector<std::string> cache;  // files or directories of *.jsonl
  std::string vectors;
  std::string overrides;
  std::string pooling = "uniform";
  std::string projection;          // JSON array file, softmax pooling
  std::vector<double> layer_weights;
  double gamma = 1.0;
  std::optional<std::size_t> window;
  std::optional<std::uint64_t> seed;
  bool strict = true;
  bool require_full = false;
  std::vector<std::string> words;
  unsigned jobs = 0;
  std::string strategy;
  std::string out_json;
  std::string out_table;

  // Keys mirror the long flag names with '-' replaced by '_'.
  void apply_json(const nlohmann::json& j) {
    auto str = [&](const char* key, std::string& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    str("dataset", dataset);
    str("method", method);
    str("vectors", vectors);
    str("overrides", overrides);
    str("pooling", pooling);
    str("projection", projection);
    str("strategy", strategy);
    str("out_json", out_json);
    str("out_table", out_table);
    if (j.contains("cache")) {
      const auto& c = j.at("cache");
      cache = c.is_array() ? c.get<std::vector<std::string>>() : std::vector<std::string>{c.get<std::string>()};
    }
    if (j.contains("layer_weights")) layer_weights = j.at("layer_weights").get<std::vector<double>>();
    if (j.contains("gamma")) gamma = j.at("gamma").get<double>();
    if (j.contains("window")) window = j.at("window").get<std::size_t>();
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("strict")) strict = j.at("strict").get<bool>();
    if (j.contains("require_full")) require_full = j.at("require_full").get<bool>();
    if (j.contains("words")) words = j.at("words").get<std::vector<std::string>>();
    if (j.contains("jobs")) jobs = j.at("jobs").get<unsigned>();
  }

  void apply_json_file(const std::string& path) {
    const std::string text = uwsd::detail::read_file(path);
    try {
      apply_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::usage, "config file " + path + ": " + e.what());
    }
  }

  void apply_environment() {
    if (const char* root = std::getenv("UWSD_DATASET_ROOT"); root && *root) dataset = root;
    if (const char* dir = std::getenv("UWSD_CACHE_DIR"); dir && *dir) cache = {dir};
  }

  void validate() const {
    if (method.empty()) throw Error(ErrorKind::usage, "--method is required");
    if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end())
      throw Error(ErrorKind::usage, "unknown method '" + method + "'");
    if (dataset.empty()) throw Error(ErrorKind::usage, "--dataset is required (or set UWSD_DATASET_ROOT)");
    if ((method == "wmd" || method == "cosine-static") && vectors.empty())
      throw Error(ErrorKind::usage, "--method " + method + " requires --vectors");
    if (method == "cosine-cache" && cache.empty())
      throw Error(ErrorKind::usage, "--method cosine-cache requires --cache (or set UWSD_CACHE_DIR)");
    if (method == "random" && !seed) throw Error(ErrorKind::usage, "--method random requires --seed");
    if (pooling != "uniform" && pooling != "softmax")
      throw Error(ErrorKind::usage, "--pooling must be 'uniform' or 'softmax'");
    if (pooling == "softmax" && projection.empty())
      throw Error(ErrorKind::usage, "--pooling softmax requires --projection");
    if (!layer_weights.empty()) LayerMix{gamma, layer_weights}.validate();
  }

  // Everything that determines the result; excludes output paths and jobs.
  nlohmann::json fingerprint() const {
    nlohmann::json j = {{"method", method}, {"strict", strict}};
    if (!words.empty()) j["words"] = words;
    if (!overrides.empty()) j["overrides"] = overrides;
    if (method == "random") j["seed"] = *seed;
    if (method == "wmd" || method == "cosine-static") {
      j["vectors"] = vectors;
      if (window) j["window"] = *window;
    }
    if (method == "cosine-static") {
      j["pooling"] = pooling;
      if (!projection.empty()) j["projection"] = projection;
    }
    if (method == "cosine-cache") {
      j["cache"] = cache;
      if (!layer_weights.empty()) j["layer_weights"] = layer_weights;
      j["gamma"] = gamma;
    }
    return j;
  }

  std::string default_strategy(const std::string& cache_model) const {
    if (method == "mfs") return "MFS-Baseline";
    if (method == "random-expected") return "RO-Baseline";
    if (method == "random") return "RO-Random(seed=" + std::to_string(*seed) + ")";
    if (method == "wmd") return "UWSD+WMD";
    if (method == "cosine-static") return "UWSD+static-mean";
    return "UWSD+" + (cache_model.empty() ? std::string("cache") : cache_model);
  }
};

inline std::optional<std::vector<std::string>> word_filter(const RunConfig& cfg) {
  if (cfg.words.empty()) return std::nullopt;
  return cfg.words;
}

inline Dataset load_configured_dataset(const RunConfig& cfg) {
  Dataset ds = load_dataset(cfg.dataset, word_filter(cfg), LoadOptions{cfg.require_full && cfg.words.empty()});
  if (!cfg.overrides.empty()) apply_overrides(ds, load_overrides(cfg.overrides));
  return ds;
}

// Every surface and lowercase token of the dataset and its descriptors; used
// to keep only the needed rows of a large vector file.
inline std::unordered_set<std::string> dataset_vocabulary(const Dataset& ds) {
  std::unordered_set<std::string> vocab;
  auto add = [&](const std::string& t) {
    vocab.insert(t);
    vocab.insert(to_lower(t));
  };
  for (const auto& [_, data] : ds.words) {
    for (const auto& s : data.inventory.senses)
      for (const auto& t : descriptor_tokens(s.descriptor)) add(t);
    for (Split split : {Split::train, Split::test})
      for (const auto& inst : data.instances(split))
        for (const auto& t : inst.tokens) add(t);
  }
  return vocab;
}

inline EmbedConfig embed_config(const RunConfig& cfg) {
  EmbedConfig ec;
  ec.window = cfg.window;
  if (cfg.pooling == "softmax") {
    ec.pooling.mode = PoolingWeights::Mode::softmax;
    const std::string text = uwsd::detail::read_file(cfg.projection);
    try {
      ec.pooling.projection = nlohmann::json::parse(text).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw file_error(ErrorKind::parse, cfg.projection, 0, std::string("projection must be a JSON array: ") + e.what());
    }
  }
  if (!cfg.layer_weights.empty()) ec.mix = LayerMix{cfg.gamma, cfg.layer_weights};
  return ec;
}

struct BuiltPredictor {
  Predictor predictor;
  std::string strategy;
  std::string cache_model;
};

// Loads whatever the method needs. `extra_vocabulary` widens the vector-file
// filter for ad-hoc sentences.
inline BuiltPredictor build_predictor(const RunConfig& cfg, const Dataset& ds,
                                      const std::vector<std::string>& extra_vocabulary = {}) {
  BuiltPredictor out;
  EmbedConfig ec = embed_config(cfg);
  if (cfg.method == "mfs") {
    out.predictor = mfs_predictor(fit_mfs(ds));
  } else if (cfg.method == "random" || cfg.method == "random-expected") {
    out.predictor = random_predictor(cfg.seed.value_or(0));
  } else if (cfg.method == "wmd" || cfg.method == "cosine-static") {
    auto vocab = dataset_vocabulary(ds);
    for (const auto& t : extra_vocabulary) {
      vocab.insert(t);
      vocab.insert(to_lower(t));
    }
    auto table = std::make_shared<const WordVectorTable>(load_word_vectors(cfg.vectors, &vocab));
    out.predictor = similarity_predictor(cfg.method == "wmd" ? SimilarityMeasure::wmd(table, ec)
                                                             : SimilarityMeasure::cosine_static(table, ec));
  } else {
    ContextualCache merged;
    for (const auto& path : cfg.cache) merged.merge(load_cache_dir(path));
    if (!ec.mix && cfg.gamma != 1.0) ec.mix = LayerMix{cfg.gamma, LayerMix::uniform(merged.layers).layer_weights};
    if (ec.mix && ec.mix->layer_weights.size() != merged.layers)
      throw Error(ErrorKind::usage, "--layer-weights has " + std::to_string(ec.mix->layer_weights.size()) +
                                        " entries but the cache has " + std::to_string(merged.layers) + " layers");
    out.cache_model = merged.model;
    auto cache = std::make_shared<const ContextualCache>(std::move(merged));
    out.predictor = similarity_predictor(SimilarityMeasure::cosine_cache(cache, ec));
  }
  out.strategy = cfg.strategy.empty() ? cfg.default_strategy(out.cache_model) : cfg.strategy;
  return out;
}

}  // namespace uwsd::cli
