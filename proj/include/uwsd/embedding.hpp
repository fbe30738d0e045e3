#pragma once

// Vector providers for contexts and sense descriptors: a static word-vector
// table and a precomputed contextual cache, plus token pooling and layer mixing.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uwsd/dataset.hpp"
#include "uwsd/error.hpp"
#include "uwsd/util.hpp"

namespace uwsd {

using Vector = std::vector<double>;

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Static word vectors

class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw Error(ErrorKind::schema, "word vector dimension must be positive");
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }

  // Returns false when the word is already present (the first entry wins).
  bool add(std::string word, Vector vec) {
    if (vec.size() != dimension_)
      throw Error(ErrorKind::schema, "vector for '" + word + "' has dimension " + std::to_string(vec.size()) +
                                         ", expected " + std::to_string(dimension_));
    if (!all_finite(vec)) throw Error(ErrorKind::numeric, "vector for '" + word + "' has non-finite components");
    return entries_.emplace(std::move(word), std::move(vec)).second;
  }

  // Key under which a token is stored: its lowercase form first, then the
  // surface form.
  std::optional<std::string> resolve(std::string_view token) const {
    std::string lower = to_lower(token);
    if (entries_.count(lower)) return lower;
    std::string surface(token);
    if (entries_.count(surface)) return surface;
    return std::nullopt;
  }

  const Vector* find(std::string_view token) const {
    auto key = resolve(token);
    return key ? &entries_.at(*key) : nullptr;
  }

  const Vector& at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(ErrorKind::coverage, "no vector for '" + key + "'");
    return it->second;
  }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, Vector> entries_;
};

// Text format: optional "<count> <dimension>" header, then "<word> <f1> ... <fD>".
// With a vocabulary, only rows whose word (or its lowercase form) is in it are kept.
inline WordVectorTable load_word_vectors(const fs::path& file,
                                         const std::unordered_set<std::string>* vocabulary = nullptr) {
  std::ifstream in(file);
  if (!in) throw file_error(ErrorKind::io, file, 0, "cannot open word vector file");

  std::optional<WordVectorTable> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = strip_cr(line);
    auto fields = split_whitespace(view);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2 && parse_int<std::size_t>(fields[0]) &&
        parse_int<std::size_t>(fields[1])) {
      table.emplace(*parse_int<std::size_t>(fields[1]));
      continue;
    }
    if (fields.size() < 2) throw file_error(ErrorKind::parse, file, lineno, "expected a word followed by components");
    if (!table) table.emplace(fields.size() - 1);
    if (fields.size() - 1 != table->dimension())
      throw file_error(ErrorKind::parse, file, lineno,
                       "expected " + std::to_string(table->dimension()) + " components, found " +
                           std::to_string(fields.size() - 1));
    if (vocabulary && !vocabulary->count(fields[0]) && !vocabulary->count(to_lower(fields[0]))) continue;
    Vector vec;
    vec.reserve(table->dimension());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = parse_double(fields[i]);
      if (!v || !std::isfinite(*v))
        throw file_error(ErrorKind::parse, file, lineno, "bad component '" + fields[i] + "'");
      vec.push_back(*v);
    }
    table->add(std::move(fields[0]), std::move(vec));
  }
  if (!table) throw file_error(ErrorKind::parse, file, 0, "no vectors found");
  return std::move(*table);
}

// ---------------------------------------------------------------------------
// Contextual cache

struct ContextualCache {
  using LayerVectors = std::vector<Vector>;

  std::string model;
  std::size_t dimension = 0;
  std::size_t layers = 1;
  nlohmann::json metadata = nlohmann::json::object();  // extra header fields
  std::map<std::string, LayerVectors> instance_vectors;
  std::map<std::pair<std::string, int>, LayerVectors> sense_vectors;

  void check(const LayerVectors& vectors, const std::string& what) const {
    if (vectors.size() != layers)
      throw Error(ErrorKind::schema, what + ": expected " + std::to_string(layers) + " layer vectors, found " +
                                         std::to_string(vectors.size()));
    for (const auto& v : vectors) {
      if (v.size() != dimension)
        throw Error(ErrorKind::schema, what + ": vector length " + std::to_string(v.size()) + ", expected " +
                                           std::to_string(dimension));
      if (!all_finite(v)) throw Error(ErrorKind::numeric, what + ": non-finite component");
    }
  }

  void add_instance(const std::string& id, LayerVectors vectors) {
    check(vectors, "instance '" + id + "'");
    instance_vectors[id] = std::move(vectors);
  }

  void add_sense(const std::string& word, int sense_id, LayerVectors vectors) {
    check(vectors, "sense " + word + "/" + std::to_string(sense_id));
    sense_vectors[{word, sense_id}] = std::move(vectors);
  }

  bool has_instance(const std::string& id) const { return instance_vectors.count(id) > 0; }
  bool has_sense(const std::string& word, int sense_id) const {
    return sense_vectors.count({word, sense_id}) > 0;
  }

  const LayerVectors& instance(const std::string& id) const {
    auto it = instance_vectors.find(id);
    if (it == instance_vectors.end()) throw Error(ErrorKind::coverage, "cache has no entry for instance '" + id + "'");
    return it->second;
  }

  const LayerVectors& sense(const std::string& word, int sense_id) const {
    auto it = sense_vectors.find({word, sense_id});
    if (it == sense_vectors.end())
      throw Error(ErrorKind::coverage,
                  "cache has no entry for sense " + std::to_string(sense_id) + " of '" + word + "'");
    return it->second;
  }

  // Combines another file's entries; headers must agree on model, dimension and layers.
  void merge(const ContextualCache& other) {
    if (instance_vectors.empty() && sense_vectors.empty() && model.empty()) {
      *this = other;
      return;
    }
    if (other.dimension != dimension || other.layers != layers || other.model != model)
      throw Error(ErrorKind::schema, "cache headers disagree: " + model + "/" + std::to_string(dimension) + "/" +
                                         std::to_string(layers) + " vs " + other.model + "/" +
                                         std::to_string(other.dimension) + "/" + std::to_string(other.layers));
    for (const auto& [k, v] : other.instance_vectors) instance_vectors[k] = v;
    for (const auto& [k, v] : other.sense_vectors) sense_vectors[k] = v;
  }
};

namespace detail {

inline ContextualCache::LayerVectors parse_layer_vectors(const nlohmann::json& j, const fs::path& file,
                                                         std::size_t lineno) {
  if (!j.is_array()) throw file_error(ErrorKind::schema, file, lineno, "'vectors' must be an array of arrays");
  ContextualCache::LayerVectors out;
  for (const auto& layer : j) {
    if (!layer.is_array()) throw file_error(ErrorKind::schema, file, lineno, "'vectors' must be an array of arrays");
    Vector v;
    v.reserve(layer.size());
    for (const auto& x : layer) {
      if (!x.is_number()) throw file_error(ErrorKind::schema, file, lineno, "non-numeric vector component");
      v.push_back(x.get<double>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

// JSON Lines: a header object, then one instance or sense entry per line.
inline ContextualCache load_cache(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw file_error(ErrorKind::io, file, 0, "cannot open cache file");

  ContextualCache cache;
  bool have_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = strip_cr(line);
    if (split_whitespace(view).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(view);
    } catch (const nlohmann::json::parse_error&) {
      throw file_error(ErrorKind::parse, file, lineno, "malformed JSON line");
    }
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
      throw file_error(ErrorKind::schema, file, lineno, "entry must be an object with a string 'kind'");
    const std::string kind = j["kind"];

    try {
      if (!have_header) {
        if (kind != "header") throw file_error(ErrorKind::schema, file, lineno, "first entry must be the header");
        if (!j.contains("dimension") || !j["dimension"].is_number_unsigned() || j["dimension"].get<std::size_t>() == 0)
          throw file_error(ErrorKind::schema, file, lineno, "header needs a positive integer 'dimension'");
        if (!j.contains("layers") || !j["layers"].is_number_unsigned() || j["layers"].get<std::size_t>() == 0)
          throw file_error(ErrorKind::schema, file, lineno, "header needs a positive integer 'layers'");
        cache.model = j.value("model", std::string{});
        cache.dimension = j["dimension"];
        cache.layers = j["layers"];
        for (const auto& [k, v] : j.items())
          if (k != "kind" && k != "model" && k != "dimension" && k != "layers") cache.metadata[k] = v;
        have_header = true;
      } else if (kind == "instance") {
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("vectors"))
          throw file_error(ErrorKind::schema, file, lineno, "instance entry needs 'id' and 'vectors'");
        cache.add_instance(j["id"], detail::parse_layer_vectors(j["vectors"], file, lineno));
      } else if (kind == "sense") {
        if (!j.contains("word") || !j["word"].is_string() || !j.contains("sense_id") ||
            !j["sense_id"].is_number_integer() || !j.contains("vectors"))
          throw file_error(ErrorKind::schema, file, lineno, "sense entry needs 'word', 'sense_id' and 'vectors'");
        cache.add_sense(j["word"], j["sense_id"].get<int>(), detail::parse_layer_vectors(j["vectors"], file, lineno));
      } else {
        throw file_error(ErrorKind::schema, file, lineno, "unknown entry kind '" + kind + "'");
      }
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with(file.string())) throw;
      throw file_error(e.kind(), file, lineno, e.what());
    }
  }
  if (!have_header) throw file_error(ErrorKind::schema, file, 0, "missing header line");
  return cache;
}

// All *.jsonl files in a directory, merged in filename order.
inline ContextualCache load_cache_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) return load_cache(dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw file_error(ErrorKind::io, dir, 0, "no .jsonl cache files");
  ContextualCache out;
  for (const auto& f : files) out.merge(load_cache(f));
  return out;
}

inline void write_cache(const ContextualCache& cache, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw file_error(ErrorKind::io, file, 0, "cannot write cache file");
  nlohmann::ordered_json header = {{"kind", "header"}, {"model", cache.model},
                                   {"dimension", cache.dimension}, {"layers", cache.layers}};
  for (const auto& [k, v] : cache.metadata.items()) header[k] = v;
  out << header.dump() << '\n';
  for (const auto& [id, vectors] : cache.instance_vectors) {
    nlohmann::ordered_json j = {{"kind", "instance"}, {"id", id}, {"vectors", vectors}};
    out << j.dump() << '\n';
  }
  for (const auto& [key, vectors] : cache.sense_vectors) {
    nlohmann::ordered_json j = {{"kind", "sense"}, {"word", key.first}, {"sense_id", key.second}, {"vectors", vectors}};
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Pooling and layer mixing

struct PoolingWeights {
  enum class Mode { uniform, softmax };
  Mode mode = Mode::uniform;
  Vector projection;  // scoring vector for softmax mode
};

struct LayerMix {
  double gamma = 1.0;
  Vector layer_weights;

  static LayerMix uniform(std::size_t layers) {
    return {1.0, Vector(layers, 1.0 / static_cast<double>(layers))};
  }

  void validate() const {
    if (!std::isfinite(gamma)) throw Error(ErrorKind::usage, "layer mix gamma must be finite");
    if (layer_weights.empty()) throw Error(ErrorKind::usage, "layer mix needs at least one weight");
    double sum = 0.0;
    for (double w : layer_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::usage, "layer weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::usage, "layer weights must sum to 1");
  }
};

namespace detail {

inline void check_same_dimension(std::span<const Vector> vectors, const char* op) {
  if (vectors.empty()) throw Error(ErrorKind::usage, std::string(op) + ": empty vector list");
  const std::size_t d = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != d) throw Error(ErrorKind::schema, std::string(op) + ": dimension mismatch");
}

}  // namespace detail

inline Vector mean_pool(std::span<const Vector> vectors) {
  detail::check_same_dimension(vectors, "mean_pool");
  Vector out(vectors.front().size(), 0.0);
  for (const auto& v : vectors)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
  const double n = static_cast<double>(vectors.size());
  for (double& x : out) x /= n;
  return out;
}

// alpha_i = exp(w.h_i) / sum_j exp(w.h_j), evaluated with the max logit
// subtracted so large scores do not overflow.
inline Vector softmax_weights(std::span<const Vector> vectors, std::span<const double> projection) {
  detail::check_same_dimension(vectors, "softmax_weights");
  if (projection.size() != vectors.front().size())
    throw Error(ErrorKind::schema, "pooling projection has dimension " + std::to_string(projection.size()) +
                                       ", tokens have " + std::to_string(vectors.front().size()));
  Vector logits(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    double dot = 0.0;
    for (std::size_t k = 0; k < projection.size(); ++k) dot += projection[k] * vectors[i][k];
    logits[i] = dot;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) total += (l = std::exp(l - top));
  for (double& l : logits) l /= total;
  return logits;
}

// S = (1/n) sum_i alpha_i h_i. The 1/n factor is kept even though the
// weights already sum to one; cosine scoring is unaffected by the scale.
inline Vector weighted_pool(std::span<const Vector> vectors, const PoolingWeights& weights) {
  detail::check_same_dimension(vectors, "weighted_pool");
  const std::size_t n = vectors.size();
  Vector alpha = weights.mode == PoolingWeights::Mode::softmax
                     ? softmax_weights(vectors, weights.projection)
                     : Vector(n, 1.0 / static_cast<double>(n));
  Vector out(vectors.front().size(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += alpha[i] * vectors[i][k];
  for (double& x : out) x /= static_cast<double>(n);
  return out;
}

// gamma * sum_j weight_j * layer_j
inline Vector mix_layers(std::span<const Vector> per_layer, const LayerMix& mix) {
  mix.validate();
  detail::check_same_dimension(per_layer, "mix_layers");
  if (per_layer.size() != mix.layer_weights.size())
    throw Error(ErrorKind::schema, "mix_layers: " + std::to_string(per_layer.size()) + " layers but " +
                                       std::to_string(mix.layer_weights.size()) + " weights");
  Vector out(per_layer.front().size(), 0.0);
  for (std::size_t j = 0; j < per_layer.size(); ++j)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += mix.layer_weights[j] * per_layer[j][k];
  for (double& x : out) x *= mix.gamma;
  return out;
}

// ---------------------------------------------------------------------------
// Context and sense embedding

struct EmbedConfig {
  PoolingWeights pooling;
  std::optional<LayerMix> mix;          // cache provider; uniform over layers when unset
  std::optional<std::size_t> window;    // tokens on each side of the target; whole sentence when unset
};

// Tokens of the instance that form its context.
inline std::vector<std::string> context_tokens(const Instance& instance, std::optional<std::size_t> window) {
  if (!window) return instance.tokens;
  const std::size_t lo = instance.target_index > *window ? instance.target_index - *window : 0;
  const std::size_t hi = std::min(instance.tokens.size(), instance.target_index + *window + 1);
  return {instance.tokens.begin() + static_cast<std::ptrdiff_t>(lo),
          instance.tokens.begin() + static_cast<std::ptrdiff_t>(hi)};
}

// Pools the in-vocabulary tokens of a text. Unknown tokens are skipped; a
// text with no known token is an error.
inline Vector embed_text(std::span<const std::string> tokens, const WordVectorTable& table,
                         const EmbedConfig& config = {}) {
  std::vector<Vector> known;
  for (const auto& t : tokens)
    if (const Vector* v = table.find(t)) known.push_back(*v);
  if (known.empty()) throw Error(ErrorKind::coverage, "no in-vocabulary tokens");
  if (config.pooling.mode == PoolingWeights::Mode::uniform) return mean_pool(known);
  return weighted_pool(known, config.pooling);
}

inline Vector mix_cached(const ContextualCache::LayerVectors& vectors, const ContextualCache& cache,
                         const EmbedConfig& config) {
  const LayerMix mix = config.mix.value_or(LayerMix::uniform(cache.layers));
  return mix_layers(vectors, mix);
}

inline Vector embed_context(const Instance& instance, const WordVectorTable& table, const EmbedConfig& config = {}) {
  try {
    const auto tokens = context_tokens(instance, config.window);
    return embed_text(tokens, table, config);
  } catch (const Error& e) {
    throw Error(e.kind(), "context of " + instance.id + ": " + e.what());
  }
}

inline Vector embed_context(const Instance& instance, const ContextualCache& cache, const EmbedConfig& config = {}) {
  return mix_cached(cache.instance(instance.id), cache, config);
}

inline Vector embed_sense(const std::string& word, int sense_id, const SenseInventory& inventory,
                          const WordVectorTable& table, const EmbedConfig& config = {}) {
  const Sense& sense = inventory.sense(sense_id);
  try {
    const auto tokens = descriptor_tokens(sense.descriptor);
    return embed_text(tokens, table, config);
  } catch (const Error& e) {
    throw Error(e.kind(), "descriptor '" + sense.descriptor + "' of " + word + "/" + std::to_string(sense_id) +
                              ": " + e.what());
  }
}

inline Vector embed_sense(const std::string& word, int sense_id, const SenseInventory& inventory,
                          const ContextualCache& cache, const EmbedConfig& config = {}) {
  inventory.sense(sense_id);
  return mix_cached(cache.sense(word, sense_id), cache, config);
}

}  // namespace uwsd
