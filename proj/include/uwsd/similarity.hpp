#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uwsd/dataset.hpp"
#include "uwsd/embedding.hpp"
#include "uwsd/error.hpp"
#include "uwsd/transport.hpp"

namespace uwsd {

inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw Error(ErrorKind::schema, "cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                                       std::to_string(v.size()) + ")");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) throw Error(ErrorKind::numeric, "cosine: zero-norm vector");
  const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

enum class MeasureKind { cosine_static_mean, cosine_cache, wmd };

inline const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::cosine_static_mean: return "cosine_static_mean";
    case MeasureKind::cosine_cache: return "cosine_cache";
    case MeasureKind::wmd: return "wmd";
  }
  return "unknown";
}

struct Score {
  double value = 0.0;
  MeasureKind kind = MeasureKind::cosine_cache;
};

// f(context, w1, w2): a similarity function bound to the provider it needs.
// Cheap to copy; providers are shared and immutable.
class SimilarityMeasure {
 public:
  static SimilarityMeasure cosine_static(std::shared_ptr<const WordVectorTable> table, EmbedConfig config = {}) {
    if (!table) throw Error(ErrorKind::usage, "cosine_static_mean needs a word vector table");
    SimilarityMeasure m(MeasureKind::cosine_static_mean, std::move(config));
    m.table_ = std::move(table);
    return m;
  }

  static SimilarityMeasure cosine_cache(std::shared_ptr<const ContextualCache> cache, EmbedConfig config = {}) {
    if (!cache) throw Error(ErrorKind::usage, "cosine_cache needs a contextual cache");
    if (config.mix && config.mix->layer_weights.size() != cache->layers)
      throw Error(ErrorKind::usage, "layer mix has " + std::to_string(config.mix->layer_weights.size()) +
                                        " weights but the cache has " + std::to_string(cache->layers) + " layers");
    SimilarityMeasure m(MeasureKind::cosine_cache, std::move(config));
    m.cache_ = std::move(cache);
    return m;
  }

  static SimilarityMeasure wmd(std::shared_ptr<const WordVectorTable> table, EmbedConfig config = {}) {
    if (!table) throw Error(ErrorKind::usage, "wmd needs a word vector table");
    SimilarityMeasure m(MeasureKind::wmd, std::move(config));
    m.table_ = std::move(table);
    return m;
  }

  MeasureKind kind() const { return kind_; }
  const EmbedConfig& config() const { return config_; }
  const WordVectorTable* table() const { return table_.get(); }
  const ContextualCache* cache() const { return cache_.get(); }

  // Similarity between two arbitrary token sequences. Not available for the
  // cache kind, whose vectors are keyed by instance and sense.
  double texts(std::span<const std::string> a, std::span<const std::string> b) const {
    switch (kind_) {
      case MeasureKind::cosine_static_mean:
        return cosine(embed_text(a, *table_, config_), embed_text(b, *table_, config_));
      case MeasureKind::wmd:
        return wmd_similarity(build_nbow(a, *table_), build_nbow(b, *table_));
      case MeasureKind::cosine_cache:
        break;
    }
    throw Error(ErrorKind::usage, "cosine_cache cannot score free text");
  }

 private:
  SimilarityMeasure(MeasureKind kind, EmbedConfig config) : kind_(kind), config_(std::move(config)) {}

  MeasureKind kind_;
  EmbedConfig config_;
  std::shared_ptr<const WordVectorTable> table_;
  std::shared_ptr<const ContextualCache> cache_;
};

// Similarity between an occurrence (its sentence context) and one candidate
// sense descriptor.
inline Score score(const SimilarityMeasure& measure, const Instance& instance, const std::string& word,
                   int sense_id, const SenseInventory& inventory) {
  try {
    Score s{0.0, measure.kind()};
    switch (measure.kind()) {
      case MeasureKind::cosine_static_mean:
        s.value = cosine(embed_context(instance, *measure.table(), measure.config()),
                         embed_sense(word, sense_id, inventory, *measure.table(), measure.config()));
        break;
      case MeasureKind::cosine_cache:
        s.value = cosine(embed_context(instance, *measure.cache(), measure.config()),
                         embed_sense(word, sense_id, inventory, *measure.cache(), measure.config()));
        break;
      case MeasureKind::wmd: {
        const auto context = context_tokens(instance, measure.config().window);
        const auto descriptor = descriptor_tokens(inventory.sense(sense_id).descriptor);
        s.value = wmd_similarity(build_nbow(context, *measure.table()), build_nbow(descriptor, *measure.table()));
        break;
      }
    }
    if (!std::isfinite(s.value)) throw Error(ErrorKind::numeric, "non-finite score");
    return s;
  } catch (const Error& e) {
    throw Error(e.kind(), "instance " + instance.id + ", sense " + std::to_string(sense_id) + ": " + e.what());
  }
}

}  // namespace uwsd
