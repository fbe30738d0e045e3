#pragma once

// Sense selection: argmax over similarity scores, plus the most-frequent-sense
// and random-option baselines.

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "uwsd/dataset.hpp"
#include "uwsd/error.hpp"
#include "uwsd/similarity.hpp"
#include "uwsd/util.hpp"

namespace uwsd {

struct Prediction {
  std::string instance_id;
  int predicted_sense = 0;
  std::map<int, double> per_sense_scores;
  std::string strategy;
};

using Predictor = std::function<Prediction(const Instance&, const SenseInventory&)>;

// Highest score wins; exact ties go to the lowest sense id.
inline int select_sense(const std::map<int, double>& scores) {
  if (scores.empty()) throw Error(ErrorKind::usage, "no candidate senses to select from");
  auto best = scores.begin();
  for (auto it = std::next(scores.begin()); it != scores.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

inline Prediction disambiguate(const Instance& instance, const SenseInventory& inventory,
                               const SimilarityMeasure& measure, std::string strategy = {}) {
  if (inventory.size() < 2) throw Error(ErrorKind::schema, "word '" + inventory.target_word + "' has fewer than 2 senses");
  Prediction p;
  p.instance_id = instance.id;
  p.strategy = strategy.empty() ? to_string(measure.kind()) : std::move(strategy);
  for (const auto& sense : inventory.senses)
    p.per_sense_scores[sense.id] = score(measure, instance, inventory.target_word, sense.id, inventory).value;
  p.predicted_sense = select_sense(p.per_sense_scores);
  return p;
}

inline Predictor similarity_predictor(SimilarityMeasure measure, std::string strategy = {}) {
  return [measure = std::move(measure), strategy = std::move(strategy)](const Instance& inst,
                                                                        const SenseInventory& inv) {
    return disambiguate(inst, inv, measure, strategy);
  };
}

// ---------------------------------------------------------------------------
// Most frequent sense

struct MfsModel {
  std::map<std::string, std::vector<std::size_t>> frequencies;  // per word, indexed by sense id
  std::map<std::string, int> most_frequent;

  int sense_for(const std::string& word) const {
    auto it = most_frequent.find(word);
    if (it == most_frequent.end()) throw Error(ErrorKind::coverage, "no most-frequent sense for '" + word + "'");
    return it->second;
  }

  // Scores are the training frequencies, so the argmax rule reproduces the MFS.
  Prediction predict(const Instance& instance, const SenseInventory& inventory) const {
    const auto& freq = frequencies.at(inventory.target_word);
    Prediction p;
    p.instance_id = instance.id;
    p.strategy = "MFS-Baseline";
    for (const auto& sense : inventory.senses)
      p.per_sense_scores[sense.id] = static_cast<double>(freq.at(static_cast<std::size_t>(sense.id)));
    p.predicted_sense = sense_for(inventory.target_word);
    return p;
  }
};

inline MfsModel fit_mfs(const Dataset& dataset) {
  MfsModel model;
  for (const auto& [word, data] : dataset.words) {
    if (data.train.empty()) throw Error(ErrorKind::coverage, "word '" + word + "' has an empty training split");
    std::vector<std::size_t> freq(data.inventory.size(), 0);
    for (const auto& inst : data.train) {
      if (!inst.gold_sense) throw Error(ErrorKind::schema, "training instance " + inst.id + " has no gold sense");
      ++freq.at(static_cast<std::size_t>(*inst.gold_sense));
    }
    std::map<int, double> scores;
    for (std::size_t s = 0; s < freq.size(); ++s) scores[static_cast<int>(s)] = static_cast<double>(freq[s]);
    model.most_frequent[word] = select_sense(scores);
    model.frequencies[word] = std::move(freq);
  }
  return model;
}

inline Predictor mfs_predictor(MfsModel model) {
  return [model = std::move(model)](const Instance& inst, const SenseInventory& inv) { return model.predict(inst, inv); };
}

// ---------------------------------------------------------------------------
// Random option

// Uniform draw in [0, k) from a stream keyed by (seed, instance id), so the
// outcome does not depend on evaluation order or thread count.
inline int random_sense(std::uint64_t seed, const std::string& instance_id, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::usage, "random_sense: no senses");
  Fnv1a h;
  h.update(instance_id);
  std::uint64_t state = seed ^ h.digest();
  const std::uint64_t bound = static_cast<std::uint64_t>(k);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = splitmix64(state);
  } while (x >= limit);
  return static_cast<int>(x % bound);
}

inline Prediction predict_random(const Instance& instance, const SenseInventory& inventory, std::uint64_t seed) {
  if (inventory.size() < 2) throw Error(ErrorKind::schema, "word '" + inventory.target_word + "' has fewer than 2 senses");
  Prediction p;
  p.instance_id = instance.id;
  p.strategy = "RO-Random";
  p.predicted_sense = random_sense(seed, instance.id, inventory.size());
  for (const auto& sense : inventory.senses) p.per_sense_scores[sense.id] = sense.id == p.predicted_sense ? 1.0 : 0.0;
  return p;
}

inline Predictor random_predictor(std::uint64_t seed) {
  return [seed](const Instance& inst, const SenseInventory& inv) { return predict_random(inst, inv, seed); };
}

// sum_w n_w / k_w over sum_w n_w, on the test split. A fraction in [0, 1].
inline double expected_random_accuracy(const Dataset& dataset) {
  double expected_hits = 0.0;
  std::size_t total = 0;
  for (const auto& [_, data] : dataset.words) {
    expected_hits += static_cast<double>(data.test.size()) / static_cast<double>(data.inventory.size());
    total += data.test.size();
  }
  return total == 0 ? 0.0 : expected_hits / static_cast<double>(total);
}

}  // namespace uwsd
