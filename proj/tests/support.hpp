#pragma once

// Shared helpers for the test binaries: temporary directories, synthetic
// datasets and caches, random generators.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "uwsd/uwsd.hpp"

#ifndef UWSD_TEST_DATA_DIR
#define UWSD_TEST_DATA_DIR "tests/data"
#endif

namespace uwsd::test {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(UWSD_TEST_DATA_DIR); }

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("uwsd-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t dim, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(dim);
  for (double& x : v) x = u(rng);
  return v;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (double& x : w) s += (x = u(rng));
  for (double& x : w) x /= s;
  return w;
}

// A dataset with the given sense counts per word; tokens come from a small
// vocabulary and golds are drawn at random. Every sense appears in training.
inline Dataset synthetic_dataset(std::mt19937_64& rng, const std::vector<std::pair<std::string, int>>& words,
                                 std::size_t train_per_word, std::size_t test_per_word) {
  static const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "river", "money",
                                                 "stone", "music", "fish", "tree", "road", "light"};
  std::uniform_int_distribution<std::size_t> len(1, 8), pick(0, vocab.size() - 1);
  Dataset ds;
  for (const auto& [word, k] : words) {
    WordData data;
    data.inventory.target_word = word;
    for (int s = 0; s < k; ++s) data.inventory.senses.push_back({s, word + "_sense_" + std::to_string(s), {}});
    data.inventory = build_sense_descriptors(data.inventory);
    std::uniform_int_distribution<int> gold(0, k - 1);
    for (Split split : {Split::train, Split::test}) {
      const std::size_t count = split == Split::train ? train_per_word : test_per_word;
      for (std::size_t line = 1; line <= count; ++line) {
        Instance inst;
        inst.id = word + "." + to_string(split) + "." + std::to_string(line);
        inst.target_word = word;
        inst.split = split;
        const std::size_t n = len(rng);
        for (std::size_t t = 0; t < n; ++t) inst.tokens.push_back(vocab[pick(rng)]);
        std::uniform_int_distribution<std::size_t> at(0, n - 1);
        inst.target_index = at(rng);
        inst.tokens[inst.target_index] = word;
        inst.gold_sense = split == Split::train && line <= static_cast<std::size_t>(k) ? static_cast<int>(line - 1)
                                                                                       : gold(rng);
        (split == Split::train ? data.train : data.test).push_back(std::move(inst));
      }
    }
    ds.words.emplace(word, std::move(data));
  }
  return ds;
}

}  // namespace uwsd::test
