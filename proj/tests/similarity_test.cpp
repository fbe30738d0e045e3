#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace {

using namespace uwsd;

// Per-sense scores on the mini set from an independent numpy/scipy
// implementation (HiGHS for the transport problem), frozen here.
struct Expected {
  const char* word;
  std::size_t index;
  double wmd[2];
  double cos[2];
};

const Expected kMini[] = {
    {"apple", 0, {-0.316096867491, -0.353517668123}, {0.984466670517, 0.924849129291}},
    {"apple", 1, {-0.384057287393, 0.0}, {0.871331689945, 1.000000000000}},
    {"apple", 2, {-0.157313218497, -0.495137535021}, {0.981922147018, 0.796647048045}},
    {"apple", 3, {-0.751796107542, -0.410640134018}, {0.575511569395, 0.876575325489}},
    {"bank", 0, {-0.345106831435, -0.603790471853}, {0.935340742442, 0.683866754670}},
    {"bank", 1, {-0.331494743785, -0.227490906450}, {0.948612109398, 0.981324799872}},
    {"bank", 2, {-0.449139734977, -0.803833163618}, {0.839096114073, 0.506015024496}},
    {"bank", 3, {-0.329596266073, -0.287789118956}, {0.933907623725, 0.966674079030}},
    {"bank", 4, {-0.335223598217, -0.316236359675}, {0.956530296024, 0.957595007623}},
};

std::shared_ptr<const WordVectorTable> vectors() {
  static auto t = std::make_shared<const WordVectorTable>(load_word_vectors(test::data_dir() / "vectors.txt"));
  return t;
}

TEST(Cosine, HandTable) {
  const Vector x = {1, 0}, y = {0, 1}, d = {1, 1}, neg = {-2, 0};
  EXPECT_DOUBLE_EQ(cosine(x, x), 1.0);
  EXPECT_DOUBLE_EQ(cosine(x, y), 0.0);
  EXPECT_NEAR(cosine(x, d), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(cosine(x, neg), -1.0);
}

TEST(Cosine, MatchesLongDoubleOracleAndIsScaleInvariant) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 1 + trial % 9;
    auto u = test::random_vector(rng, dim), v = test::random_vector(rng, dim);
    long double dot = 0, uu = 0, vv = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      dot += static_cast<long double>(u[k]) * v[k];
      uu += static_cast<long double>(u[k]) * u[k];
      vv += static_cast<long double>(v[k]) * v[k];
    }
    const double c = cosine(u, v);
    EXPECT_NEAR(c, static_cast<double>(dot / std::sqrt(uu * vv)), 1e-12);
    EXPECT_LE(std::abs(c), 1.0);
    EXPECT_DOUBLE_EQ(c, cosine(v, u));
    const double a = std::uniform_real_distribution<double>(0.01, 100)(rng);
    Vector su = u;
    for (double& x : su) x *= a;
    EXPECT_NEAR(cosine(su, v), c, 1e-12);
  }
}

TEST(Cosine, Errors) {
  ErrorKind kind{};
  try {
    cosine(Vector{0, 0}, Vector{1, 0});
  } catch (const Error& e) {
    kind = e.kind();
  }
  EXPECT_EQ(kind, ErrorKind::numeric);
  EXPECT_THROW(cosine(Vector{1}, Vector{1, 0}), Error);
}

TEST(Score, MiniStaticMeasuresMatchOracle) {
  auto ds = load_dataset(test::data_dir() / "mini");
  auto wmd = SimilarityMeasure::wmd(vectors());
  auto cos = SimilarityMeasure::cosine_static(vectors());
  for (const auto& e : kMini) {
    const auto& data = ds.word(e.word);
    const auto& inst = data.test.at(e.index);
    for (int s = 0; s < 2; ++s) {
      auto w = score(wmd, inst, e.word, s, data.inventory);
      EXPECT_EQ(w.kind, MeasureKind::wmd);
      EXPECT_NEAR(w.value, e.wmd[s], 1e-9) << inst.id << " sense " << s;
      EXPECT_NEAR(score(cos, inst, e.word, s, data.inventory).value, e.cos[s], 1e-9) << inst.id << " sense " << s;
    }
  }
}

TEST(Score, CacheMeasureUsesCachedVectors) {
  auto ds = load_dataset(test::data_dir() / "mini");
  auto cache = std::make_shared<const ContextualCache>(load_cache_dir(test::data_dir() / "cache"));
  auto m = SimilarityMeasure::cosine_cache(cache);
  const auto& bank = ds.word("bank");
  // bank.test.4 = (0.3, 0.7); senses are the unit axes.
  const double n = std::sqrt(0.3 * 0.3 + 0.7 * 0.7);
  EXPECT_NEAR(score(m, bank.test[3], "bank", 0, bank.inventory).value, 0.3 / n, 1e-12);
  EXPECT_NEAR(score(m, bank.test[3], "bank", 1, bank.inventory).value, 0.7 / n, 1e-12);
}

TEST(Score, CacheMissNamesInstanceAndSense) {
  auto ds = load_dataset(test::data_dir() / "mini");
  auto cache = std::make_shared<const ContextualCache>(load_cache(test::data_dir() / "partial_cache.jsonl"));
  auto m = SimilarityMeasure::cosine_cache(cache);
  const auto& bank = ds.word("bank");
  try {
    score(m, bank.test[1], "bank", 0, bank.inventory);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::coverage);
    EXPECT_NE(std::string(e.what()).find("bank.test.2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("sense 0"), std::string::npos);
  }
}

TEST(Score, CacheMixMustMatchLayers) {
  auto cache = std::make_shared<const ContextualCache>(load_cache_dir(test::data_dir() / "cache"));
  EmbedConfig ec;
  ec.mix = LayerMix{1.0, {0.5, 0.5}};
  EXPECT_THROW(SimilarityMeasure::cosine_cache(cache, ec), Error);
}

TEST(Texts, FreeTextScoring) {
  auto wmd = SimilarityMeasure::wmd(vectors());
  std::vector<std::string> a = {"river", "water"}, b = {"river", "water"}, c = {"money", "loan"};
  EXPECT_NEAR(wmd.texts(a, b), 0.0, 1e-12);
  EXPECT_GT(wmd.texts(a, b), wmd.texts(a, c));
  auto cos = SimilarityMeasure::cosine_static(vectors());
  EXPECT_NEAR(cos.texts(a, b), 1.0, 1e-12);
  auto cache = SimilarityMeasure::cosine_cache(std::make_shared<const ContextualCache>(
      load_cache_dir(test::data_dir() / "cache")));
  EXPECT_THROW(cache.texts(a, b), Error);
}

}  // namespace
