#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace {

using namespace uwsd;
namespace fs = std::filesystem;

std::string error_of(const std::function<void()>& fn, ErrorKind* kind = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (kind) *kind = e.kind();
    return e.what();
  }
  return {};
}

TEST(WordVectors, LoadWithHeader) {
  auto t = load_word_vectors(test::data_dir() / "vectors.txt");
  EXPECT_EQ(t.dimension(), 3u);
  EXPECT_EQ(t.size(), 16u);
  ASSERT_NE(t.find("bank"), nullptr);
  EXPECT_EQ(*t.find("bank"), (Vector{0.5, 0.5, 0.1}));
  EXPECT_EQ(t.find("BANK"), t.find("bank"));
  EXPECT_EQ(t.find("zebra"), nullptr);
}

TEST(WordVectors, HeaderlessAndVocabularyFilter) {
  test::TempDir tmp;
  test::write_file(tmp / "v.txt", "Paris 1 2\nparis 3 4\nlondon 5 6\n");
  auto t = load_word_vectors(tmp / "v.txt");
  EXPECT_EQ(t.dimension(), 2u);
  EXPECT_EQ(*t.find("paris"), (Vector{3, 4}));
  EXPECT_EQ(*t.find("PARIS"), (Vector{3, 4}));  // lowercase first
  EXPECT_EQ(*t.find("Paris"), (Vector{3, 4}));

  std::unordered_set<std::string> vocab = {"london"};
  auto f = load_word_vectors(tmp / "v.txt", &vocab);
  EXPECT_EQ(f.size(), 1u);

  WordVectorTable only_surface(2);
  only_surface.add("Paris", {1, 2});
  EXPECT_EQ(*only_surface.find("Paris"), (Vector{1, 2}));
  EXPECT_EQ(only_surface.find("PARIS"), nullptr);
}

TEST(WordVectors, ErrorsCarryLineNumbers) {
  test::TempDir tmp;
  test::write_file(tmp / "v.txt", "2 2\na 1 2\nb 1\n");
  ErrorKind kind{};
  auto msg = error_of([&] { load_word_vectors(tmp / "v.txt"); }, &kind);
  EXPECT_EQ(kind, ErrorKind::parse);
  EXPECT_NE(msg.find("v.txt:3:"), std::string::npos) << msg;

  test::write_file(tmp / "v.txt", "a 1 nan\n");
  msg = error_of([&] { load_word_vectors(tmp / "v.txt"); });
  EXPECT_NE(msg.find("v.txt:1:"), std::string::npos) << msg;

  error_of([&] { load_word_vectors(tmp / "missing.txt"); }, &kind);
  EXPECT_EQ(kind, ErrorKind::io);
}

TEST(Pooling, MeanPoolHandValues) {
  std::vector<Vector> v = {{1, 2}, {3, 4}, {5, 0}};
  EXPECT_EQ(mean_pool(v), (Vector{3, 2}));
  std::vector<Vector> bad = {{1, 2}, {3}};
  EXPECT_THROW(mean_pool(bad), Error);
  EXPECT_THROW(mean_pool(std::vector<Vector>{}), Error);
}

TEST(Pooling, SoftmaxMatchesDirectFormula) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::size_t> n(1, 7), d(1, 6);
    const std::size_t count = n(rng), dim = d(rng);
    std::vector<Vector> h;
    for (std::size_t i = 0; i < count; ++i) h.push_back(test::random_vector(rng, dim, -3, 3));
    Vector w = test::random_vector(rng, dim, -2, 2);
    auto alpha = softmax_weights(h, w);
    long double z = 0;
    std::vector<long double> e(count);
    for (std::size_t i = 0; i < count; ++i) {
      long double dot = 0;
      for (std::size_t k = 0; k < dim; ++k) dot += static_cast<long double>(w[k]) * h[i][k];
      z += (e[i] = std::exp(dot));
    }
    double sum = 0;
    for (std::size_t i = 0; i < count; ++i) {
      EXPECT_NEAR(alpha[i], static_cast<double>(e[i] / z), 1e-12);
      EXPECT_GE(alpha[i], 0.0);
      sum += alpha[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);

    auto pooled = weighted_pool(h, PoolingWeights{PoolingWeights::Mode::softmax, w});
    for (std::size_t k = 0; k < dim; ++k) {
      long double s = 0;
      for (std::size_t i = 0; i < count; ++i) s += e[i] / z * h[i][k];
      EXPECT_NEAR(pooled[k], static_cast<double>(s / count), 1e-12);
    }
  }
}

TEST(Pooling, SoftmaxSurvivesHugeLogits) {
  std::vector<Vector> h = {{1000.0}, {1001.0}};
  auto alpha = softmax_weights(h, Vector{1.0});
  EXPECT_TRUE(all_finite(alpha));
  EXPECT_NEAR(alpha[1], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Pooling, SoftmaxIsShiftInvariant) {
  std::vector<Vector> h = {{1, 0}, {0, 1}, {2, 2}};
  Vector w = {0.3, -0.7};
  auto a = softmax_weights(h, w);
  // Adding the same vector to every token shifts all logits equally.
  std::vector<Vector> shifted = h;
  for (auto& v : shifted) {
    v[0] += 5;
    v[1] += 5;
  }
  auto b = softmax_weights(shifted, w);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Pooling, UniformWeightedPoolIsScaledMean) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<Vector> h;
    for (std::size_t i = 0; i < n; ++i) h.push_back(test::random_vector(rng, 4));
    auto pooled = weighted_pool(h, PoolingWeights{});
    auto mean = mean_pool(h);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(pooled[k], mean[k] / n, 1e-12);
  }
}

TEST(Pooling, ProjectionDimensionChecked) {
  std::vector<Vector> h = {{1, 2}};
  EXPECT_THROW(softmax_weights(h, Vector{1, 2, 3}), Error);
}

TEST(LayerMixing, MatchesWeightedSum) {
  std::vector<Vector> layers = {{1, 0}, {0, 2}, {4, 4}};
  LayerMix mix{2.0, {0.5, 0.25, 0.25}};
  auto out = mix_layers(layers, mix);
  EXPECT_NEAR(out[0], 2.0 * (0.5 + 1.0), 1e-12);
  EXPECT_NEAR(out[1], 2.0 * (0.5 + 1.0), 1e-12);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t L = 1 + trial % 5;
    std::vector<Vector> ls;
    for (std::size_t j = 0; j < L; ++j) ls.push_back(test::random_vector(rng, 3));
    LayerMix m{std::uniform_real_distribution<double>(-2, 2)(rng), test::random_simplex(rng, L)};
    auto got = mix_layers(ls, m);
    for (std::size_t k = 0; k < 3; ++k) {
      long double s = 0;
      for (std::size_t j = 0; j < L; ++j) s += static_cast<long double>(m.layer_weights[j]) * ls[j][k];
      EXPECT_NEAR(got[k], static_cast<double>(m.gamma * s), 1e-12);
    }
  }
}

TEST(LayerMixing, RejectsBadWeights) {
  std::vector<Vector> layers = {{1}, {2}};
  EXPECT_THROW(mix_layers(layers, LayerMix{1.0, {0.7, 0.7}}), Error);
  EXPECT_THROW(mix_layers(layers, LayerMix{1.0, {1.5, -0.5}}), Error);
  EXPECT_THROW(mix_layers(layers, LayerMix{1.0, {1.0}}), Error);
  EXPECT_THROW(mix_layers(layers, LayerMix{NAN, {0.5, 0.5}}), Error);
  EXPECT_NO_THROW(mix_layers(layers, LayerMix{1.0, {0.5, 0.5 + 1e-12}}));
}

TEST(Context, WindowClipsAroundTarget) {
  Instance inst;
  inst.tokens = {"a", "b", "c", "d", "e"};
  inst.target_index = 1;
  EXPECT_EQ(context_tokens(inst, std::nullopt), inst.tokens);
  EXPECT_EQ(context_tokens(inst, 1), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(context_tokens(inst, 0), (std::vector<std::string>{"b"}));
  EXPECT_EQ(context_tokens(inst, 10), inst.tokens);
}

TEST(Context, StaticEmbeddingSkipsOov) {
  WordVectorTable t(2);
  t.add("river", {1, 0});
  t.add("bank", {0, 1});
  Instance inst;
  inst.id = "bank.test.1";
  inst.tokens = {"the", "river", "bank", "xyz"};
  inst.target_index = 2;
  EXPECT_EQ(embed_context(inst, t), (Vector{0.5, 0.5}));
  inst.tokens = {"the", "xyz"};
  inst.target_index = 0;
  ErrorKind kind{};
  auto msg = error_of([&] { embed_context(inst, t); }, &kind);
  EXPECT_EQ(kind, ErrorKind::coverage);
  EXPECT_NE(msg.find("bank.test.1"), std::string::npos);
}

TEST(Context, SenseDescriptorEmbedding) {
  WordVectorTable t(2);
  t.add("bank", {1, 1});
  t.add("geography", {0, 3});
  SenseInventory inv{"bank", {{0, "bank", "bank"}, {1, "bank_(geography)", "bank (geography)"}}};
  EXPECT_EQ(embed_sense("bank", 1, inv, t), (Vector{0.5, 2.0}));
  EXPECT_THROW(embed_sense("bank", 2, inv, t), Error);
}

TEST(Cache, LoadsFixtures) {
  auto c = load_cache_dir(test::data_dir() / "cache");
  EXPECT_EQ(c.model, "synthetic-2d");
  EXPECT_EQ(c.dimension, 2u);
  EXPECT_EQ(c.layers, 1u);
  EXPECT_EQ(c.instance_vectors.size(), 10u);
  EXPECT_TRUE(c.has_sense("bank", 1));
  EXPECT_TRUE(c.has_instance("bank.query.1"));
  EXPECT_EQ(c.sense("apple", 0), (ContextualCache::LayerVectors{{1.0, 0.0}}));
}

TEST(Cache, TruncatedLineIsReported) {
  ErrorKind kind{};
  auto msg = error_of([] { load_cache(test::data_dir() / "truncated_cache.jsonl"); }, &kind);
  EXPECT_EQ(kind, ErrorKind::parse);
  EXPECT_NE(msg.find("truncated_cache.jsonl:3:"), std::string::npos) << msg;
}

TEST(Cache, SchemaErrors) {
  test::TempDir tmp;
  const std::string header = "{\"kind\":\"header\",\"model\":\"m\",\"dimension\":2,\"layers\":2}\n";
  ErrorKind kind{};

  test::write_file(tmp / "a.jsonl", header + "{\"kind\":\"instance\",\"id\":\"x\",\"vectors\":[[1,2]]}\n");
  auto msg = error_of([&] { load_cache(tmp / "a.jsonl"); }, &kind);
  EXPECT_EQ(kind, ErrorKind::schema);
  EXPECT_NE(msg.find("a.jsonl:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("expected 2 layer vectors"), std::string::npos) << msg;

  test::write_file(tmp / "a.jsonl", header + "{\"kind\":\"instance\",\"id\":\"x\",\"vectors\":[[1,2],[1,2,3]]}\n");
  msg = error_of([&] { load_cache(tmp / "a.jsonl"); }, &kind);
  EXPECT_EQ(kind, ErrorKind::schema);

  test::write_file(tmp / "a.jsonl", "{\"kind\":\"instance\",\"id\":\"x\",\"vectors\":[[1,2]]}\n");
  msg = error_of([&] { load_cache(tmp / "a.jsonl"); }, &kind);
  EXPECT_NE(msg.find("header"), std::string::npos);

  test::write_file(tmp / "a.jsonl", header + "{\"kind\":\"bogus\"}\n");
  msg = error_of([&] { load_cache(tmp / "a.jsonl"); }, &kind);
  EXPECT_NE(msg.find("unknown entry kind"), std::string::npos);
}

TEST(Cache, MergeRejectsMismatchedHeaders) {
  ContextualCache a, b;
  a.model = "m";
  a.dimension = 2;
  a.add_instance("x", {{1, 2}});
  b.model = "m";
  b.dimension = 3;
  EXPECT_THROW(a.merge(b), Error);
}

TEST(Cache, WriteThenLoadRoundTrips) {
  test::TempDir tmp;
  auto c = load_cache_dir(test::data_dir() / "cache");
  write_cache(c, tmp / "all.jsonl");
  auto back = load_cache(tmp / "all.jsonl");
  EXPECT_EQ(back.instance_vectors, c.instance_vectors);
  EXPECT_EQ(back.sense_vectors, c.sense_vectors);
  EXPECT_EQ(back.model, c.model);
}

TEST(Cache, ContextAndSenseLookups) {
  auto c = load_cache_dir(test::data_dir() / "cache");
  Instance inst;
  inst.id = "bank.query.1";
  EXPECT_EQ(embed_context(inst, c), (Vector{0.1, 0.9}));
  inst.id = "nope";
  ErrorKind kind{};
  error_of([&] { embed_context(inst, c); }, &kind);
  EXPECT_EQ(kind, ErrorKind::coverage);
}

}  // namespace
