#include <gtest/gtest.h>

#include <cstdlib>

#include "run_config.hpp"
#include "support.hpp"

namespace {

using namespace uwsd;
using namespace uwsd::cli;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::io;
}

RunConfig base(const std::string& method) {
  RunConfig c;
  c.dataset = (test::data_dir() / "mini").string();
  c.method = method;
  return c;
}

TEST(RunConfig, ValidationErrors) {
  EXPECT_EQ(kind_of([] { RunConfig{}.validate(); }), ErrorKind::usage);
  EXPECT_EQ(kind_of([] { base("nope").validate(); }), ErrorKind::usage);
  EXPECT_EQ(kind_of([] { base("wmd").validate(); }), ErrorKind::usage);
  EXPECT_EQ(kind_of([] { base("cosine-cache").validate(); }), ErrorKind::usage);
  EXPECT_EQ(kind_of([] { base("random").validate(); }), ErrorKind::usage);
  EXPECT_EQ(kind_of([] {
              auto c = base("mfs");
              c.pooling = "max";
              c.validate();
            }),
            ErrorKind::usage);
  EXPECT_EQ(kind_of([] {
              auto c = base("cosine-static");
              c.vectors = "v";
              c.pooling = "softmax";
              c.validate();
            }),
            ErrorKind::usage);
  EXPECT_EQ(kind_of([] {
              auto c = base("cosine-cache");
              c.cache = {"c"};
              c.layer_weights = {0.5, 0.6};
              c.validate();
            }),
            ErrorKind::usage);
  EXPECT_NO_THROW(base("mfs").validate());
}

TEST(RunConfig, JsonThenEnvironmentThenFlags) {
  test::TempDir tmp;
  test::write_file(tmp / "c.json", R"({"dataset": "from-json", "method": "random", "seed": 3, "words": ["bank"]})");
  RunConfig c;
  c.apply_json_file((tmp / "c.json").string());
  EXPECT_EQ(c.dataset, "from-json");
  EXPECT_EQ(c.seed, 3u);
  ::setenv("UWSD_DATASET_ROOT", "from-env", 1);
  c.apply_environment();
  ::unsetenv("UWSD_DATASET_ROOT");
  EXPECT_EQ(c.dataset, "from-env");
  EXPECT_EQ(c.default_strategy(""), "RO-Random(seed=3)");

  test::write_file(tmp / "bad.json", "{\"gamma\": \"x\"}");
  EXPECT_EQ(kind_of([&] { RunConfig{}.apply_json_file((tmp / "bad.json").string()); }), ErrorKind::usage);
}

TEST(RunConfig, FingerprintIgnoresOutputsAndJobs) {
  auto a = base("mfs"), b = base("mfs");
  b.jobs = 4;
  b.out_json = "x.json";
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  b.words = {"bank"};
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(RunConfig, BuildPredictorForCache) {
  auto c = base("cosine-cache");
  c.cache = {(test::data_dir() / "cache").string()};
  auto ds = load_configured_dataset(c);
  auto built = build_predictor(c, ds);
  EXPECT_EQ(built.strategy, "UWSD+synthetic-2d");
  auto r = evaluate(ds, built.predictor, {built.strategy});
  EXPECT_EQ(r.global.hits, 8.0);

  c.layer_weights = {0.5, 0.5};
  EXPECT_EQ(kind_of([&] { build_predictor(c, ds); }), ErrorKind::usage);
}

TEST(RunConfig, ExitCodes) {
  EXPECT_EQ(exit_code_for(ErrorKind::io), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::parse), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::schema), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::coverage), 5);
  EXPECT_EQ(exit_code_for(ErrorKind::usage), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::numeric), 6);
}

}  // namespace
