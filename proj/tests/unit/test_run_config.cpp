#include "doctest.h"
#include "stid/error.hpp"
#include "stid/run_config.hpp"

using namespace stid;

TEST_SUITE("cli") {

TEST_CASE("defaults follow the reference settings") {
  const RunConfig c;
  CHECK(c.d == 32);
  CHECK(c.layers == 3);
  CHECK(c.p == 12);
  CHECK(c.f == 12);
  CHECK(c.lr == 0.001);
  CHECK(c.normalization == NormMode::kGlobalZScore);
  CHECK(c.split.train == 0.6);
}

TEST_CASE("parse and echo round trip") {
  const RunConfig c = RunConfig::parse(
      "# experiment\n"
      "dataset = data/pems04.csv\n"
      "lr = 0.005\n"
      "split = 0.7, 0.1, 0.2\n"
      "use_diw = false\n"
      "missing_value = 0\n"
      "normalization = per-variable-zscore\n");
  CHECK(c.dataset == "data/pems04.csv");
  CHECK(c.lr == 0.005);
  CHECK(c.split.train == 0.7);
  CHECK_FALSE(c.use_diw);
  CHECK(c.missing_value == 0.0);
  const RunConfig back = RunConfig::parse(c.to_text());
  CHECK(back.to_text() == c.to_text());
  for (const auto& key : RunConfig::keys()) CHECK(c.to_text().find(key + " = ") != std::string::npos);
}

TEST_CASE("invalid values name the key") {
  RunConfig c;
  try {
    c.set("lr", "abc");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'lr'") != std::string::npos);
  }
  CHECK_THROWS_AS(c.set("bogus", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("epochs", "0"), ConfigError);
  CHECK_THROWS_AS(c.set("split", "0.5,0.5"), ConfigError);
  CHECK_THROWS_AS(c.set("use_tid", "maybe"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("lr 0.1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("derived configs") {
  RunConfig c;
  c.use_tid = false;
  c.diw_dim = 2;
  const StidConfig m = c.model_config(307, 288);
  CHECK(m.num_vars == 307);
  CHECK(m.slots_per_day == 288);
  CHECK_FALSE(m.use_tid);
  CHECK(m.width() == 32 + 32 + 2);
  const TrainConfig t = c.train_config();
  CHECK(t.learning_rate == 0.001);
  CHECK(t.epochs == 100);
  CHECK(t.batch_size == 32);
}

}  // TEST_SUITE
