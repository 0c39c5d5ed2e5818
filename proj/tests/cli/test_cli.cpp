#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stid/data.hpp"
#include "stid/model.hpp"
#include "../unit/test_support.hpp"

using namespace stid;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string(STID_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> column(const std::filesystem::path& p, std::size_t col) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(ss, cell, ',');
    out.push_back(cell);
  }
  return out;
}

/// Synthetic dataset plus a config file with a short schedule.
struct Fixture {
  test::TempDir dir{"cli"};
  std::filesystem::path data = dir / "synth.csv";
  std::filesystem::path config = dir / "run.txt";

  Fixture() {
    SyntheticSpec spec;
    spec.num_days = 3;
    save_csv(gen_synthetic_indistinguishable(spec), data);
    std::ofstream(config) << "dataset = " << data.string() << "\nd = 8\nlayers = 1\nepochs = 3\n"
                          << "batch_size = 8\nseed = 5\n";
  }
  std::filesystem::path operator/(const std::string& n) const { return dir / n; }
  std::string base(const std::string& out) const {
    return "--config " + config.string() + " --out " + (dir / out).string();
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train writes its outputs and evaluate reproduces the test report") {
  Fixture fx;
  const RunResult t = run("train " + fx.base("a"), fx / "log1");
  REQUIRE_MESSAGE(t.code == 0, t.out);
  for (const char* f : {"model.stid", "train_report.csv", "test_report.csv", "resolved_config.txt"})
    CHECK(std::filesystem::exists(fx / "a" / f));
  CHECK(column(fx / "a" / "train_report.csv", 0).size() == 3);

  const RunResult e = run("evaluate " + fx.base("a") + " --checkpoint " +
                              (fx / "a" / "model.stid").string(),
                          fx / "log2");
  REQUIRE_MESSAGE(e.code == 0, e.out);
  CHECK(slurp(fx / "a" / "evaluate_report.csv") == slurp(fx / "a" / "test_report.csv"));

  const RunResult hi = run("evaluate " + fx.base("a") + " --baseline hi", fx / "log3");
  REQUIRE_MESSAGE(hi.code == 0, hi.out);
  CHECK(column(fx / "a" / "hi_report.csv", 0).back() == "avg");

  const RunResult x = run("export-embeddings --checkpoint " + (fx / "a" / "model.stid").string() +
                              " --out " + (fx / "emb").string(),
                          fx / "log4");
  REQUIRE_MESSAGE(x.code == 0, x.out);
  CHECK(column(fx / "emb" / "E.csv", 0).size() == 2);
  CHECK(column(fx / "emb" / "T_tid.csv", 0).size() == 288);
  CHECK(column(fx / "emb" / "T_diw.csv", 0).size() == 7);
}

TEST_CASE("identical runs are bit-identical") {
  Fixture fx;
  REQUIRE(run("train " + fx.base("a"), fx / "l1").code == 0);
  REQUIRE(run("train " + fx.base("b"), fx / "l2").code == 0);
  CHECK(column(fx / "a" / "train_report.csv", 1) == column(fx / "b" / "train_report.csv", 1));
  CHECK(column(fx / "a" / "train_report.csv", 2) == column(fx / "b" / "train_report.csv", 2));
  CHECK(slurp(fx / "a" / "model.stid") == slurp(fx / "b" / "model.stid"));
}

TEST_CASE("exit codes") {
  Fixture fx;
  CHECK(run("train " + fx.base("a") + " --dataset " + (fx / "missing.csv").string(), fx / "l").code == 2);
  const RunResult bad = run("train " + fx.base("a") + " --set lr=abc", fx / "l");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("lr") != std::string::npos);
  CHECK(run("train " + fx.base("a") + " --set nonsense=1", fx / "l").code == 1);
  CHECK(run("frobnicate", fx / "l").code == 1);

  StidConfig two;
  two.num_vars = 3;
  two.hidden_dim = 8;
  two.num_layers = 1;
  save_params(init_params(two, 0), two, fx / "n3.stid");
  const RunResult mismatch = run("evaluate " + fx.base("a") + " --checkpoint " + (fx / "n3.stid").string(),
                                 fx / "l");
  CHECK(mismatch.code == 1);
  CHECK(mismatch.out.find("N=3") != std::string::npos);

  std::ofstream(fx / "junk.stid") << "not a model";
  CHECK(run("evaluate " + fx.base("a") + " --checkpoint " + (fx / "junk.stid").string(), fx / "l").code == 2);
}

TEST_CASE("synth, ablate and bench") {
  Fixture fx;
  const auto out = fx / "s.csv";
  REQUIRE(run("synth --mode combined --days 2 --out " + out.string(), fx / "l").code == 0);
  const RawSeries s = load_csv(out);
  CHECK(s.num_vars() == 2);
  CHECK(s.origin_stride == 24);

  const RunResult a = run("ablate " + fx.base("ab") + " --set epochs=1", fx / "l2");
  REQUIRE_MESSAGE(a.code == 0, a.out);
  const auto variants = column(fx / "ab" / "ablation.csv", 0);
  CHECK(variants == std::vector<std::string>{"full", "w/o E", "w/o T^TiD", "w/o T^DiW"});

  const RunResult b = run("bench " + fx.base("bn") + " --epochs 3", fx / "l3");
  REQUIRE(b.code == 0);
  std::string last = b.out.substr(0, b.out.find_last_not_of('\n') + 1);
  last = last.substr(last.find_last_of('\n') + 1);
  CHECK(std::stod(last) > 0.0);
}

}  // TEST_SUITE
