#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "stid/error.hpp"
#include "stid/evaluation.hpp"
#include "test_support.hpp"

using namespace stid;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("metrics hand examples") {
  const Matrix a = Matrix::from_rows({{1, 2, 3}});
  const Metrics same = metrics(a, a, Mask(1, 3));
  CHECK(same.mae == 0.0);
  CHECK(same.rmse == 0.0);
  CHECK(*same.mape_pct == 0.0);

  const Metrics m = metrics(Matrix::from_rows({{0, 4}}), Matrix::from_rows({{2, 2}}), Mask(1, 2));
  CHECK(m.mae == 2.0);
  CHECK(m.rmse == 2.0);
  CHECK(*m.mape_pct == 100.0);

  const Metrics z = metrics(Matrix::from_rows({{1, 4}}), Matrix::from_rows({{0, 2}}), Mask(1, 2));
  CHECK(z.mae == 1.5);
  CHECK(z.rmse == doctest::Approx(std::sqrt(2.5)));
  CHECK(z.valid_count == 2);
  CHECK(z.mape_count == 1);
  CHECK(*z.mape_pct == 100.0);

  const Metrics none = metrics(Matrix::from_rows({{1}}), Matrix::from_rows({{0}}), Mask(1, 1));
  CHECK_FALSE(none.mape_pct.has_value());
  CHECK_THROWS_AS(metrics(a, a, Mask(1, 3, false)), DataError);
  CHECK_THROWS_AS(metrics(a, Matrix(1, 2), Mask(1, 3)), ShapeError);
}

TEST_CASE("RMSE is never below MAE") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 1 + rng.below(6), c = 1 + rng.below(6);
    const Matrix p = test::random_matrix(r, c, rng, 10.0);
    const Matrix t = test::random_matrix(r, c, rng, 10.0);
    const Metrics m = metrics(p, t, Mask(r, c));
    CHECK(m.rmse >= m.mae - 1e-12);
  }
}

TEST_CASE("horizon report rows") {
  Rng rng(4);
  const Matrix t1 = test::random_matrix(5, 1, rng);
  const Matrix p1 = test::random_matrix(5, 1, rng);
  const HorizonReport one = horizon_report(p1, t1, Mask(5, 1));
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].label == "avg");
  CHECK(one.rows[0].metrics.mae == metrics(p1, t1, Mask(5, 1)).mae);

  const Matrix target(4, 12, 10.0);
  Matrix pred(4, 12, 12.0);
  const HorizonReport flat = horizon_report(pred, target, Mask(4, 12));
  REQUIRE(flat.rows.size() == 4);
  CHECK(flat.rows[0].label == "@3");
  CHECK(flat.rows[1].label == "@6");
  CHECK(flat.rows[2].label == "@12");
  for (const auto& row : flat.rows) CHECK(row.metrics.mae == doctest::Approx(2.0).epsilon(1e-15));

  Matrix late = target;
  for (std::size_t r = 0; r < 4; ++r) late(r, 11) = 16.0;
  const HorizonReport rep = horizon_report(late, target, Mask(4, 12));
  CHECK(rep.rows[0].metrics.mae == 0.0);
  CHECK(rep.rows[1].metrics.mae == 0.0);
  CHECK(rep.rows[2].metrics.mae == 6.0);
  CHECK(rep.average().metrics.mae == doctest::Approx(6.0 / 12.0).epsilon(1e-15));

  const HorizonReport five = horizon_report(Matrix(2, 5), Matrix(2, 5, 1.0), Mask(2, 5));
  CHECK(five.rows.size() == 2);
}

TEST_CASE("horizon rows reproduce single-step metrics and bracket the average") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t rows = 2 + rng.below(10);
    const Matrix p = test::random_matrix(rows, 12, rng, 5.0);
    const Matrix t = test::random_matrix(rows, 12, rng, 5.0);
    Mask mask(rows, 12);
    mask.set(rng.below(rows), rng.below(12), false);
    const HorizonReport rep = horizon_report(p, t, mask);
    for (std::size_t i = 0; i < 3; ++i) {
      const std::size_t h = rep.rows[i].horizon;
      Mask step(rows, 12, false);
      for (std::size_t r = 0; r < rows; ++r) step.set(r, h - 1, mask(r, h - 1));
      const Metrics direct = metrics(p, t, step);
      CHECK(rep.rows[i].metrics.mae == direct.mae);
      CHECK(rep.rows[i].metrics.rmse == direct.rmse);
    }
    CHECK(rep.average().masked_count == 1);
    const Metrics all = metrics(p, t, Mask(rows, 12));
    double lo = INFINITY, hi = 0.0;
    for (std::size_t k = 0; k < 12; ++k) {
      Mask step(rows, 12, false);
      for (std::size_t r = 0; r < rows; ++r) step.set(r, k, true);
      const double mae = metrics(p, t, step).mae;
      lo = std::min(lo, mae);
      hi = std::max(hi, mae);
    }
    CHECK(all.mae >= lo - 1e-12);
    CHECK(all.mae <= hi + 1e-12);
  }
}

TEST_CASE("historical inertia baseline") {
  RawSeries s;
  s.values = Matrix(60, 3);
  s.valid = Mask(60, 3);
  for (std::size_t t = 0; t < 60; ++t) {
    s.values(t, 0) = 7.0;                                   // constant
    s.values(t, 1) = static_cast<double>(t);                // ramp
    s.values(t, 2) = static_cast<double>((t * 7) % 12);     // period 12
  }
  const auto windows = make_windows(s, 12, 12);
  const auto pred = hi_baseline(windows);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    for (std::size_t k = 0; k < 12; ++k) {
      const double err = std::abs(pred[i][k] - windows[i].future[k]);
      if (windows[i].var == 1) {
        CHECK(err == 12.0);
      } else {
        CHECK(err == 0.0);
      }
    }
  }
  const Batch b = make_batch(windows);
  const Matrix batch_pred = hi_baseline(b.history, 12);
  CHECK(batch_pred.row(4)[0] == pred[4][0]);
  CHECK_THROWS_AS(hi_baseline(Matrix(2, 3), 4), ConfigError);

  const PreparedData d = prepare_data(s, 12, 12, {}, NormMode::kGlobalZScore);
  const HorizonReport a = evaluate_hi(d, d.splits.test);
  const HorizonReport b2 = evaluate_hi(d, d.splits.test);
  CHECK(a.average().metrics.mae == b2.average().metrics.mae);
  CHECK(a.average().metrics.mae == doctest::Approx(4.0).epsilon(1e-15));  // only the ramp errs
}

TEST_CASE("run_ablation produces the four variants") {
  SyntheticSpec spec;
  spec.num_days = 3;
  const PreparedData d = prepare_data(gen_synthetic_indistinguishable(spec), 12, 12, {}, NormMode::kGlobalZScore);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 16;
  const auto res = run_ablation(d, config_for(d, 4, 1), tc);
  REQUIRE(res.size() == 4);
  CHECK(res[0].variant == "full");
  CHECK(res[1].variant == "w/o E");
  CHECK(res[2].variant == "w/o T^TiD");
  CHECK(res[3].variant == "w/o T^DiW");
  CHECK_FALSE(res[1].config.use_spatial);
  CHECK_FALSE(res[2].config.use_tid);
  CHECK_FALSE(res[3].config.use_diw);
  for (const auto& r : res) CHECK(r.average.metrics.mae >= 0.0);

  test::TempDir dir("ablate");
  write_ablation_csv(res, dir / "a.csv");
  const auto lines = read_lines(dir / "a.csv");
  CHECK(lines.size() == 5);
  CHECK(lines[0] == "variant,mae,rmse,mape_pct,valid_count");
  CHECK(lines[2].rfind("w/o E,", 0) == 0);
}

TEST_CASE("horizon report CSV layout") {
  test::TempDir dir("report");
  const HorizonReport rep = horizon_report(Matrix(2, 12), Matrix(2, 12, 1.0), Mask(2, 12));
  write_horizon_report_csv(rep, dir / "r.csv");
  const auto lines = read_lines(dir / "r.csv");
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "horizon,mae,rmse,mape_pct,valid_count");
  CHECK(lines[1] == "@3,1,1,100,2");
  CHECK(lines[4] == "avg,1,1,100,24");
  CHECK(format_horizon_report(rep).find("@12") != std::string::npos);
}

TEST_CASE("export_embeddings") {
  test::TempDir dir("emb");
  StidConfig c;
  c.num_vars = 170;
  c.slots_per_day = 288;
  c.num_layers = 1;
  c.diw_dim = 2;
  const StidParams p = init_params(c, 1);
  const auto files = export_embeddings(p, dir / "out");
  REQUIRE(files.size() == 3);
  const auto e = read_lines(dir / "out" / "E.csv");
  const auto tid = read_lines(dir / "out" / "T_tid.csv");
  const auto diw = read_lines(dir / "out" / "T_diw.csv");
  CHECK(e.size() == 1 + 170);
  CHECK(tid.size() == 1 + 288);
  CHECK(diw.size() == 1 + 7);
  CHECK(diw[0] == "index,v_0,v_1");
  CHECK(diw[3].rfind("2,", 0) == 0);
  CHECK(std::count(e[1].begin(), e[1].end(), ',') == 32);

  StidConfig no_e = c;
  no_e.use_spatial = false;
  test::TempDir dir2("emb");
  CHECK(export_embeddings(init_params(no_e, 1), dir2.path()).size() == 2);
}

}  // TEST_SUITE
