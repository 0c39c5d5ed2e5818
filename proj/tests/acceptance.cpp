// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: stid_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

#include "stid/error.hpp"
#include "stid/evaluation.hpp"
#include "stid/numdiff.hpp"
#include "stid/training.hpp"
#include "unit/test_support.hpp"

using namespace stid;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome gradient_check() {
  StidConfig c;
  c.num_vars = 5;
  c.history_len = 4;
  c.horizon = 3;
  c.hidden_dim = 6;
  c.num_layers = 2;
  const StidParams p = init_params(c, 1);
  Rng rng(2);
  const Batch b = test::random_batch(c, 7, rng);

  const auto fr = forward(p, c, b);
  const LossResult loss = mae_loss(fr.prediction, b.target, b.target_mask);
  const std::vector<double> analytic = test::flatten(backward(p, c, fr.cache, loss.grad));
  StidParams scratch = p;
  const auto fn = [&](std::span<const double> w) {
    test::unflatten(w, scratch);
    return mae_loss(predict(scratch, c, b), b.target, b.target_mask).loss;
  };
  const std::vector<double> numeric = finite_diff_grad(fn, test::flatten(p), 1e-6);

  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - numeric[i]);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
    worst = std::max(worst, diff);
    if (diff > 1e-8 && diff > 1e-5 * scale) ++failures;
  }
  return {failures == 0, std::to_string(analytic.size()) + " coordinates, max abs diff " +
                             fmt("%.2e", worst)};
}

Outcome adam_oracle() {
  const double expected[] = {0.99900000001, 0.99800000002, 0.99700000003};
  double w = 1.0, m = 0.0, v = 0.0;
  const double g = 1.0;
  double worst = 0.0;
  for (std::uint64_t step = 1; step <= 3; ++step) {
    adam_update(std::span(&w, 1), std::span(&g, 1), std::span(&m, 1), std::span(&v, 1), step, {});
    worst = std::max(worst, std::abs(w - expected[step - 1]));
  }
  return {worst < 1e-9, "max deviation " + fmt("%.2e", worst)};
}

double test_mae(const PreparedData& d, const StidConfig& c, const TrainConfig& tc) {
  const FitResult fr = fit(c, tc, d);
  return evaluate_model(fr.best_params, c, d, d.splits.test).average().metrics.mae;
}

Outcome indistinguishability(SyntheticMode mode) {
  SyntheticSpec spec;
  spec.mode = mode;
  const PreparedData d = prepare_data(gen_synthetic_indistinguishable(spec), spec.history_len,
                                      spec.horizon, {}, NormMode::kGlobalZScore);
  TrainConfig tc;
  tc.epochs = 500;
  const StidConfig full = config_for(d, 32, 3);
  StidConfig ablated = full;
  if (mode == SyntheticMode::kSpatial) {
    ablated.use_spatial = false;
  } else {
    ablated.use_tid = false;
  }
  const double full_mae = test_mae(d, full, tc);
  const double ablated_mae = test_mae(d, ablated, tc);
  const double g = spec.gap;
  return {full_mae <= 0.05 * g && ablated_mae >= 0.4 * g,
          "full " + fmt("%.4f", full_mae) + (mode == SyntheticMode::kSpatial ? ", w/o E " : ", w/o T^TiD ") +
              fmt("%.4f", ablated_mae)};
}

Outcome ablation_ordering() {
  SyntheticSpec spec;
  spec.mode = SyntheticMode::kCombined;
  const PreparedData d = prepare_data(gen_synthetic_indistinguishable(spec), spec.history_len,
                                      spec.horizon, {}, NormMode::kGlobalZScore);
  int held = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    TrainConfig tc;
    tc.epochs = 300;
    tc.seed = seed;
    const auto res = run_ablation(d, config_for(d, 32, 3), tc);
    const double full = res[0].average.metrics.mae;
    bool ok = true;
    for (std::size_t i = 1; i < res.size(); ++i) ok = ok && res[i].average.metrics.mae > full;
    held += ok ? 1 : 0;
    detail += "seed " + std::to_string(seed) + ":";
    for (const auto& r : res) detail += " " + fmt("%.3f", r.average.metrics.mae);
    detail += ok ? " ok; " : " violated; ";
  }
  return {held >= 2, detail + std::to_string(held) + "/3 seeds"};
}

Outcome metric_oracles() {
  Rng rng(6);
  double worst = 0.0;
  bool rmse_ge_mae = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng.below(8), cols = 1 + rng.below(12);
    const Matrix p = test::random_matrix(rows, cols, rng, 20.0);
    const Matrix t = test::random_matrix(rows, cols, rng, 20.0);
    Mask mask(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) mask.set(r, c, rng.uniform() < 0.8);
    mask.set(0, 0, true);
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    std::size_t n = 0, n_pct = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (!mask(r, c)) continue;
        const double e = p(r, c) - t(r, c);
        abs_sum += std::abs(e);
        sq_sum += e * e;
        ++n;
        if (std::abs(t(r, c)) >= 1e-3) {
          pct_sum += std::abs(e) / std::abs(t(r, c));
          ++n_pct;
        }
      }
    }
    const Metrics m = metrics(p, t, mask);
    const double mae = abs_sum / static_cast<double>(n);
    const double rmse = std::sqrt(sq_sum / static_cast<double>(n));
    const double mape = 100.0 * pct_sum / static_cast<double>(n_pct);
    worst = std::max({worst, std::abs(m.mae - mae), std::abs(m.rmse - rmse),
                      std::abs(*m.mape_pct - mape) / std::max(1.0, mape)});
    rmse_ge_mae = rmse_ge_mae && m.rmse >= m.mae;
  }
  const Metrics ex = metrics(Matrix::from_rows({{0, 4}}), Matrix::from_rows({{2, 2}}), Mask(1, 2));
  const bool example = ex.mae == 2.0 && ex.rmse == 2.0 && ex.mape_pct && *ex.mape_pct == 100.0;
  return {worst <= 1e-12 && rmse_ge_mae && example,
          "max deviation " + fmt("%.2e", worst) + (example ? ", example (2, 2, 100%)" : ", example wrong")};
}

Outcome windowing() {
  RawSeries s;
  s.values = Matrix(16992, 1);
  s.valid = Mask(16992, 1);
  const std::size_t n = window_origins(s, 12, 12).size();
  RawSeries tight;
  tight.values = Matrix(24, 1);
  tight.valid = Mask(24, 1);
  const std::size_t m = window_origins(tight, 12, 12).size();
  return {n == 16969 && m == 1, std::to_string(n) + " origins; T=P+F gives " + std::to_string(m)};
}

Outcome determinism() {
  SyntheticSpec spec;
  spec.num_days = 3;
  const PreparedData d = prepare_data(gen_synthetic_indistinguishable(spec), 12, 12, {}, NormMode::kGlobalZScore);
  test::TempDir dir("acceptance");
  TrainConfig tc;
  tc.epochs = 5;
  tc.seed = 9;
  tc.batch_size = 8;
  const StidConfig c = config_for(d, 32, 3);
  tc.checkpoint_path = dir / "a.stid";
  const FitResult a = fit(c, tc, d);
  tc.checkpoint_path = dir / "b.stid";
  const FitResult b = fit(c, tc, d);
  bool same = a.report.epochs.size() == b.report.epochs.size();
  for (std::size_t i = 0; same && i < a.report.epochs.size(); ++i) {
    same = a.report.epochs[i].train_loss == b.report.epochs[i].train_loss &&
           a.report.epochs[i].val_mae == b.report.epochs[i].val_mae;
  }
  const bool files = slurp(dir / "a.stid") == slurp(dir / "b.stid") && !slurp(dir / "a.stid").empty();
  return {same && files, std::string("loss columns ") + (same ? "identical" : "differ") +
                             ", checkpoints " + (files ? "identical" : "differ")};
}

Outcome serialization() {
  StidConfig c;
  c.num_vars = 307;
  const StidParams p = init_params(c, 3);
  test::TempDir dir("acceptance");
  save_params(p, c, dir / "a.stid");
  const LoadedModel m = load_params(dir / "a.stid");
  save_params(m.params, m.config, dir / "b.stid");
  const std::string a = slurp(dir / "a.stid");
  return {a == slurp(dir / "b.stid") && m.params == p, std::to_string(a.size()) + " bytes"};
}

Outcome parameter_count() {
  StidConfig c;
  c.num_vars = 307;
  const std::size_t n = count_parameters(c);
  return {n == 120300 && n == init_params(c, 0).num_values(), std::to_string(n) + " parameters"};
}

Outcome bench_stability() {
  SyntheticSpec spec;
  spec.mode = SyntheticMode::kCombined;
  spec.num_days = 28;
  const PreparedData d = prepare_data(gen_synthetic_indistinguishable(spec), 12, 12, {}, NormMode::kGlobalZScore);
  TrainConfig tc;
  tc.epochs = 5;
  const FitResult fr = fit(config_for(d, 32, 3), tc, d);
  const double cv = seconds_per_epoch_cv(fr.report);
  return {cv < 0.25, fmt("%.4f s/epoch", measure_seconds_per_epoch(fr.report)) + fmt(", CV %.3f", cv)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "gradient correctness", gradient_check},
      {2, "Adam oracle", adam_oracle},
      {3, "spatial indistinguishability", [] { return indistinguishability(SyntheticMode::kSpatial); }},
      {4, "temporal indistinguishability", [] { return indistinguishability(SyntheticMode::kTemporal); }},
      {5, "ablation ordering", ablation_ordering},
      {6, "metric oracles", metric_oracles},
      {7, "windowing arithmetic", windowing},
      {8, "determinism", determinism},
      {9, "serialization round trip", serialization},
      {10, "parameter count", parameter_count},
      {11, "PEMS04 reproduction", nullptr},
      {12, "bench stability", bench_stability},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    if (!c.run) {
      std::printf("SKIP criterion %d: %s (needs the real dataset; guidance only, see README)\n", c.id, c.name);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%s; %.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
