#include "stid/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "stid/error.hpp"

namespace stid {
namespace {

constexpr std::size_t kReportHorizons[] = {3, 6, 12};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string mape_field(const Metrics& m) {
  return m.mape_pct ? format_double(*m.mape_pct) : std::string("NA");
}

}  // namespace

Metrics metrics(const Matrix& pred, const Matrix& target, const Mask& mask, double mape_floor) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() ||
      mask.rows() != pred.rows() || mask.cols() != pred.cols()) {
    throw ShapeError("metrics: prediction " + pred.shape_str() + " vs target " + target.shape_str());
  }
  Metrics m;
  double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
  for (std::size_t r = 0; r < pred.rows(); ++r) {
    for (std::size_t c = 0; c < pred.cols(); ++c) {
      if (!mask(r, c)) continue;
      const double e = pred(r, c) - target(r, c);
      abs_sum += std::abs(e);
      sq_sum += e * e;
      ++m.valid_count;
      if (std::abs(target(r, c)) >= mape_floor) {
        pct_sum += std::abs(e / target(r, c));
        ++m.mape_count;
      }
    }
  }
  if (m.valid_count == 0) throw DataError("metrics: no valid entries");
  const double n = static_cast<double>(m.valid_count);
  m.mae = abs_sum / n;
  m.rmse = std::sqrt(sq_sum / n);
  if (m.mape_count > 0) m.mape_pct = 100.0 * pct_sum / static_cast<double>(m.mape_count);
  return m;
}

HorizonReport horizon_report(const Matrix& pred, const Matrix& target, const Mask& mask,
                             double mape_floor) {
  const std::size_t F = pred.cols();
  if (F == 0) throw ShapeError("horizon_report: zero horizon");
  HorizonReport report;
  report.mape_floor = mape_floor;
  const std::size_t total = pred.rows() * F;
  for (std::size_t h : kReportHorizons) {
    if (h > F) continue;
    Mask step(mask.rows(), F, false);
    for (std::size_t r = 0; r < mask.rows(); ++r) step.set(r, h - 1, mask(r, h - 1));
    HorizonRow row;
    row.label = "@" + std::to_string(h);
    row.horizon = h;
    row.metrics = metrics(pred, target, step, mape_floor);
    row.masked_count = pred.rows() - row.metrics.valid_count;
    report.rows.push_back(row);
  }
  HorizonRow avg;
  avg.label = "avg";
  avg.metrics = metrics(pred, target, mask, mape_floor);
  avg.masked_count = total - avg.metrics.valid_count;
  report.rows.push_back(avg);
  return report;
}

void write_horizon_report_csv(const HorizonReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "horizon,mae,rmse,mape_pct,valid_count\n";
  for (const auto& row : report.rows) {
    out << row.label << ',' << format_double(row.metrics.mae) << ','
        << format_double(row.metrics.rmse) << ',' << mape_field(row.metrics) << ','
        << row.metrics.valid_count << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string format_horizon_report(const HorizonReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %12s %12s %12s %12s %10s\n", "horizon", "MAE", "RMSE",
                "MAPE(%)", "valid", "masked");
  out += line;
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof line, "%-8s %12.4f %12.4f %12s %12zu %10zu\n", row.label.c_str(),
                  row.metrics.mae, row.metrics.rmse,
                  row.metrics.mape_pct ? format_double(*row.metrics.mape_pct).c_str() : "NA",
                  row.metrics.valid_count, row.masked_count);
    out += line;
  }
  std::snprintf(line, sizeof line, "(MAPE skips targets with |y| < %g)\n", report.mape_floor);
  out += line;
  return out;
}

Matrix hi_baseline(const Matrix& histories, std::size_t horizon) {
  const std::size_t P = histories.cols();
  if (P < horizon) {
    throw ConfigError("hi_baseline: history length " + std::to_string(P) + " < horizon " +
                      std::to_string(horizon));
  }
  return slice_columns(histories, P - horizon, horizon);
}

std::vector<std::vector<double>> hi_baseline(const std::vector<WindowSample>& windows) {
  std::vector<std::vector<double>> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    const std::size_t F = w.future.size();
    if (w.history.size() < F) throw ConfigError("hi_baseline: history shorter than horizon");
    out.emplace_back(w.history.end() - static_cast<std::ptrdiff_t>(F), w.history.end());
  }
  return out;
}

HorizonReport evaluate_model(const StidParams& params, const StidConfig& config,
                             const PreparedData& data, std::span<const std::size_t> origins,
                             double mape_floor) {
  const Forecast fc = forecast(params, config, data, origins);
  return horizon_report(fc.prediction, fc.target, fc.mask, mape_floor);
}

HorizonReport evaluate_hi(const PreparedData& data, std::span<const std::size_t> origins,
                          double mape_floor) {
  const Batch batch = gather_batch(data.raw, origins, data.history_len, data.horizon);
  const Matrix pred = hi_baseline(batch.history, data.horizon);
  return horizon_report(pred, batch.target, batch.target_mask, mape_floor);
}

std::vector<AblationResult> run_ablation(const PreparedData& data, const StidConfig& base,
                                         const TrainConfig& train, double mape_floor) {
  struct Variant {
    const char* name;
    bool spatial, tid, diw;
  };
  const Variant variants[] = {{"full", true, true, true},
                              {"w/o E", false, true, true},
                              {"w/o T^TiD", true, false, true},
                              {"w/o T^DiW", true, true, false}};
  std::vector<AblationResult> out;
  for (const auto& v : variants) {
    StidConfig cfg = base;
    cfg.use_spatial = v.spatial;
    cfg.use_tid = v.tid;
    cfg.use_diw = v.diw;
    TrainConfig tc = train;
    tc.checkpoint_path.clear();
    const FitResult fr = fit(cfg, tc, data);
    AblationResult r;
    r.variant = v.name;
    r.config = cfg;
    r.average = evaluate_model(fr.best_params, cfg, data, data.splits.test, mape_floor).average();
    r.best_val_mae = fr.report.epochs[fr.report.best_epoch].val_mae;
    out.push_back(std::move(r));
  }
  return out;
}

void write_ablation_csv(const std::vector<AblationResult>& results,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "variant,mae,rmse,mape_pct,valid_count\n";
  for (const auto& r : results) {
    out << r.variant << ',' << format_double(r.average.metrics.mae) << ','
        << format_double(r.average.metrics.rmse) << ',' << mape_field(r.average.metrics) << ','
        << r.average.metrics.valid_count << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::filesystem::path> export_embeddings(const StidParams& params,
                                                     const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  const std::pair<const char*, const Matrix*> tables[] = {
      {"E.csv", &params.spatial}, {"T_tid.csv", &params.time_of_day}, {"T_diw.csv", &params.day_of_week}};
  char buf[32];
  for (const auto& [file, table] : tables) {
    if (table->empty()) continue;
    const auto path = out_dir / file;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "index";
    for (std::size_t c = 0; c < table->cols(); ++c) out << ",v_" << c;
    out << '\n';
    for (std::size_t r = 0; r < table->rows(); ++r) {
      out << r;
      for (double x : table->row(r)) {
        const auto res = std::to_chars(buf, buf + sizeof buf, x);
        out << ',';
        out.write(buf, res.ptr - buf);
      }
      out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace stid
