// stid: train, evaluate and ablate the spatial/temporal identity forecaster.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stid/error.hpp"
#include "stid/evaluation.hpp"
#include "stid/run_config.hpp"

namespace fs = std::filesystem;
using namespace stid;

namespace {

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kDataFailure = 2, kNumericFailure = 3 };

struct CommonOptions {
  std::string config_path;
  std::string out;
  std::string dataset;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Run config file (key = value lines)");
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--dataset", opts.dataset, "Dataset CSV (overrides the config)");
  cmd->add_option("--seed", opts.seed, "Seed (overrides the config)");
  cmd->add_option("--set", opts.overrides, "Override a config key, KEY=VALUE (repeatable)");
}

RunConfig resolve(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : RunConfig::load(opts.config_path);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.dataset.empty()) cfg.dataset = opts.dataset;
  if (!opts.out.empty()) cfg.out = opts.out;
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out.string() + "'");
  std::ofstream echo(cfg.out / "resolved_config.txt");
  echo << cfg.to_text();
  return cfg.out;
}

PreparedData load_prepared(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw DataError("no dataset given (set 'dataset' or pass --dataset)");
  if (!fs::exists(cfg.dataset)) throw DataError("dataset '" + cfg.dataset.string() + "' not found");
  CsvOptions csv;
  csv.missing_sentinel = cfg.missing_value;
  return prepare_data(load_csv(cfg.dataset, csv), cfg.p, cfg.f, cfg.split, cfg.normalization);
}

const std::vector<std::size_t>& split_origins(const PreparedData& data, const std::string& split) {
  if (split == "train") return data.splits.train;
  if (split == "val") return data.splits.val;
  if (split == "test") return data.splits.test;
  throw ConfigError("unknown split '" + split + "' (expected train, val or test)");
}

int cmd_train(const CommonOptions& opts) {
  const RunConfig cfg = resolve(opts);
  const PreparedData data = load_prepared(cfg);
  const fs::path out = prepare_out_dir(cfg);
  const StidConfig model = cfg.model_config(data.raw.num_vars(), data.raw.slots_per_day());
  TrainConfig train = cfg.train_config();
  train.checkpoint_path = out / "model.stid";
  train.log_epochs = true;
  const FitResult fr = fit(model, train, data);
  write_train_report_csv(fr.report, out / "train_report.csv");
  const HorizonReport test =
      evaluate_model(fr.best_params, model, data, data.splits.test, cfg.mape_floor);
  write_horizon_report_csv(test, out / "test_report.csv");
  std::cout << "best epoch " << fr.report.best_epoch << " (val MAE "
            << fr.report.epochs[fr.report.best_epoch].val_mae << ")\n"
            << format_horizon_report(test);
  return kOk;
}

int cmd_evaluate(const CommonOptions& opts, const std::string& checkpoint, const std::string& split,
                 const std::string& baseline) {
  RunConfig cfg = resolve(opts);
  std::optional<LoadedModel> model;
  if (baseline.empty()) {
    if (checkpoint.empty()) throw ConfigError("evaluate needs --checkpoint or --baseline hi");
    model = load_params(checkpoint);
    cfg.p = model->config.history_len;
    cfg.f = model->config.horizon;
  } else if (baseline != "hi") {
    throw ConfigError("unknown baseline '" + baseline + "' (only 'hi' is available)");
  }
  const PreparedData data = load_prepared(cfg);
  const auto& origins = split_origins(data, split);
  HorizonReport report;
  if (model) {
    const StidConfig& mc = model->config;
    if (mc.num_vars != data.raw.num_vars() || mc.slots_per_day != data.raw.slots_per_day()) {
      throw ShapeError("checkpoint expects N=" + std::to_string(mc.num_vars) +
                       " N_d=" + std::to_string(mc.slots_per_day) + ", dataset has N=" +
                       std::to_string(data.raw.num_vars()) +
                       " N_d=" + std::to_string(data.raw.slots_per_day()));
    }
    report = evaluate_model(model->params, mc, data, origins, cfg.mape_floor);
  } else {
    report = evaluate_hi(data, origins, cfg.mape_floor);
  }
  const fs::path out = prepare_out_dir(cfg);
  write_horizon_report_csv(report, out / (model ? "evaluate_report.csv" : "hi_report.csv"));
  std::cout << format_horizon_report(report);
  return kOk;
}

int cmd_ablate(const CommonOptions& opts) {
  const RunConfig cfg = resolve(opts);
  const PreparedData data = load_prepared(cfg);
  const fs::path out = prepare_out_dir(cfg);
  const auto results = run_ablation(data, cfg.model_config(data.raw.num_vars(), data.raw.slots_per_day()),
                                    cfg.train_config(), cfg.mape_floor);
  write_ablation_csv(results, out / "ablation.csv");
  for (const auto& r : results) {
    std::printf("%-10s MAE %.4f RMSE %.4f\n", r.variant.c_str(), r.average.metrics.mae,
                r.average.metrics.rmse);
  }
  return kOk;
}

int cmd_bench(const CommonOptions& opts, std::size_t epochs) {
  RunConfig cfg = resolve(opts);
  cfg.epochs = epochs;
  const PreparedData data = load_prepared(cfg);
  prepare_out_dir(cfg);
  const FitResult fr = fit(cfg.model_config(data.raw.num_vars(), data.raw.slots_per_day()),
                           cfg.train_config(), data);
  const double mean = measure_seconds_per_epoch(fr.report);
  const double cv = seconds_per_epoch_cv(fr.report);
  std::fprintf(stderr, "seconds/epoch over %zu epochs (coefficient of variation %.3f)\n", epochs, cv);
  std::printf("%.6f\n", mean);
  return kOk;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out) {
  if (out.empty()) throw ConfigError("synth needs --out PATH");
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const RawSeries series = gen_synthetic_indistinguishable(spec);
  save_csv(series, path);
  std::printf("wrote %s: T=%zu N=%zu\n", path.string().c_str(), series.num_slots(), series.num_vars());
  return kOk;
}

int cmd_export(const std::string& checkpoint, const std::string& out) {
  if (checkpoint.empty()) throw ConfigError("export-embeddings needs --checkpoint");
  const LoadedModel m = load_params(checkpoint);
  for (const auto& p : export_embeddings(m.params, out.empty() ? fs::path("embeddings") : fs::path(out))) {
    std::printf("wrote %s\n", p.string().c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial/temporal identity forecaster"};
  app.require_subcommand(1);

  CommonOptions train_opts, eval_opts, ablate_opts, bench_opts;
  auto* train = app.add_subcommand("train", "Train a model and report test metrics");
  add_common(train, train_opts);

  std::string checkpoint, split = "test", baseline;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint or the HI baseline");
  add_common(evaluate, eval_opts);
  evaluate->add_option("--checkpoint", checkpoint, "Model file written by train");
  evaluate->add_option("--split", split, "train, val or test")->capture_default_str();
  evaluate->add_option("--baseline", baseline, "Evaluate a baseline instead (hi)");

  auto* ablate = app.add_subcommand("ablate", "Train the full model and three identity ablations");
  add_common(ablate, ablate_opts);

  std::size_t bench_epochs = 5;
  auto* bench = app.add_subcommand("bench", "Mean training seconds per epoch");
  add_common(bench, bench_opts);
  bench->add_option("--epochs", bench_epochs, "Epochs to time")->capture_default_str();

  SyntheticSpec spec;
  std::string mode = "spatial", synth_out;
  auto* synth = app.add_subcommand("synth", "Generate an indistinguishable-sample dataset");
  synth->add_option("--mode", mode, "spatial, temporal or combined")->capture_default_str();
  synth->add_option("--gap", spec.gap, "Future offset g")->capture_default_str();
  synth->add_option("--weekly-gap", spec.weekly_gap, "Weekend offset (combined mode)")->capture_default_str();
  synth->add_option("--days", spec.num_days, "Days to generate")->capture_default_str();
  synth->add_option("--interval", spec.interval_minutes, "Minutes per slot")->capture_default_str();
  synth->add_option("--p", spec.history_len, "History length")->capture_default_str();
  synth->add_option("--f", spec.horizon, "Horizon")->capture_default_str();
  synth->add_option("--block", spec.block_period, "Block period in slots (0: P+F)")->capture_default_str();
  synth->add_option("--level", spec.level, "Waveform level")->capture_default_str();
  synth->add_option("--amplitude", spec.amplitude, "Waveform amplitude")->capture_default_str();
  synth->add_option("--noise", spec.noise_std, "Gaussian noise std")->capture_default_str();
  synth->add_option("--seed", spec.seed, "Noise seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output CSV path");

  std::string export_ckpt, export_out;
  auto* exporter = app.add_subcommand("export-embeddings", "Write identity tables as CSV");
  exporter->add_option("--checkpoint", export_ckpt, "Model file");
  exporter->add_option("--out", export_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*train) return cmd_train(train_opts);
    if (*evaluate) return cmd_evaluate(eval_opts, checkpoint, split, baseline);
    if (*ablate) return cmd_ablate(ablate_opts);
    if (*bench) return cmd_bench(bench_opts, bench_epochs);
    if (*synth) {
      spec.mode = parse_synthetic_mode(mode);
      return cmd_synth(spec, synth_out);
    }
    if (*exporter) return cmd_export(export_ckpt, export_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const ShapeError& e) {
    std::cerr << "dimension mismatch: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataFailure;
  }
  return kOk;
}
