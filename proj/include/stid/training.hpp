#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stid/data.hpp"
#include "stid/matrix.hpp"
#include "stid/model.hpp"
#include "stid/rng.hpp"

namespace stid {

struct LossResult {
  double loss = 0.0;
  Matrix grad;  ///< dL/dprediction
  std::size_t valid_count = 0;
};

/// Masked mean absolute error and its (sub)gradient; sign(0) is taken as 0.
LossResult mae_loss(const Matrix& pred, const Matrix& target, const Mask& mask);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of `w` in place. `step` is the 1-based
/// step index after incrementing.
void adam_update(std::span<double> w, std::span<const double> g, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamHyper& hyper);

struct AdamState {
  AdamHyper hyper;
  StidParams m;
  StidParams v;
  std::uint64_t step = 0;

  static AdamState fresh(const StidConfig& config, const AdamHyper& hyper);
};

/// Throws NumericError naming the first tensor with a non-finite gradient;
/// in that case nothing is updated.
void adam_step(StidParams& params, const StidParams& grads, AdamState& state);

/// Rescales all gradients so their global L2 norm is at most `max_norm`.
void clip_grad_norm(StidParams& grads, double max_norm);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;  ///< window origins per batch, each expanded to N samples
  std::uint64_t seed = 0;
  double clip_grad_norm = 0.0;  ///< 0 disables clipping
  std::filesystem::path checkpoint_path;  ///< empty: keep the best params in memory only
  bool log_epochs = false;                ///< one line per epoch on stdout

  void validate() const;
};

/// A dataset prepared for training: normalized series, the fitted normalizer
/// and the chronological origin split.
struct PreparedData {
  RawSeries raw;
  RawSeries normalized;
  Normalizer normalizer;
  SplitOrigins splits;
  std::size_t history_len = 0;
  std::size_t horizon = 0;
};

PreparedData prepare_data(RawSeries raw, std::size_t history_len, std::size_t horizon,
                          const SplitSpec& split, NormMode mode);

/// StidConfig sized to a prepared dataset (N and N_d taken from the series).
StidConfig config_for(const PreparedData& data, std::size_t hidden_dim, std::size_t num_layers);

/// One shuffled pass over `train_origins`; returns the mean batch loss.
double train_epoch(StidParams& params, AdamState& adam, const PreparedData& data,
                   std::span<const std::size_t> train_origins, const StidConfig& config,
                   const TrainConfig& train, Rng& rng);

/// Mean loss in normalized units over `origins` without updating anything.
double evaluate_loss(const StidParams& params, const PreparedData& data,
                     std::span<const std::size_t> origins, const StidConfig& config,
                     std::size_t batch_size);

/// Predictions and targets in original units for `origins`, every variable.
struct Forecast {
  Matrix prediction;
  Matrix target;
  Mask mask;
  std::vector<std::size_t> var;
};

Forecast forecast(const StidParams& params, const StidConfig& config, const PreparedData& data,
                  std::span<const std::size_t> origins, std::size_t batch_size = 256);

/// Masked MAE in original units.
double validation_mae(const StidParams& params, const StidConfig& config, const PreparedData& data,
                      std::span<const std::size_t> origins);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;
  double seconds = 0.0;  ///< training wall-clock only
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::filesystem::path best_checkpoint;
};

struct FitResult {
  TrainReport report;
  StidParams best_params;
  StidParams final_params;
};

/// Trains for train.epochs epochs, keeping the params with the lowest
/// validation MAE. Throws NumericError on a non-finite loss.
FitResult fit(const StidConfig& config, const TrainConfig& train, const PreparedData& data);

/// Mean training seconds per epoch.
double measure_seconds_per_epoch(const TrainReport& report);
/// Population standard deviation of epoch seconds over their mean.
double seconds_per_epoch_cv(const TrainReport& report);

/// `epoch,train_loss,val_mae,seconds`
void write_train_report_csv(const TrainReport& report, const std::filesystem::path& path);

}  // namespace stid
