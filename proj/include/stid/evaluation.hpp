#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stid/data.hpp"
#include "stid/matrix.hpp"
#include "stid/model.hpp"
#include "stid/training.hpp"

namespace stid {

inline constexpr double kDefaultMapeFloor = 1e-3;

struct Metrics {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> mape_pct;  ///< empty when no target clears the MAPE floor
  std::size_t valid_count = 0;
  std::size_t mape_count = 0;
};

/// MAE, RMSE and MAPE over entries with mask set. MAPE additionally skips
/// targets with |y| < mape_floor. Throws DataError if the mask selects nothing.
Metrics metrics(const Matrix& pred, const Matrix& target, const Mask& mask,
                double mape_floor = kDefaultMapeFloor);

struct HorizonRow {
  std::string label;        ///< "@3", "@6", "@12" or "avg"
  std::size_t horizon = 0;  ///< 1-based step; 0 for the average row
  Metrics metrics;
  std::size_t masked_count = 0;
};

/// Metrics at steps 3, 6, 12 (those within F) and pooled over all F steps.
struct HorizonReport {
  std::vector<HorizonRow> rows;
  double mape_floor = kDefaultMapeFloor;

  const HorizonRow& average() const { return rows.back(); }
};

/// `pred`, `target` and `mask` have one row per (window, variable) and F columns.
HorizonReport horizon_report(const Matrix& pred, const Matrix& target, const Mask& mask,
                             double mape_floor = kDefaultMapeFloor);

/// `horizon,mae,rmse,mape_pct,valid_count`
void write_horizon_report_csv(const HorizonReport& report, const std::filesystem::path& path);
/// Human-readable aligned table.
std::string format_horizon_report(const HorizonReport& report);

/// Historical Inertia: the forecast is the last F history values, in order.
Matrix hi_baseline(const Matrix& histories, std::size_t horizon);
std::vector<std::vector<double>> hi_baseline(const std::vector<WindowSample>& windows);

/// Evaluates a trained model on a set of origins, in original units.
HorizonReport evaluate_model(const StidParams& params, const StidConfig& config,
                             const PreparedData& data, std::span<const std::size_t> origins,
                             double mape_floor = kDefaultMapeFloor);

/// Evaluates Historical Inertia on a set of origins, in original units.
HorizonReport evaluate_hi(const PreparedData& data, std::span<const std::size_t> origins,
                          double mape_floor = kDefaultMapeFloor);

struct AblationResult {
  std::string variant;  ///< "full", "w/o E", "w/o T^TiD", "w/o T^DiW"
  StidConfig config;
  HorizonRow average;   ///< test-set average row
  double best_val_mae = 0.0;
};

/// Trains the full model and the three single-identity ablations with
/// identical seeds and training settings; reports test metrics for each.
std::vector<AblationResult> run_ablation(const PreparedData& data, const StidConfig& base,
                                         const TrainConfig& train,
                                         double mape_floor = kDefaultMapeFloor);

/// `variant,mae,rmse,mape_pct,valid_count`
void write_ablation_csv(const std::vector<AblationResult>& results,
                        const std::filesystem::path& path);

/// Writes E.csv, T_tid.csv and T_diw.csv (tables that exist) into out_dir.
/// Each has a header, then `index,v_0,...,v_{D-1}` per row.
std::vector<std::filesystem::path> export_embeddings(const StidParams& params,
                                                     const std::filesystem::path& out_dir);

}  // namespace stid
