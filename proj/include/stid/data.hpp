#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stid/matrix.hpp"

namespace stid {

inline constexpr std::size_t kDaysPerWeek = 7;
inline constexpr std::size_t kMinutesPerDay = 1440;

/// Time attributes of row 0 of a series.
struct TimeAnchor {
  std::size_t tid = 0;  ///< slot within the day
  std::size_t diw = 0;  ///< day of week, 0 = Monday

  friend bool operator==(const TimeAnchor&, const TimeAnchor&) = default;
};

struct TimeFeatures {
  std::size_t tid = 0;
  std::size_t diw = 0;

  friend bool operator==(const TimeFeatures&, const TimeFeatures&) = default;
};

/// A T x N multivariate series on a regular clock.
///
/// `valid` marks observed cells; invalid cells hold 0 in `values` and are
/// excluded from normalization statistics, losses and metrics.
/// `origin_stride`/`origin_phase` restrict which forecast origins are
/// windowed (t % stride == phase); the default admits every origin.
struct RawSeries {
  std::string name;
  std::vector<std::string> var_names;
  std::size_t interval_minutes = 5;
  TimeAnchor anchor;
  Matrix values;
  Mask valid;
  std::size_t origin_stride = 1;
  std::size_t origin_phase = 0;

  std::size_t num_slots() const noexcept { return values.rows(); }
  std::size_t num_vars() const noexcept { return values.cols(); }
  std::size_t slots_per_day() const noexcept { return kMinutesPerDay / interval_minutes; }

  /// Checks the structural invariants; throws DataError.
  void validate() const;
};

struct CsvOptions {
  /// Cells equal to this value are treated as missing.
  std::optional<double> missing_sentinel;
};

/// Reads the dataset CSV format (timestamped or directive header).
RawSeries load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
/// Writes `series` in the directive-header form; load_csv reads it back unchanged.
void save_csv(const RawSeries& series, const std::filesystem::path& path);

/// Days since 1970-01-01 in the proleptic Gregorian calendar.
std::int64_t days_from_civil(std::int64_t year, unsigned month, unsigned day) noexcept;
/// 0 = Monday.
std::size_t weekday_from_days(std::int64_t days) noexcept;

TimeFeatures derive_time_features(std::size_t row_index, TimeAnchor anchor,
                                  std::size_t slots_per_day);

/// One (variable, forecast origin) instance. `origin` is the first future slot.
struct WindowSample {
  std::size_t var = 0;
  std::size_t origin = 0;
  std::vector<double> history;
  std::vector<double> future;
  std::size_t tid = 0;
  std::size_t diw = 0;
  std::vector<std::uint8_t> future_mask;
};

/// Admissible forecast origins in ascending order: P <= t <= T - F, filtered by
/// the series' origin stride/phase. Throws DataError if T < P + F.
std::vector<std::size_t> window_origins(const RawSeries& series, std::size_t history_len,
                                        std::size_t horizon);

WindowSample make_window(const RawSeries& series, std::size_t var, std::size_t origin,
                         std::size_t history_len, std::size_t horizon);

/// All variables x all admissible origins, origin-major.
std::vector<WindowSample> make_windows(const RawSeries& series, std::size_t history_len,
                                       std::size_t horizon);

/// Dense batch of samples, one row per (origin, variable) pair.
struct Batch {
  Matrix history;  ///< B x P
  Matrix target;   ///< B x F
  Mask target_mask;
  std::vector<std::size_t> var;
  std::vector<std::size_t> tid;
  std::vector<std::size_t> diw;

  std::size_t size() const noexcept { return var.size(); }
};

Batch make_batch(std::span<const WindowSample> samples);
/// Every variable for each origin in `origins`; rows are origin-major, variable-minor.
Batch gather_batch(const RawSeries& series, std::span<const std::size_t> origins,
                   std::size_t history_len, std::size_t horizon);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct SplitOrigins {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Sorts origins and cuts them contiguously at floor(cumulative ratio * count).
SplitOrigins split_chronological(std::span<const std::size_t> origins, const SplitSpec& spec);

enum class NormMode { kGlobalZScore, kPerVariableZScore, kNone };

std::string to_string(NormMode mode);
NormMode parse_norm_mode(const std::string& text);

/// z-score transform fit on the training split.
class Normalizer {
 public:
  static constexpr double kMinStd = 1e-8;

  Normalizer() = default;
  Normalizer(NormMode mode, std::vector<double> means, std::vector<double> stds);

  NormMode mode() const noexcept { return mode_; }
  double mean(std::size_t var) const noexcept;
  double stddev(std::size_t var) const noexcept;

  double apply(double value, std::size_t var) const noexcept;
  double invert(double value, std::size_t var) const noexcept;

  /// Normalized copy of the series; invalid cells are set to the normalized mean (0).
  RawSeries apply(const RawSeries& series) const;
  /// In-place inverse on batch-shaped values; `var_of_row` gives each row's variable.
  void invert_rows(Matrix& values, std::span<const std::size_t> var_of_row) const;

 private:
  NormMode mode_ = NormMode::kNone;
  std::vector<double> means_;
  std::vector<double> stds_;
};

/// Statistics over the valid cells covered by the histories of `train_origins`
/// (each cell counted once). Throws DataError if no valid cell is covered.
Normalizer fit_normalizer(const RawSeries& series, std::span<const std::size_t> train_origins,
                          std::size_t history_len, NormMode mode);

enum class SyntheticMode { kSpatial, kTemporal, kCombined };

std::string to_string(SyntheticMode mode);
SyntheticMode parse_synthetic_mode(const std::string& text);

/// Parameters of the indistinguishable-sample generator.
///
/// The series is cut into blocks of `block_period` slots (default P + F).
/// The first P slots of every block carry the same waveform; the next F slots
/// carry the continuation plus an offset that depends only on identity:
///   spatial  - variable 1 gets +gap (N = 2),
///   temporal - odd blocks of the day get +gap (N = 1),
///   combined - both of the above plus +weekly_gap on Saturday/Sunday (N = 2).
/// Windows are taken at block-aligned origins only, so histories never reveal
/// the offset.
struct SyntheticSpec {
  SyntheticMode mode = SyntheticMode::kSpatial;
  std::size_t num_days = 14;
  std::size_t interval_minutes = 5;
  std::size_t history_len = 12;
  std::size_t horizon = 12;
  std::size_t block_period = 0;  ///< 0 selects history_len + horizon
  double level = 50.0;
  double amplitude = 10.0;
  double gap = 10.0;
  double weekly_gap = 10.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

RawSeries gen_synthetic_indistinguishable(const SyntheticSpec& spec);

}  // namespace stid
