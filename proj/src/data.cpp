#include "stid/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <cstdio>

#include "stid/error.hpp"
#include "stid/rng.hpp"

namespace stid {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError("invalid " + what + ": '" + text + "'");
  return v;
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no) + ": ";
}

// Minutes since the epoch for "YYYY-MM-DDTHH:MM".
std::int64_t parse_timestamp(const std::string& text, const std::string& context) {
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0;
  char tail = 0;
  if (text.size() != 16 ||
      std::sscanf(text.c_str(), "%4d-%2u-%2uT%2u:%2u%c", &year, &month, &day, &hour, &minute,
                  &tail) != 5 ||
      text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' || month < 1 ||
      month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59) {
    throw DataError(context + "malformed timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM)");
  }
  return days_from_civil(year, month, day) * 1440 + hour * 60 + minute;
}

bool is_missing_token(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

}  // namespace

void RawSeries::validate() const {
  if (interval_minutes == 0 || kMinutesPerDay % interval_minutes != 0) {
    throw DataError("interval_minutes=" + std::to_string(interval_minutes) +
                    " does not divide 1440");
  }
  if (valid.rows() != values.rows() || valid.cols() != values.cols()) {
    throw DataError("validity mask shape does not match values " + values.shape_str());
  }
  if (!values.all_finite()) throw DataError("series contains non-finite values");
  if (anchor.tid >= slots_per_day() || anchor.diw >= kDaysPerWeek) {
    throw DataError("anchor (tid=" + std::to_string(anchor.tid) + ", diw=" +
                    std::to_string(anchor.diw) + ") out of range");
  }
  if (origin_stride == 0 || origin_phase >= origin_stride) {
    throw DataError("origin_phase must be < origin_stride");
  }
  if (!var_names.empty() && var_names.size() != num_vars()) {
    throw DataError("variable name count does not match column count");
  }
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) noexcept {
  // Howard Hinnant's civil-calendar algorithm.
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::size_t weekday_from_days(std::int64_t days) noexcept {
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  const std::int64_t w = (days + 3) % 7;
  return static_cast<std::size_t>(w < 0 ? w + 7 : w);
}

RawSeries load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");

  RawSeries series;
  series.name = path.stem().string();
  std::optional<std::size_t> interval, anchor_tid, anchor_diw;

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = trim(std::string_view(t).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (key == "interval_minutes") {
        interval = parse_count(value, key);
      } else if (key == "anchor_tid") {
        anchor_tid = parse_count(value, key);
      } else if (key == "anchor_diw") {
        anchor_diw = parse_count(value, key);
      } else if (key == "origin_stride") {
        series.origin_stride = parse_count(value, key);
      } else if (key == "origin_phase") {
        series.origin_phase = parse_count(value, key);
      } else if (key == "name") {
        series.name = value;
      } else {
        throw DataError(where(path, line_no) + "unknown directive '" + key + "'");
      }
      continue;
    }
    header = split_fields(t);
    break;
  }
  if (header.empty()) throw DataError(path.string() + ": missing header row");

  const bool timestamped = header.front() == "timestamp";
  const std::size_t first_value_col = timestamped ? 1 : 0;
  if (header.size() <= first_value_col) {
    throw DataError(where(path, line_no) + "header has no value columns");
  }
  for (std::size_t c = first_value_col; c < header.size(); ++c) {
    if (header[c].empty()) throw DataError(where(path, line_no) + "empty column name in header");
    series.var_names.push_back(header[c]);
  }
  const std::size_t num_vars = series.var_names.size();

  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  std::vector<std::int64_t> stamps;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    if (fields.size() != header.size()) {
      throw DataError(where(path, line_no) + "expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    if (timestamped) stamps.push_back(parse_timestamp(fields[0], where(path, line_no)));
    for (std::size_t c = first_value_col; c < fields.size(); ++c) {
      const std::string& cell = fields[c];
      if (is_missing_token(cell)) {
        values.push_back(0.0);
        valid.push_back(0);
        continue;
      }
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw DataError(where(path, line_no) + "non-numeric cell '" + cell + "' in column '" +
                        header[c] + "'");
      }
      const bool missing = options.missing_sentinel && v == *options.missing_sentinel;
      values.push_back(missing ? 0.0 : v);
      valid.push_back(missing ? 0 : 1);
    }
  }
  const std::size_t num_slots = values.size() / num_vars;
  if (num_slots == 0) throw DataError(path.string() + ": no data rows");

  if (timestamped) {
    if (stamps.size() >= 2) {
      const std::int64_t stride = stamps[1] - stamps[0];
      if (stride <= 0) throw DataError(path.string() + ": timestamps must increase");
      for (std::size_t i = 2; i < stamps.size(); ++i) {
        if (stamps[i] - stamps[i - 1] != stride) {
          throw DataError(path.string() + ": non-constant timestamp stride at data row " +
                          std::to_string(i));
        }
      }
      if (interval && *interval != static_cast<std::size_t>(stride)) {
        throw DataError(path.string() + ": interval_minutes directive disagrees with timestamps");
      }
      interval = static_cast<std::size_t>(stride);
    }
    const std::size_t iv = interval.value_or(5);
    const std::int64_t day = stamps[0] >= 0 ? stamps[0] / 1440 : (stamps[0] - 1439) / 1440;
    const auto minute_of_day = static_cast<std::size_t>(stamps[0] - day * 1440);
    if (iv == 0 || minute_of_day % iv != 0) {
      throw DataError(path.string() + ": first timestamp is not aligned to the sampling interval");
    }
    series.anchor = {minute_of_day / iv, weekday_from_days(day)};
    series.interval_minutes = iv;
  } else {
    series.interval_minutes = interval.value_or(5);
    series.anchor = {anchor_tid.value_or(0), anchor_diw.value_or(0)};
  }

  series.values = Matrix(num_slots, num_vars, std::move(values));
  series.valid = Mask(num_slots, num_vars);
  for (std::size_t r = 0; r < num_slots; ++r) {
    for (std::size_t c = 0; c < num_vars; ++c) series.valid.set(r, c, valid[r * num_vars + c] != 0);
  }
  series.validate();
  return series;
}

void save_csv(const RawSeries& series, const std::filesystem::path& path) {
  series.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
  out << "# name=" << series.name << '\n';
  out << "# interval_minutes=" << series.interval_minutes << '\n';
  out << "# anchor_tid=" << series.anchor.tid << '\n';
  out << "# anchor_diw=" << series.anchor.diw << '\n';
  if (series.origin_stride != 1 || series.origin_phase != 0) {
    out << "# origin_stride=" << series.origin_stride << '\n';
    out << "# origin_phase=" << series.origin_phase << '\n';
  }
  for (std::size_t c = 0; c < series.num_vars(); ++c) {
    if (c) out << ',';
    out << (series.var_names.empty() ? "var_" + std::to_string(c) : series.var_names[c]);
  }
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < series.num_slots(); ++r) {
    for (std::size_t c = 0; c < series.num_vars(); ++c) {
      if (c) out << ',';
      if (!series.valid(r, c)) continue;
      const auto res = std::to_chars(buf, buf + sizeof buf, series.values(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing dataset '" + path.string() + "'");
}

TimeFeatures derive_time_features(std::size_t row_index, TimeAnchor anchor,
                                  std::size_t slots_per_day) {
  if (slots_per_day == 0) throw DataError("derive_time_features: slots_per_day must be >= 1");
  const std::size_t absolute = anchor.tid + row_index;
  return {absolute % slots_per_day, (anchor.diw + absolute / slots_per_day) % kDaysPerWeek};
}

std::vector<std::size_t> window_origins(const RawSeries& series, std::size_t history_len,
                                        std::size_t horizon) {
  const std::size_t T = series.num_slots();
  if (history_len == 0 || horizon == 0) throw DataError("history and horizon must be >= 1");
  if (T < history_len + horizon) {
    throw DataError("series too short: T=" + std::to_string(T) + " < P+F=" +
                    std::to_string(history_len + horizon));
  }
  std::vector<std::size_t> origins;
  for (std::size_t t = history_len; t + horizon <= T; ++t) {
    if (t % series.origin_stride == series.origin_phase) origins.push_back(t);
  }
  return origins;
}

WindowSample make_window(const RawSeries& series, std::size_t var, std::size_t origin,
                         std::size_t history_len, std::size_t horizon) {
  if (var >= series.num_vars() || origin < history_len || origin + horizon > series.num_slots()) {
    throw DataError("make_window: (var=" + std::to_string(var) + ", origin=" +
                    std::to_string(origin) + ") outside the series");
  }
  WindowSample w;
  w.var = var;
  w.origin = origin;
  w.history.reserve(history_len);
  for (std::size_t t = origin - history_len; t < origin; ++t) w.history.push_back(series.values(t, var));
  w.future.reserve(horizon);
  w.future_mask.reserve(horizon);
  for (std::size_t t = origin; t < origin + horizon; ++t) {
    w.future.push_back(series.values(t, var));
    w.future_mask.push_back(series.valid(t, var) ? 1 : 0);
  }
  const auto tf = derive_time_features(origin, series.anchor, series.slots_per_day());
  w.tid = tf.tid;
  w.diw = tf.diw;
  return w;
}

std::vector<WindowSample> make_windows(const RawSeries& series, std::size_t history_len,
                                       std::size_t horizon) {
  const auto origins = window_origins(series, history_len, horizon);
  std::vector<WindowSample> out;
  out.reserve(origins.size() * series.num_vars());
  for (std::size_t t : origins) {
    for (std::size_t v = 0; v < series.num_vars(); ++v) {
      out.push_back(make_window(series, v, t, history_len, horizon));
    }
  }
  return out;
}

Batch make_batch(std::span<const WindowSample> samples) {
  if (samples.empty()) throw DataError("make_batch: empty sample list");
  const std::size_t P = samples.front().history.size();
  const std::size_t F = samples.front().future.size();
  Batch b;
  b.history = Matrix(samples.size(), P);
  b.target = Matrix(samples.size(), F);
  b.target_mask = Mask(samples.size(), F);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& s = samples[r];
    if (s.history.size() != P || s.future.size() != F || s.future_mask.size() != F) {
      throw ShapeError("make_batch: samples have inconsistent history/future lengths");
    }
    std::copy(s.history.begin(), s.history.end(), b.history.row(r).begin());
    std::copy(s.future.begin(), s.future.end(), b.target.row(r).begin());
    for (std::size_t j = 0; j < F; ++j) b.target_mask.set(r, j, s.future_mask[j] != 0);
    b.var.push_back(s.var);
    b.tid.push_back(s.tid);
    b.diw.push_back(s.diw);
  }
  return b;
}

Batch gather_batch(const RawSeries& series, std::span<const std::size_t> origins,
                   std::size_t history_len, std::size_t horizon) {
  const std::size_t N = series.num_vars();
  const std::size_t rows = origins.size() * N;
  Batch b;
  b.history = Matrix(rows, history_len);
  b.target = Matrix(rows, horizon);
  b.target_mask = Mask(rows, horizon);
  b.var.reserve(rows);
  b.tid.reserve(rows);
  b.diw.reserve(rows);
  std::size_t r = 0;
  for (std::size_t origin : origins) {
    if (origin < history_len || origin + horizon > series.num_slots()) {
      throw DataError("gather_batch: origin " + std::to_string(origin) + " outside the series");
    }
    const auto tf = derive_time_features(origin, series.anchor, series.slots_per_day());
    for (std::size_t v = 0; v < N; ++v, ++r) {
      for (std::size_t k = 0; k < history_len; ++k) {
        b.history(r, k) = series.values(origin - history_len + k, v);
      }
      for (std::size_t k = 0; k < horizon; ++k) {
        b.target(r, k) = series.values(origin + k, v);
        b.target_mask.set(r, k, series.valid(origin + k, v));
      }
      b.var.push_back(v);
      b.tid.push_back(tf.tid);
      b.diw.push_back(tf.diw);
    }
  }
  return b;
}

SplitOrigins split_chronological(std::span<const std::size_t> origins, const SplitSpec& spec) {
  const double total = spec.train + spec.val + spec.test;
  if (spec.train < 0 || spec.val < 0 || spec.test < 0 || std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  std::vector<std::size_t> sorted(origins.begin(), origins.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // The epsilon absorbs representation error in sums such as 0.7 + 0.1.
  const auto cut = [n](double ratio) { return static_cast<std::size_t>(std::floor(ratio * n + 1e-9)); };
  const std::size_t train_end = cut(spec.train);
  const std::size_t val_end = std::max(train_end, cut(spec.train + spec.val));
  SplitOrigins out;
  out.train.assign(sorted.begin(), sorted.begin() + train_end);
  out.val.assign(sorted.begin() + train_end, sorted.begin() + val_end);
  out.test.assign(sorted.begin() + val_end, sorted.end());
  if (out.train.empty() || out.val.empty() || out.test.empty()) {
    throw DataError("split_chronological: " + std::to_string(sorted.size()) +
                    " origins give an empty split (" + std::to_string(out.train.size()) + ", " +
                    std::to_string(out.val.size()) + ", " + std::to_string(out.test.size()) + ")");
  }
  return out;
}

std::string to_string(NormMode mode) {
  switch (mode) {
    case NormMode::kGlobalZScore: return "global-zscore";
    case NormMode::kPerVariableZScore: return "per-variable-zscore";
    case NormMode::kNone: return "none";
  }
  return "none";
}

NormMode parse_norm_mode(const std::string& text) {
  if (text == "global-zscore") return NormMode::kGlobalZScore;
  if (text == "per-variable-zscore") return NormMode::kPerVariableZScore;
  if (text == "none") return NormMode::kNone;
  throw ConfigError("unknown normalization mode '" + text + "'");
}

Normalizer::Normalizer(NormMode mode, std::vector<double> means, std::vector<double> stds)
    : mode_(mode), means_(std::move(means)), stds_(std::move(stds)) {
  if (means_.size() != stds_.size()) throw ConfigError("Normalizer: means/stds size mismatch");
  for (double& s : stds_) s = std::max(s, kMinStd);
}

double Normalizer::mean(std::size_t var) const noexcept {
  if (means_.empty()) return 0.0;
  return means_.size() == 1 ? means_[0] : means_[var];
}

double Normalizer::stddev(std::size_t var) const noexcept {
  if (stds_.empty()) return 1.0;
  return stds_.size() == 1 ? stds_[0] : stds_[var];
}

double Normalizer::apply(double value, std::size_t var) const noexcept {
  return (value - mean(var)) / stddev(var);
}

double Normalizer::invert(double value, std::size_t var) const noexcept {
  return value * stddev(var) + mean(var);
}

RawSeries Normalizer::apply(const RawSeries& series) const {
  RawSeries out = series;
  for (std::size_t t = 0; t < out.num_slots(); ++t) {
    for (std::size_t v = 0; v < out.num_vars(); ++v) {
      out.values(t, v) = series.valid(t, v) ? apply(series.values(t, v), v) : 0.0;
    }
  }
  return out;
}

void Normalizer::invert_rows(Matrix& values, std::span<const std::size_t> var_of_row) const {
  if (var_of_row.size() != values.rows()) throw ShapeError("invert_rows: row/variable count mismatch");
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (double& x : values.row(r)) x = invert(x, var_of_row[r]);
  }
}

Normalizer fit_normalizer(const RawSeries& series, std::span<const std::size_t> train_origins,
                          std::size_t history_len, NormMode mode) {
  const std::size_t N = series.num_vars();
  if (train_origins.empty()) throw DataError("fit_normalizer: empty training split");
  std::vector<std::uint8_t> covered(series.num_slots(), 0);
  for (std::size_t t : train_origins) {
    if (t < history_len || t > series.num_slots()) throw DataError("fit_normalizer: bad origin");
    std::fill(covered.begin() + static_cast<std::ptrdiff_t>(t - history_len),
              covered.begin() + static_cast<std::ptrdiff_t>(t), std::uint8_t{1});
  }
  const std::size_t groups = mode == NormMode::kPerVariableZScore ? N : 1;
  std::vector<double> sum(groups, 0.0), count(groups, 0.0);
  for (std::size_t t = 0; t < series.num_slots(); ++t) {
    if (!covered[t]) continue;
    for (std::size_t v = 0; v < N; ++v) {
      if (!series.valid(t, v)) continue;
      const std::size_t g = groups == 1 ? 0 : v;
      sum[g] += series.values(t, v);
      count[g] += 1.0;
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (count[g] == 0.0) {
      throw DataError("fit_normalizer: no valid training values" +
                      (groups == 1 ? std::string() : " for variable " + std::to_string(g)));
    }
  }
  if (mode == NormMode::kNone) return Normalizer(mode, {}, {});
  std::vector<double> means(groups), sq(groups, 0.0);
  for (std::size_t g = 0; g < groups; ++g) means[g] = sum[g] / count[g];
  for (std::size_t t = 0; t < series.num_slots(); ++t) {
    if (!covered[t]) continue;
    for (std::size_t v = 0; v < N; ++v) {
      if (!series.valid(t, v)) continue;
      const std::size_t g = groups == 1 ? 0 : v;
      const double d = series.values(t, v) - means[g];
      sq[g] += d * d;
    }
  }
  std::vector<double> stds(groups);
  for (std::size_t g = 0; g < groups; ++g) stds[g] = std::sqrt(sq[g] / count[g]);
  return Normalizer(mode, std::move(means), std::move(stds));
}

std::string to_string(SyntheticMode mode) {
  switch (mode) {
    case SyntheticMode::kSpatial: return "spatial";
    case SyntheticMode::kTemporal: return "temporal";
    case SyntheticMode::kCombined: return "combined";
  }
  return "spatial";
}

SyntheticMode parse_synthetic_mode(const std::string& text) {
  if (text == "spatial") return SyntheticMode::kSpatial;
  if (text == "temporal") return SyntheticMode::kTemporal;
  if (text == "combined") return SyntheticMode::kCombined;
  throw ConfigError("unknown synthetic mode '" + text + "'");
}

RawSeries gen_synthetic_indistinguishable(const SyntheticSpec& spec) {
  const std::size_t P = spec.history_len;
  const std::size_t F = spec.horizon;
  const std::size_t block = spec.block_period == 0 ? P + F : spec.block_period;
  if (P == 0 || F == 0 || spec.num_days == 0) throw ConfigError("synthetic: P, F and days must be >= 1");
  if (spec.interval_minutes == 0 || kMinutesPerDay % spec.interval_minutes != 0) {
    throw ConfigError("synthetic: interval_minutes must divide 1440");
  }
  if (!(spec.gap >= 0.0) || !(spec.noise_std >= 0.0) || !(spec.weekly_gap >= 0.0)) {
    throw ConfigError("synthetic: gap and noise must be non-negative");
  }
  if (P + F > block) {
    throw ConfigError("synthetic: infeasible geometry, P+F=" + std::to_string(P + F) +
                      " exceeds block period " + std::to_string(block));
  }
  const std::size_t slots_per_day = kMinutesPerDay / spec.interval_minutes;
  const bool alternating = spec.mode != SyntheticMode::kSpatial;
  const std::size_t day_multiple = alternating ? 2 * block : block;
  if (slots_per_day % day_multiple != 0) {
    throw ConfigError("synthetic: infeasible geometry, " + std::to_string(slots_per_day) +
                      " slots per day is not a multiple of " + std::to_string(day_multiple));
  }

  const std::size_t N = spec.mode == SyntheticMode::kTemporal ? 1 : 2;
  const std::size_t T = spec.num_days * slots_per_day;
  RawSeries s;
  s.name = "synthetic-" + to_string(spec.mode);
  for (std::size_t v = 0; v < N; ++v) s.var_names.push_back("var_" + std::to_string(v));
  s.interval_minutes = spec.interval_minutes;
  s.anchor = {0, 0};
  s.values = Matrix(T, N);
  s.valid = Mask(T, N, true);
  s.origin_stride = block;
  s.origin_phase = P;

  Rng rng(spec.seed);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t pos = t % block;
    const double base = spec.level + spec.amplitude * std::sin(2.0 * std::numbers::pi *
                                                               static_cast<double>(pos) /
                                                               static_cast<double>(block));
    const bool in_future = pos >= P && pos < P + F;
    const std::size_t block_in_day = (t % slots_per_day) / block;
    const std::size_t diw = (t / slots_per_day) % kDaysPerWeek;
    for (std::size_t v = 0; v < N; ++v) {
      double offset = 0.0;
      if (in_future) {
        switch (spec.mode) {
          case SyntheticMode::kSpatial:
            offset = v == 1 ? spec.gap : 0.0;
            break;
          case SyntheticMode::kTemporal:
            offset = block_in_day % 2 == 1 ? spec.gap : 0.0;
            break;
          case SyntheticMode::kCombined:
            offset = (v == 1 ? spec.gap : 0.0) + (block_in_day % 2 == 1 ? spec.gap : 0.0) +
                     (diw >= 5 ? spec.weekly_gap : 0.0);
            break;
        }
      }
      const double noise = spec.noise_std > 0.0 ? spec.noise_std * rng.normal() : 0.0;
      s.values(t, v) = base + offset + noise;
    }
  }
  return s;
}

}  // namespace stid
