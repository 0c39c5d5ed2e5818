#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stid/data.hpp"
#include "stid/model.hpp"
#include "stid/training.hpp"

namespace stid {

/// Experiment settings read from a `key = value` file plus command-line overrides.
struct RunConfig {
  std::filesystem::path dataset;
  std::size_t p = 12;
  std::size_t f = 12;
  std::size_t d = 32;
  std::size_t layers = 3;
  double lr = 0.001;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  SplitSpec split;
  NormMode normalization = NormMode::kGlobalZScore;
  bool use_spatial = true;
  bool use_tid = true;
  bool use_diw = true;
  std::size_t spatial_dim = 0;
  std::size_t tid_dim = 0;
  std::size_t diw_dim = 0;
  double mape_floor = 1e-3;
  std::optional<double> missing_value;
  double clip_grad_norm = 0.0;
  std::filesystem::path out = "out";

  /// Sets one key from its textual value; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);

  /// Every key with its current value, one `key = value` per line; parse() reads it back.
  std::string to_text() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  static const std::vector<std::string>& keys();

  TrainConfig train_config() const;
  /// Model config for a dataset with `num_vars` variables and `slots_per_day` slots.
  StidConfig model_config(std::size_t num_vars, std::size_t slots_per_day) const;
};

}  // namespace stid
