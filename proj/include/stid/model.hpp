#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stid/data.hpp"
#include "stid/matrix.hpp"

namespace stid {

/// Architecture and ablation switches.
///
/// Identity tables default to the hidden width; a non-zero `*_dim` overrides a
/// single table's width (used e.g. for a 2-d day-of-week table meant for plotting).
struct StidConfig {
  std::size_t num_vars = 1;        ///< N
  std::size_t history_len = 12;    ///< P
  std::size_t horizon = 12;        ///< F
  std::size_t hidden_dim = 32;     ///< D
  std::size_t num_layers = 3;      ///< L
  std::size_t slots_per_day = 288; ///< N_d
  bool use_spatial = true;
  bool use_tid = true;
  bool use_diw = true;
  std::size_t spatial_dim = 0;
  std::size_t tid_dim = 0;
  std::size_t diw_dim = 0;

  std::size_t spatial_width() const noexcept { return spatial_dim ? spatial_dim : hidden_dim; }
  std::size_t tid_width() const noexcept { return tid_dim ? tid_dim : hidden_dim; }
  std::size_t diw_width() const noexcept { return diw_dim ? diw_dim : hidden_dim; }

  /// Width C of the concatenated representation (4D for the full model).
  std::size_t width() const noexcept;

  /// Throws ConfigError when a count is zero.
  void validate() const;

  std::string describe() const;

  friend bool operator==(const StidConfig&, const StidConfig&) = default;
};

struct MlpLayerParams {
  Matrix fc1_weight;  ///< C x C
  Matrix fc1_bias;    ///< 1 x C
  Matrix fc2_weight;  ///< C x C
  Matrix fc2_bias;    ///< 1 x C

  friend bool operator==(const MlpLayerParams&, const MlpLayerParams&) = default;
};

/// Every trainable tensor. Tables of disabled identities are left empty.
/// The same struct carries gradients and Adam moments.
struct StidParams {
  Matrix emb_weight;   ///< D x P
  Matrix emb_bias;     ///< 1 x D
  Matrix spatial;      ///< N x D   (E)
  Matrix time_of_day;  ///< N_d x D (T^TiD)
  Matrix day_of_week;  ///< 7 x D   (T^DiW)
  std::vector<MlpLayerParams> layers;
  Matrix reg_weight;   ///< F x C
  Matrix reg_bias;     ///< 1 x F

  /// Zero-filled tensors with the shapes `config` prescribes.
  static StidParams zeros(const StidConfig& config);

  std::size_t num_values() const noexcept;

  friend bool operator==(const StidParams&, const StidParams&) = default;
};

/// Visits tensors in the fixed serialization order with stable names
/// ("emb_weight", ..., "layer0.fc1_weight", ..., "reg_bias").
void for_each_tensor(StidParams& params, const std::function<void(const std::string&, Matrix&)>& fn);
void for_each_tensor(const StidParams& params,
                     const std::function<void(const std::string&, const Matrix&)>& fn);

/// Tensors visited together from several parameter-shaped structs.
void for_each_tensor_pair(StidParams& a, const StidParams& b,
                          const std::function<void(const std::string&, Matrix&, const Matrix&)>& fn);

/// Glorot-uniform FC weights, zero biases, identity tables uniform in
/// [-1/sqrt(width), 1/sqrt(width)]. Each tensor is drawn from its own seeded
/// substream keyed by name, so tensors common to two configs start identical.
StidParams init_params(const StidConfig& config, std::uint64_t seed);

/// Closed-form count of trainable scalars.
std::size_t count_parameters(const StidConfig& config);

/// Throws ShapeError unless every tensor has the shape `config` prescribes.
void check_params(const StidParams& params, const StidConfig& config);

Matrix embed_history(const StidParams& params, const Matrix& histories);

struct IdentityIndices {
  std::span<const std::size_t> var;
  std::span<const std::size_t> tid;
  std::span<const std::size_t> diw;
};

Matrix attach_identities(const StidParams& params, const Matrix& hidden, const IdentityIndices& idx,
                         const StidConfig& config);

Matrix mlp_layer(const StidParams& params, std::size_t layer, const Matrix& z);

Matrix regress(const StidParams& params, const Matrix& z);

/// Intermediate values kept by forward() for backward().
struct ForwardCache {
  StidConfig config;
  Matrix histories;                   ///< B x P
  std::vector<std::size_t> var, tid, diw;
  std::vector<Matrix> layer_inputs;   ///< z^0 .. z^L, each B x C
  std::vector<Matrix> pre_activations;///< FC1 outputs per layer
  std::vector<Matrix> activations;    ///< relu(FC1 outputs) per layer
  std::size_t spatial_offset = 0;     ///< column offsets of identity segments in z^0
  std::size_t tid_offset = 0;
  std::size_t diw_offset = 0;

  std::size_t batch_size() const noexcept { return var.size(); }
};

struct ForwardResult {
  Matrix prediction;  ///< B x F
  ForwardCache cache;
};

ForwardResult forward(const StidParams& params, const StidConfig& config, const Batch& batch);
/// Prediction only; no cache is retained.
Matrix predict(const StidParams& params, const StidConfig& config, const Batch& batch);

/// Reverse-mode gradients of a scalar loss given dL/dprediction (B x F).
StidParams backward(const StidParams& params, const StidConfig& config, const ForwardCache& cache,
                    const Matrix& grad_prediction);

/// Little-endian binary model file: 8-byte magic, u32 version, config as u64
/// fields, then every tensor in for_each_tensor order as raw IEEE-754 doubles.
void save_params(const StidParams& params, const StidConfig& config,
                 const std::filesystem::path& path);

struct LoadedModel {
  StidParams params;
  StidConfig config;
};

LoadedModel load_params(const std::filesystem::path& path);
/// As load_params, but throws ShapeError naming both configs if the file's
/// config differs from `expected`.
LoadedModel load_params(const std::filesystem::path& path, const StidConfig& expected);

}  // namespace stid
