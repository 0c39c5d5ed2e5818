#include "stid/model.hpp"

#include <cmath>
#include <sstream>

#include "stid/error.hpp"
#include "stid/rng.hpp"

namespace stid {
namespace {

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(name + ": expected (" + std::to_string(rows) + " x " + std::to_string(cols) +
                     "), got " + m.shape_str());
  }
}

std::string layer_name(std::size_t l, const char* field) {
  return "layer" + std::to_string(l) + "." + field;
}

// Scatter-adds rows of a gradient segment into an identity table.
void scatter_rows(Matrix& table, const Matrix& grad, std::size_t offset,
                  std::span<const std::size_t> index) {
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    auto dst = table.row(index[r]);
    const auto src = grad.row(r).subspan(offset, table.cols());
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
}

}  // namespace

std::size_t StidConfig::width() const noexcept {
  return hidden_dim + (use_spatial ? spatial_width() : 0) + (use_tid ? tid_width() : 0) +
         (use_diw ? diw_width() : 0);
}

void StidConfig::validate() const {
  const std::pair<const char*, std::size_t> counts[] = {
      {"num_vars", num_vars},     {"history_len", history_len},
      {"horizon", horizon},       {"hidden_dim", hidden_dim},
      {"num_layers", num_layers}, {"slots_per_day", slots_per_day}};
  for (const auto& [name, value] : counts) {
    if (value == 0) throw ConfigError(std::string("StidConfig.") + name + " must be >= 1");
  }
}

std::string StidConfig::describe() const {
  std::ostringstream os;
  os << "N=" << num_vars << " P=" << history_len << " F=" << horizon << " D=" << hidden_dim
     << " L=" << num_layers << " N_d=" << slots_per_day << " spatial=" << use_spatial
     << " tid=" << use_tid << " diw=" << use_diw;
  if (spatial_dim || tid_dim || diw_dim) {
    os << " dims=" << spatial_width() << "/" << tid_width() << "/" << diw_width();
  }
  return os.str();
}

StidParams StidParams::zeros(const StidConfig& config) {
  config.validate();
  const std::size_t C = config.width();
  StidParams p;
  p.emb_weight = Matrix(config.hidden_dim, config.history_len);
  p.emb_bias = Matrix(1, config.hidden_dim);
  if (config.use_spatial) p.spatial = Matrix(config.num_vars, config.spatial_width());
  if (config.use_tid) p.time_of_day = Matrix(config.slots_per_day, config.tid_width());
  if (config.use_diw) p.day_of_week = Matrix(kDaysPerWeek, config.diw_width());
  p.layers.resize(config.num_layers);
  for (auto& layer : p.layers) {
    layer.fc1_weight = Matrix(C, C);
    layer.fc1_bias = Matrix(1, C);
    layer.fc2_weight = Matrix(C, C);
    layer.fc2_bias = Matrix(1, C);
  }
  p.reg_weight = Matrix(config.horizon, C);
  p.reg_bias = Matrix(1, config.horizon);
  return p;
}

std::size_t StidParams::num_values() const noexcept {
  std::size_t n = 0;
  for_each_tensor(*this, [&n](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

void for_each_tensor(StidParams& p, const std::function<void(const std::string&, Matrix&)>& fn) {
  fn("emb_weight", p.emb_weight);
  fn("emb_bias", p.emb_bias);
  fn("spatial", p.spatial);
  fn("time_of_day", p.time_of_day);
  fn("day_of_week", p.day_of_week);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    fn(layer_name(l, "fc1_weight"), p.layers[l].fc1_weight);
    fn(layer_name(l, "fc1_bias"), p.layers[l].fc1_bias);
    fn(layer_name(l, "fc2_weight"), p.layers[l].fc2_weight);
    fn(layer_name(l, "fc2_bias"), p.layers[l].fc2_bias);
  }
  fn("reg_weight", p.reg_weight);
  fn("reg_bias", p.reg_bias);
}

void for_each_tensor(const StidParams& p,
                     const std::function<void(const std::string&, const Matrix&)>& fn) {
  for_each_tensor(const_cast<StidParams&>(p),
                  [&fn](const std::string& name, Matrix& m) { fn(name, m); });
}

void for_each_tensor_pair(StidParams& a, const StidParams& b,
                          const std::function<void(const std::string&, Matrix&, const Matrix&)>& fn) {
  std::vector<const Matrix*> others;
  for_each_tensor(b, [&others](const std::string&, const Matrix& m) { others.push_back(&m); });
  std::size_t i = 0;
  for_each_tensor(a, [&](const std::string& name, Matrix& m) {
    if (i >= others.size()) throw ShapeError("tensor sets differ in layer count");
    const Matrix& o = *others[i++];
    if (o.rows() != m.rows() || o.cols() != m.cols()) {
      throw ShapeError(name + ": " + m.shape_str() + " vs " + o.shape_str());
    }
    fn(name, m, o);
  });
  if (i != others.size()) throw ShapeError("tensor sets differ in layer count");
}

StidParams init_params(const StidConfig& config, std::uint64_t seed) {
  StidParams p = StidParams::zeros(config);
  for_each_tensor(p, [&](const std::string& name, Matrix& m) {
    if (m.empty() || name.ends_with("bias")) return;
    Rng rng = Rng::substream(seed, name);
    if (name == "spatial" || name == "time_of_day" || name == "day_of_week") {
      m = init_uniform(m.rows(), m.cols(), 1.0 / std::sqrt(static_cast<double>(m.cols())), rng);
    } else {
      m = init_glorot_uniform(m.cols(), m.rows(), rng);
    }
  });
  return p;
}

std::size_t count_parameters(const StidConfig& c) {
  c.validate();
  const std::size_t C = c.width();
  return c.hidden_dim * c.history_len + c.hidden_dim +
         (c.use_spatial ? c.num_vars * c.spatial_width() : 0) +
         (c.use_tid ? c.slots_per_day * c.tid_width() : 0) +
         (c.use_diw ? kDaysPerWeek * c.diw_width() : 0) + c.num_layers * 2 * (C * C + C) +
         c.horizon * C + c.horizon;
}

void check_params(const StidParams& p, const StidConfig& config) {
  const StidParams expected = StidParams::zeros(config);
  StidParams copy = expected;
  for_each_tensor_pair(copy, p, [](const std::string&, Matrix&, const Matrix&) {});
}

Matrix embed_history(const StidParams& params, const Matrix& histories) {
  if (histories.cols() != params.emb_weight.cols()) {
    throw ShapeError("embed_history: histories " + histories.shape_str() + " vs embedding weight " +
                     params.emb_weight.shape_str());
  }
  Matrix h = matmul_transposed(histories, params.emb_weight);
  add_row_broadcast(h, params.emb_bias);
  return h;
}

Matrix attach_identities(const StidParams& params, const Matrix& hidden, const IdentityIndices& idx,
                         const StidConfig& config) {
  const std::size_t B = hidden.rows();
  if (hidden.cols() != config.hidden_dim) {
    throw ShapeError("attach_identities: hidden " + hidden.shape_str() + " but D=" +
                     std::to_string(config.hidden_dim));
  }
  if (idx.var.size() != B || idx.tid.size() != B || idx.diw.size() != B) {
    throw ShapeError("attach_identities: index arrays must have one entry per row");
  }
  const auto check_table = [](bool used, const Matrix& table, std::span<const std::size_t> ids,
                              std::size_t limit, const char* what) {
    if (!used) return;
    if (table.rows() != limit) {
      throw ShapeError(std::string("attach_identities: ") + what + " table has " +
                       std::to_string(table.rows()) + " rows, expected " + std::to_string(limit));
    }
    for (std::size_t id : ids) {
      if (id >= limit) {
        throw ShapeError(std::string("attach_identities: ") + what + " index " + std::to_string(id) +
                         " out of range [0, " + std::to_string(limit) + ")");
      }
    }
  };
  check_table(config.use_spatial, params.spatial, idx.var, config.num_vars, "spatial");
  check_table(config.use_tid, params.time_of_day, idx.tid, config.slots_per_day, "time-of-day");
  check_table(config.use_diw, params.day_of_week, idx.diw, kDaysPerWeek, "day-of-week");

  Matrix z(B, config.width());
  for (std::size_t r = 0; r < B; ++r) {
    auto dst = z.row(r).begin();
    dst = std::copy(hidden.row(r).begin(), hidden.row(r).end(), dst);
    if (config.use_spatial) {
      const auto e = params.spatial.row(idx.var[r]);
      dst = std::copy(e.begin(), e.end(), dst);
    }
    if (config.use_tid) {
      const auto e = params.time_of_day.row(idx.tid[r]);
      dst = std::copy(e.begin(), e.end(), dst);
    }
    if (config.use_diw) {
      const auto e = params.day_of_week.row(idx.diw[r]);
      std::copy(e.begin(), e.end(), dst);
    }
  }
  return z;
}

namespace {

struct LayerTrace {
  Matrix pre;
  Matrix act;
  Matrix out;
};

LayerTrace run_layer(const MlpLayerParams& layer, const Matrix& z) {
  LayerTrace t;
  t.pre = matmul_transposed(z, layer.fc1_weight);
  add_row_broadcast(t.pre, layer.fc1_bias);
  t.act = relu(t.pre);
  t.out = matmul_transposed(t.act, layer.fc2_weight);
  add_row_broadcast(t.out, layer.fc2_bias);
  t.out = elementwise(t.out, z, ElementOp::kAdd);
  return t;
}

}  // namespace

Matrix mlp_layer(const StidParams& params, std::size_t layer, const Matrix& z) {
  if (layer >= params.layers.size()) {
    throw ShapeError("mlp_layer: layer " + std::to_string(layer) + " of " +
                     std::to_string(params.layers.size()));
  }
  const auto& lp = params.layers[layer];
  if (z.cols() != lp.fc1_weight.cols()) {
    throw ShapeError("mlp_layer: input " + z.shape_str() + " vs weight " + lp.fc1_weight.shape_str());
  }
  return run_layer(lp, z).out;
}

Matrix regress(const StidParams& params, const Matrix& z) {
  if (z.cols() != params.reg_weight.cols()) {
    throw ShapeError("regress: input " + z.shape_str() + " vs weight " + params.reg_weight.shape_str());
  }
  Matrix y = matmul_transposed(z, params.reg_weight);
  add_row_broadcast(y, params.reg_bias);
  return y;
}

ForwardResult forward(const StidParams& params, const StidConfig& config, const Batch& batch) {
  if (batch.size() == 0) throw ShapeError("forward: empty batch");
  if (batch.history.cols() != config.history_len) {
    throw ShapeError("forward: batch history " + batch.history.shape_str() + " but P=" +
                     std::to_string(config.history_len));
  }
  check_params(params, config);

  ForwardResult res;
  ForwardCache& cache = res.cache;
  cache.config = config;
  cache.histories = batch.history;
  cache.var = batch.var;
  cache.tid = batch.tid;
  cache.diw = batch.diw;
  cache.spatial_offset = config.hidden_dim;
  cache.tid_offset = cache.spatial_offset + (config.use_spatial ? config.spatial_width() : 0);
  cache.diw_offset = cache.tid_offset + (config.use_tid ? config.tid_width() : 0);

  const Matrix hidden = embed_history(params, batch.history);
  cache.layer_inputs.push_back(
      attach_identities(params, hidden, {batch.var, batch.tid, batch.diw}, config));
  for (const auto& layer : params.layers) {
    LayerTrace t = run_layer(layer, cache.layer_inputs.back());
    cache.pre_activations.push_back(std::move(t.pre));
    cache.activations.push_back(std::move(t.act));
    cache.layer_inputs.push_back(std::move(t.out));
  }
  res.prediction = regress(params, cache.layer_inputs.back());
  return res;
}

Matrix predict(const StidParams& params, const StidConfig& config, const Batch& batch) {
  if (batch.size() == 0) throw ShapeError("predict: empty batch");
  check_params(params, config);
  Matrix z = attach_identities(params, embed_history(params, batch.history),
                               {batch.var, batch.tid, batch.diw}, config);
  for (const auto& layer : params.layers) z = run_layer(layer, z).out;
  return regress(params, z);
}

StidParams backward(const StidParams& params, const StidConfig& config, const ForwardCache& cache,
                    const Matrix& grad_prediction) {
  if (!(cache.config == config) || cache.layer_inputs.size() != config.num_layers + 1) {
    throw ShapeError("backward: cache was produced for a different config (" +
                     cache.config.describe() + " vs " + config.describe() + ")");
  }
  check_params(params, config);
  const std::size_t B = cache.batch_size();
  require_shape(grad_prediction, B, config.horizon, "backward: dL/dprediction");

  StidParams g = StidParams::zeros(config);
  const Matrix& z_last = cache.layer_inputs.back();
  g.reg_weight = transposed_matmul(grad_prediction, z_last);
  g.reg_bias = column_sums(grad_prediction);
  Matrix dz = matmul(grad_prediction, params.reg_weight);

  for (std::size_t l = config.num_layers; l-- > 0;) {
    const auto& lp = params.layers[l];
    auto& lg = g.layers[l];
    // z_{l+1} = z_l + relu(z_l W1ᵀ + b1) W2ᵀ + b2
    lg.fc2_weight = transposed_matmul(dz, cache.activations[l]);
    lg.fc2_bias = column_sums(dz);
    Matrix d_pre = elementwise(matmul(dz, lp.fc2_weight), relu_grad_mask(cache.pre_activations[l]),
                               ElementOp::kMul);
    lg.fc1_weight = transposed_matmul(d_pre, cache.layer_inputs[l]);
    lg.fc1_bias = column_sums(d_pre);
    dz = elementwise(dz, matmul(d_pre, lp.fc1_weight), ElementOp::kAdd);
  }

  const Matrix d_hidden = slice_columns(dz, 0, config.hidden_dim);
  g.emb_weight = transposed_matmul(d_hidden, cache.histories);
  g.emb_bias = column_sums(d_hidden);
  if (config.use_spatial) scatter_rows(g.spatial, dz, cache.spatial_offset, cache.var);
  if (config.use_tid) scatter_rows(g.time_of_day, dz, cache.tid_offset, cache.tid);
  if (config.use_diw) scatter_rows(g.day_of_week, dz, cache.diw_offset, cache.diw);
  return g;
}

}  // namespace stid
