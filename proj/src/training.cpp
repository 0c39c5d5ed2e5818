#include "stid/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "stid/error.hpp"

namespace stid {

LossResult mae_loss(const Matrix& pred, const Matrix& target, const Mask& mask) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() ||
      mask.rows() != pred.rows() || mask.cols() != pred.cols()) {
    throw ShapeError("mae_loss: prediction " + pred.shape_str() + ", target " + target.shape_str() +
                     ", mask (" + std::to_string(mask.rows()) + " x " +
                     std::to_string(mask.cols()) + ")");
  }
  LossResult res;
  res.valid_count = mask.count();
  if (res.valid_count == 0) throw DataError("mae_loss: no valid entries");
  const double scale = 1.0 / static_cast<double>(res.valid_count);
  res.grad = Matrix(pred.rows(), pred.cols());
  double sum = 0.0;
  for (std::size_t r = 0; r < pred.rows(); ++r) {
    for (std::size_t c = 0; c < pred.cols(); ++c) {
      if (!mask(r, c)) continue;
      const double e = pred(r, c) - target(r, c);
      sum += std::abs(e);
      res.grad(r, c) = e > 0.0 ? scale : (e < 0.0 ? -scale : 0.0);
    }
  }
  res.loss = sum * scale;
  return res;
}

void adam_update(std::span<double> w, std::span<const double> g, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamHyper& h) {
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    w[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

AdamState AdamState::fresh(const StidConfig& config, const AdamHyper& hyper) {
  AdamState s;
  s.hyper = hyper;
  s.m = StidParams::zeros(config);
  s.v = StidParams::zeros(config);
  return s;
}

void adam_step(StidParams& params, const StidParams& grads, AdamState& state) {
  for_each_tensor(grads, [](const std::string& name, const Matrix& g) {
    if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient in tensor '" + name + "'");
  });
  const std::uint64_t step = state.step + 1;
  std::vector<Matrix*> ms, vs;
  for_each_tensor(state.m, [&ms](const std::string&, Matrix& m) { ms.push_back(&m); });
  for_each_tensor(state.v, [&vs](const std::string&, Matrix& v) { vs.push_back(&v); });
  std::size_t i = 0;
  for_each_tensor_pair(params, grads, [&](const std::string& name, Matrix& w, const Matrix& g) {
    Matrix& m = *ms.at(i);
    Matrix& v = *vs.at(i);
    ++i;
    if (m.size() != w.size() || v.size() != w.size()) {
      throw ShapeError("adam_step: optimizer state for '" + name + "' does not match the params");
    }
    adam_update(w.values(), g.values(), m.values(), v.values(), step, state.hyper);
  });
  state.step = step;
}

void clip_grad_norm(StidParams& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for_each_tensor(grads, [&sq](const std::string&, const Matrix& g) {
    for (double x : g.values()) sq += x * x;
  });
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for_each_tensor(grads, [scale](const std::string&, Matrix& g) {
    for (double& x : g.values()) x *= scale;
  });
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be a finite non-negative number");
  }
  if (!(clip_grad_norm >= 0.0)) throw ConfigError("clip_grad_norm must be >= 0");
}

PreparedData prepare_data(RawSeries raw, std::size_t history_len, std::size_t horizon,
                          const SplitSpec& split, NormMode mode) {
  raw.validate();
  PreparedData d;
  d.history_len = history_len;
  d.horizon = horizon;
  d.splits = split_chronological(window_origins(raw, history_len, horizon), split);
  d.normalizer = fit_normalizer(raw, d.splits.train, history_len, mode);
  d.normalized = d.normalizer.apply(raw);
  d.raw = std::move(raw);
  return d;
}

StidConfig config_for(const PreparedData& data, std::size_t hidden_dim, std::size_t num_layers) {
  StidConfig c;
  c.num_vars = data.raw.num_vars();
  c.history_len = data.history_len;
  c.horizon = data.horizon;
  c.hidden_dim = hidden_dim;
  c.num_layers = num_layers;
  c.slots_per_day = data.raw.slots_per_day();
  return c;
}

namespace {

void check_compatible(const StidConfig& config, const PreparedData& data) {
  if (config.num_vars != data.raw.num_vars() || config.history_len != data.history_len ||
      config.horizon != data.horizon || config.slots_per_day != data.raw.slots_per_day()) {
    throw ShapeError("model [" + config.describe() + "] does not fit dataset (N=" +
                     std::to_string(data.raw.num_vars()) + " P=" + std::to_string(data.history_len) +
                     " F=" + std::to_string(data.horizon) +
                     " N_d=" + std::to_string(data.raw.slots_per_day()) + ")");
  }
}

}  // namespace

double train_epoch(StidParams& params, AdamState& adam, const PreparedData& data,
                   std::span<const std::size_t> train_origins, const StidConfig& config,
                   const TrainConfig& train, Rng& rng) {
  if (train_origins.empty()) throw DataError("train_epoch: empty training set");
  check_compatible(config, data);
  std::vector<std::size_t> order(train_origins.begin(), train_origins.end());
  rng.shuffle(std::span<std::size_t>(order));

  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += train.batch_size) {
    const std::size_t n = std::min(train.batch_size, order.size() - start);
    const Batch batch = gather_batch(data.normalized, std::span(order).subspan(start, n),
                                     data.history_len, data.horizon);
    if (batch.target_mask.count() == 0) continue;
    ForwardResult fr = forward(params, config, batch);
    const LossResult loss = mae_loss(fr.prediction, batch.target, batch.target_mask);
    if (!std::isfinite(loss.loss)) {
      throw NumericError("non-finite loss at batch " + std::to_string(batches));
    }
    StidParams grads = backward(params, config, fr.cache, loss.grad);
    clip_grad_norm(grads, train.clip_grad_norm);
    adam_step(params, grads, adam);
    loss_sum += loss.loss;
    ++batches;
  }
  if (batches == 0) throw DataError("train_epoch: no batch had a valid target");
  return loss_sum / static_cast<double>(batches);
}

double evaluate_loss(const StidParams& params, const PreparedData& data,
                     std::span<const std::size_t> origins, const StidConfig& config,
                     std::size_t batch_size) {
  double abs_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < origins.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, origins.size() - start);
    const Batch batch = gather_batch(data.normalized, origins.subspan(start, n), data.history_len,
                                     data.horizon);
    const Matrix pred = predict(params, config, batch);
    for (std::size_t r = 0; r < pred.rows(); ++r) {
      for (std::size_t c = 0; c < pred.cols(); ++c) {
        if (!batch.target_mask(r, c)) continue;
        abs_sum += std::abs(pred(r, c) - batch.target(r, c));
        ++count;
      }
    }
  }
  if (count == 0) throw DataError("evaluate_loss: no valid targets");
  return abs_sum / static_cast<double>(count);
}

Forecast forecast(const StidParams& params, const StidConfig& config, const PreparedData& data,
                  std::span<const std::size_t> origins, std::size_t batch_size) {
  check_compatible(config, data);
  const std::size_t N = data.raw.num_vars();
  Forecast out;
  out.prediction = Matrix(origins.size() * N, data.horizon);
  out.target = Matrix(origins.size() * N, data.horizon);
  out.mask = Mask(origins.size() * N, data.horizon);
  out.var.reserve(origins.size() * N);
  std::size_t row = 0;
  for (std::size_t start = 0; start < origins.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, origins.size() - start);
    const auto chunk = origins.subspan(start, n);
    const Batch norm_batch = gather_batch(data.normalized, chunk, data.history_len, data.horizon);
    const Batch raw_batch = gather_batch(data.raw, chunk, data.history_len, data.horizon);
    Matrix pred = predict(params, config, norm_batch);
    data.normalizer.invert_rows(pred, norm_batch.var);
    for (std::size_t r = 0; r < pred.rows(); ++r, ++row) {
      for (std::size_t c = 0; c < pred.cols(); ++c) {
        out.prediction(row, c) = pred(r, c);
        out.target(row, c) = raw_batch.target(r, c);
        out.mask.set(row, c, raw_batch.target_mask(r, c));
      }
      out.var.push_back(raw_batch.var[r]);
    }
  }
  return out;
}

double validation_mae(const StidParams& params, const StidConfig& config, const PreparedData& data,
                      std::span<const std::size_t> origins) {
  const Forecast fc = forecast(params, config, data, origins);
  return mae_loss(fc.prediction, fc.target, fc.mask).loss;
}

FitResult fit(const StidConfig& config, const TrainConfig& train, const PreparedData& data) {
  train.validate();
  check_compatible(config, data);
  FitResult res;
  StidParams params = init_params(config, train.seed);
  AdamHyper hyper;
  hyper.learning_rate = train.learning_rate;
  AdamState adam = AdamState::fresh(config, hyper);
  // Separate stream from parameter init so shuffling is unaffected by the config.
  Rng rng = Rng::substream(train.seed, "shuffle");

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      rec.train_loss = train_epoch(params, adam, data, data.splits.train, config, train, rng);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.val_mae = validation_mae(params, config, data, data.splits.val);
    if (!std::isfinite(rec.val_mae)) {
      throw NumericError("epoch " + std::to_string(epoch) + ": non-finite validation MAE");
    }
    if (rec.val_mae < best) {
      best = rec.val_mae;
      res.report.best_epoch = epoch;
      res.best_params = params;
      if (!train.checkpoint_path.empty()) save_params(params, config, train.checkpoint_path);
    }
    if (train.log_epochs) {
      std::printf("epoch %zu, loss %.6f, val_mae %.6f, secs %.3f\n", epoch, rec.train_loss,
                  rec.val_mae, rec.seconds);
      std::fflush(stdout);
    }
    res.report.epochs.push_back(rec);
  }
  res.report.best_checkpoint = train.checkpoint_path;
  res.final_params = std::move(params);
  return res;
}

double measure_seconds_per_epoch(const TrainReport& report) {
  if (report.epochs.empty()) throw DataError("measure_seconds_per_epoch: empty report");
  double sum = 0.0;
  for (const auto& e : report.epochs) sum += e.seconds;
  return sum / static_cast<double>(report.epochs.size());
}

double seconds_per_epoch_cv(const TrainReport& report) {
  const double mean = measure_seconds_per_epoch(report);
  double var = 0.0;
  for (const auto& e : report.epochs) var += (e.seconds - mean) * (e.seconds - mean);
  var /= static_cast<double>(report.epochs.size());
  return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
}

void write_train_report_csv(const TrainReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "epoch,train_loss,val_mae,seconds\n";
  char line[160];
  for (const auto& e : report.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.6f\n", e.epoch, e.train_loss, e.val_mae,
                  e.seconds);
    out << line;
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace stid
