#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stid/error.hpp"
#include "stid/evaluation.hpp"
#include "stid/run_config.hpp"
#include "stid/training.hpp"

namespace py = pybind11;
using namespace stid;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array, got " + std::to_string(a.ndim()) + "-D");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), a.mutable_data());
  return a;
}

Mask to_mask(const std::optional<BoolArray>& a, std::size_t rows, std::size_t cols) {
  if (!a) return Mask(rows, cols);
  if (a->ndim() != 2 || static_cast<std::size_t>(a->shape(0)) != rows ||
      static_cast<std::size_t>(a->shape(1)) != cols)
    throw ShapeError("mask shape does not match the predictions");
  Mask m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, a->at(r, c));
  return m;
}

BoolArray mask_array(const Mask& m) {
  BoolArray a({m.rows(), m.cols()});
  auto v = a.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) v(r, c) = m(r, c);
  return a;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["mae"] = m.mae;
  d["rmse"] = m.rmse;
  d["mape_pct"] = m.mape_pct ? py::cast(*m.mape_pct) : py::none();
  d["valid_count"] = m.valid_count;
  return d;
}

py::list report_list(const HorizonReport& rep) {
  py::list out;
  for (const auto& row : rep.rows) {
    py::dict d = metrics_dict(row.metrics);
    d["horizon"] = row.label;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spatial-temporal identity forecasting model";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<CorruptFileError>(m, "CorruptFileError", base.ptr());

  py::class_<StidConfig>(m, "StidConfig")
      .def(py::init<>())
      .def_readwrite("num_vars", &StidConfig::num_vars)
      .def_readwrite("history_len", &StidConfig::history_len)
      .def_readwrite("horizon", &StidConfig::horizon)
      .def_readwrite("hidden_dim", &StidConfig::hidden_dim)
      .def_readwrite("num_layers", &StidConfig::num_layers)
      .def_readwrite("slots_per_day", &StidConfig::slots_per_day)
      .def_readwrite("use_spatial", &StidConfig::use_spatial)
      .def_readwrite("use_tid", &StidConfig::use_tid)
      .def_readwrite("use_diw", &StidConfig::use_diw)
      .def_readwrite("spatial_dim", &StidConfig::spatial_dim)
      .def_readwrite("tid_dim", &StidConfig::tid_dim)
      .def_readwrite("diw_dim", &StidConfig::diw_dim)
      .def_property_readonly("width", &StidConfig::width)
      .def("validate", &StidConfig::validate)
      .def("__eq__", [](const StidConfig& a, const StidConfig& b) { return a == b; })
      .def("__repr__", [](const StidConfig& c) { return "StidConfig(" + c.describe() + ")"; });

  py::class_<RawSeries>(m, "Series")
      .def_readonly("name", &RawSeries::name)
      .def_readonly("var_names", &RawSeries::var_names)
      .def_readonly("interval_minutes", &RawSeries::interval_minutes)
      .def_property_readonly("num_slots", &RawSeries::num_slots)
      .def_property_readonly("num_vars", &RawSeries::num_vars)
      .def_property_readonly("slots_per_day", &RawSeries::slots_per_day)
      .def_property_readonly("values", [](const RawSeries& s) { return to_array(s.values); })
      .def_property_readonly("valid", [](const RawSeries& s) { return mask_array(s.valid); });

  py::class_<StidParams>(m, "Params")
      .def_property_readonly("num_values", &StidParams::num_values)
      .def("tensors", [](const StidParams& p) {
        py::dict d;
        for_each_tensor(p, [&d](const std::string& name, const Matrix& t) {
          if (!t.empty()) d[py::str(name)] = to_array(t);
        });
        return d;
      })
      .def("__eq__", [](const StidParams& a, const StidParams& b) { return a == b; });

  m.def("load_csv", [](const std::filesystem::path& path, std::optional<double> missing) {
    return load_csv(path, CsvOptions{missing});
  }, py::arg("path"), py::arg("missing_value") = py::none());
  m.def("save_csv", &save_csv, py::arg("series"), py::arg("path"));

  m.def("gen_synthetic", [](const std::string& mode, std::size_t num_days, double gap,
                            double weekly_gap, double noise_std, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.mode = parse_synthetic_mode(mode);
    spec.num_days = num_days;
    spec.gap = gap;
    spec.weekly_gap = weekly_gap;
    spec.noise_std = noise_std;
    spec.seed = seed;
    return gen_synthetic_indistinguishable(spec);
  }, py::arg("mode") = "spatial", py::arg("num_days") = 14, py::arg("gap") = 10.0,
     py::arg("weekly_gap") = 10.0, py::arg("noise_std") = 0.0, py::arg("seed") = 0);

  m.def("window_origins", &window_origins, py::arg("series"), py::arg("history_len"), py::arg("horizon"));
  m.def("count_parameters", &count_parameters);
  m.def("init_params", &init_params, py::arg("config"), py::arg("seed") = 0);

  m.def("predict", [](const StidParams& p, const StidConfig& c, const Array& history,
                      std::vector<std::size_t> var, std::vector<std::size_t> tid,
                      std::vector<std::size_t> diw) {
    Batch b;
    b.history = to_matrix(history);
    b.var = std::move(var);
    b.tid = std::move(tid);
    b.diw = std::move(diw);
    return to_array(predict(p, c, b));
  }, py::arg("params"), py::arg("config"), py::arg("history"), py::arg("var"), py::arg("tid"),
     py::arg("diw"));

  m.def("save_params", &save_params, py::arg("params"), py::arg("config"), py::arg("path"));
  m.def("load_params", [](const std::filesystem::path& path) {
    LoadedModel lm = load_params(path);
    return py::make_tuple(std::move(lm.params), lm.config);
  });

  m.def("metrics", [](const Array& pred, const Array& target, const std::optional<BoolArray>& mask,
                      double floor) {
    const Matrix p = to_matrix(pred);
    return metrics_dict(metrics(p, to_matrix(target), to_mask(mask, p.rows(), p.cols()), floor));
  }, py::arg("pred"), py::arg("target"), py::arg("mask") = py::none(),
     py::arg("mape_floor") = kDefaultMapeFloor);

  m.def("horizon_report", [](const Array& pred, const Array& target,
                             const std::optional<BoolArray>& mask, double floor) {
    const Matrix p = to_matrix(pred);
    return report_list(horizon_report(p, to_matrix(target), to_mask(mask, p.rows(), p.cols()), floor));
  }, py::arg("pred"), py::arg("target"), py::arg("mask") = py::none(),
     py::arg("mape_floor") = kDefaultMapeFloor);

  m.def("hi_baseline", [](const Array& histories, std::size_t horizon) {
    return to_array(hi_baseline(to_matrix(histories), horizon));
  }, py::arg("histories"), py::arg("horizon"));

  m.def("train", [](const RawSeries& series, const std::map<std::string, std::string>& settings) {
    RunConfig rc;
    for (const auto& [k, v] : settings) rc.set(k, v);
    const PreparedData data = prepare_data(series, rc.p, rc.f, rc.split, rc.normalization);
    const StidConfig config = rc.model_config(series.num_vars(), series.slots_per_day());
    FitResult fr;
    {
      py::gil_scoped_release release;
      fr = fit(config, rc.train_config(), data);
    }
    py::list epochs;
    for (const auto& e : fr.report.epochs) {
      py::dict d;
      d["epoch"] = e.epoch;
      d["train_loss"] = e.train_loss;
      d["val_mae"] = e.val_mae;
      d["seconds"] = e.seconds;
      epochs.append(d);
    }
    py::dict out;
    out["config"] = config;
    out["params"] = fr.best_params;
    out["epochs"] = epochs;
    out["best_epoch"] = fr.report.best_epoch;
    out["test_report"] =
        report_list(evaluate_model(fr.best_params, config, data, data.splits.test, rc.mape_floor));
    return out;
  }, py::arg("series"), py::arg("settings") = std::map<std::string, std::string>{},
     "Trains on `series`; settings use the run-config keys, values as strings.");
}
