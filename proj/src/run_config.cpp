#include "stid/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stid/error.hpp"

namespace stid {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string bad(const std::string& key, const std::string& value, const char* expected) {
  return "config key '" + key + "': invalid value '" + value + "' (expected " + expected + ")";
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T v{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(bad(key, value, "a non-negative integer"));
  }
  return v;
}

std::size_t parse_positive(const std::string& key, const std::string& value) {
  const auto v = parse_unsigned<std::size_t>(key, value);
  if (v == 0) throw ConfigError(bad(key, value, "an integer >= 1"));
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(bad(key, value, "a finite number"));
  }
  return v;
}

double parse_non_negative(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v < 0.0) throw ConfigError(bad(key, value, "a number >= 0"));
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(bad(key, value, "true or false"));
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "dataset",  "p",           "f",           "d",           "layers",      "lr",
      "epochs",   "batch_size",  "seed",        "split",       "normalization",
      "use_spatial", "use_tid",  "use_diw",     "spatial_dim", "tid_dim",     "diw_dim",
      "mape_floor", "missing_value", "clip_grad_norm", "out"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "dataset") {
    dataset = value;
  } else if (key == "p") {
    p = parse_positive(key, value);
  } else if (key == "f") {
    f = parse_positive(key, value);
  } else if (key == "d") {
    d = parse_positive(key, value);
  } else if (key == "layers") {
    layers = parse_positive(key, value);
  } else if (key == "lr") {
    lr = parse_non_negative(key, value);
  } else if (key == "epochs") {
    epochs = parse_positive(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_positive(key, value);
  } else if (key == "seed") {
    seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "split") {
    std::vector<double> parts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(parse_non_negative(key, trim(item)));
    if (parts.size() != 3 || std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
      throw ConfigError(bad(key, value, "three ratios summing to 1, e.g. 0.6,0.2,0.2"));
    }
    split = {parts[0], parts[1], parts[2]};
  } else if (key == "normalization") {
    try {
      normalization = parse_norm_mode(value);
    } catch (const ConfigError&) {
      throw ConfigError(bad(key, value, "global-zscore, per-variable-zscore or none"));
    }
  } else if (key == "use_spatial") {
    use_spatial = parse_bool(key, value);
  } else if (key == "use_tid") {
    use_tid = parse_bool(key, value);
  } else if (key == "use_diw") {
    use_diw = parse_bool(key, value);
  } else if (key == "spatial_dim") {
    spatial_dim = parse_unsigned<std::size_t>(key, value);
  } else if (key == "tid_dim") {
    tid_dim = parse_unsigned<std::size_t>(key, value);
  } else if (key == "diw_dim") {
    diw_dim = parse_unsigned<std::size_t>(key, value);
  } else if (key == "mape_floor") {
    mape_floor = parse_non_negative(key, value);
  } else if (key == "missing_value") {
    if (value.empty() || value == "none") {
      missing_value.reset();
    } else {
      missing_value = parse_double(key, value);
    }
  } else if (key == "clip_grad_norm") {
    clip_grad_norm = parse_non_negative(key, value);
  } else if (key == "out") {
    out = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "dataset = " << dataset.string() << '\n'
     << "p = " << p << '\n'
     << "f = " << f << '\n'
     << "d = " << d << '\n'
     << "layers = " << layers << '\n'
     << "lr = " << fmt(lr) << '\n'
     << "epochs = " << epochs << '\n'
     << "batch_size = " << batch_size << '\n'
     << "seed = " << seed << '\n'
     << "split = " << fmt(split.train) << ',' << fmt(split.val) << ',' << fmt(split.test) << '\n'
     << "normalization = " << to_string(normalization) << '\n'
     << "use_spatial = " << (use_spatial ? "true" : "false") << '\n'
     << "use_tid = " << (use_tid ? "true" : "false") << '\n'
     << "use_diw = " << (use_diw ? "true" : "false") << '\n'
     << "spatial_dim = " << spatial_dim << '\n'
     << "tid_dim = " << tid_dim << '\n'
     << "diw_dim = " << diw_dim << '\n'
     << "mape_floor = " << fmt(mape_floor) << '\n'
     << "missing_value = " << (missing_value ? fmt(*missing_value) : "none") << '\n'
     << "clip_grad_norm = " << fmt(clip_grad_norm) << '\n'
     << "out = " << out.string() << '\n';
  return os.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    cfg.set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = lr;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.seed = seed;
  t.clip_grad_norm = clip_grad_norm;
  return t;
}

StidConfig RunConfig::model_config(std::size_t num_vars, std::size_t slots_per_day) const {
  StidConfig c;
  c.num_vars = num_vars;
  c.history_len = p;
  c.horizon = f;
  c.hidden_dim = d;
  c.num_layers = layers;
  c.slots_per_day = slots_per_day;
  c.use_spatial = use_spatial;
  c.use_tid = use_tid;
  c.use_diw = use_diw;
  c.spatial_dim = spatial_dim;
  c.tid_dim = tid_dim;
  c.diw_dim = diw_dim;
  return c;
}

}  // namespace stid
