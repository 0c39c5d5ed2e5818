#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "stid/data.hpp"
#include "stid/matrix.hpp"
#include "stid/model.hpp"
#include "stid/rng.hpp"

namespace stid::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

/// Random batch whose identity indices stay inside `config`'s tables.
inline Batch random_batch(const StidConfig& config, std::size_t size, Rng& rng) {
  Batch b;
  b.history = random_matrix(size, config.history_len, rng, 2.0);
  b.target = random_matrix(size, config.horizon, rng, 2.0);
  b.target_mask = Mask(size, config.horizon, true);
  for (std::size_t i = 0; i < size; ++i) {
    b.var.push_back(rng.below(config.num_vars));
    b.tid.push_back(rng.below(config.slots_per_day));
    b.diw.push_back(rng.below(kDaysPerWeek));
  }
  return b;
}

/// Every parameter value flattened in for_each_tensor order.
inline std::vector<double> flatten(const StidParams& p) {
  std::vector<double> out;
  for_each_tensor(p, [&out](const std::string&, const Matrix& m) {
    out.insert(out.end(), m.values().begin(), m.values().end());
  });
  return out;
}

inline void unflatten(std::span<const double> flat, StidParams& p) {
  std::size_t i = 0;
  for_each_tensor(p, [&](const std::string&, Matrix& m) {
    for (double& v : m.values()) v = flat[i++];
  });
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("stid_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace stid::test
