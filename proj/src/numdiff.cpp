#include "stid/numdiff.hpp"

#include <cmath>
#include <string>

#include "stid/error.hpp"

namespace stid {

std::vector<double> finite_diff_grad(const ScalarFn& fn, std::span<const double> params, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  std::vector<double> w(params.begin(), params.end());
  std::vector<double> grad(w.size());
  auto eval = [&](std::size_t i) {
    const double v = fn(w);
    if (!std::isfinite(v)) {
      throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                         std::to_string(i));
    }
    return v;
  };
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double orig = w[i];
    w[i] = orig + h;
    const double plus = eval(i);
    w[i] = orig - h;
    const double minus = eval(i);
    w[i] = orig;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

}  // namespace stid
