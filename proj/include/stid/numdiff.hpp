#pragma once

#include <functional>
#include <span>
#include <vector>

namespace stid {

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central-difference gradient (f(w + h e_i) - f(w - h e_i)) / 2h for every coordinate.
/// Throws NumericError if any evaluation is non-finite.
std::vector<double> finite_diff_grad(const ScalarFn& fn, std::span<const double> params, double h);

}  // namespace stid
