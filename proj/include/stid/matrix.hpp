#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace stid {

/// Dense row-major matrix of doubles. Rows are samples, columns are features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  void fill(double value);
  bool all_finite() const noexcept;

  /// "(rows x cols)", used in error messages.
  std::string shape_str() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Row-major boolean matrix; 1 marks a valid (observed) entry.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t rows, std::size_t cols, bool fill = true)
      : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool operator()(std::size_t r, std::size_t c) const noexcept { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) noexcept { bits_[r * cols_ + c] = v ? 1 : 0; }
  std::size_t count() const noexcept;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class ElementOp { kAdd, kSub, kMul };

/// a · b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a · bᵀ, the fully connected forward product with weights stored (out x in).
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
/// aᵀ · b, the weight-gradient product.
Matrix transposed_matmul(const Matrix& a, const Matrix& b);

Matrix elementwise(const Matrix& a, const Matrix& b, ElementOp op);

Matrix relu(const Matrix& x);
/// 1 where x > 0, else 0 (the subgradient at 0 is taken as 0).
Matrix relu_grad_mask(const Matrix& x);

/// Horizontal concatenation; every part must have the same row count.
Matrix concat_features(std::span<const Matrix> parts);
Matrix slice_columns(const Matrix& x, std::size_t begin, std::size_t count);

/// Adds a 1 x cols bias row to every row of x.
void add_row_broadcast(Matrix& x, const Matrix& bias);
/// 1 x cols matrix of column sums.
Matrix column_sums(const Matrix& x);

}  // namespace stid
