#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcf/error.hpp"

namespace pcf {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
///
/// A default-constructed matrix is empty (0x0) and only useful as a
/// placeholder; every sized constructor requires rows >= 1 and cols >= 1.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != checked_size(rows, cols)) {
      throw DimensionError("matrix " + shape_string(rows, cols) + " given " +
                           std::to_string(data_.size()) + " entries");
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    checked_size(rows_, cols_);
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// n x 1 matrix holding `v`.
  static Matrix column(std::span<const double> v) {
    return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::string shape() const { return shape_string(rows_, cols_); }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

  static std::string shape_string(std::size_t r, std::size_t c) {
    return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
  }

 private:
  static std::size_t checked_size(std::size_t r, std::size_t c) {
    if (r == 0 || c == 0) throw DimensionError("matrix dimensions must be positive, got " + shape_string(r, c));
    return r * c;
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape() + " vs " + b.shape());
  }
}

}  // namespace detail

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape() + " by " + b.shape());
  }
  Matrix out(a.rows(), b.cols());
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

/// a * x for a column vector x.
inline Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matvec: cannot multiply " + a.shape() + " by vector of length " +
                         std::to_string(x.size()));
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * x[k];
    out[i] = s;
  }
  return out;
}

/// a^T * x for a column vector x.
inline Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    throw DimensionError("matvec_transposed: cannot multiply " + a.shape() + "^T by vector of length " +
                         std::to_string(x.size()));
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) out[k] += r[k] * x[i];
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  detail::require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  auto o = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = av[k] * bv[k];
  return out;
}

/// alpha * a + b
inline Matrix axpy(double alpha, const Matrix& a, const Matrix& b) {
  detail::require_same_shape(a, b, "axpy");
  Matrix out = b;
  auto o = out.values();
  auto av = a.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += alpha * av[k];
  return out;
}

inline Matrix scale(double alpha, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.values()) v *= alpha;
  return out;
}

/// Outer product u v^T, accumulated into `acc`.
inline void add_outer(Matrix& acc, std::span<const double> u, std::span<const double> v) {
  if (acc.rows() != u.size() || acc.cols() != v.size()) {
    throw DimensionError("add_outer: accumulator " + acc.shape() + " vs outer product " +
                         Matrix::shape_string(u.size(), v.size()));
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto r = acc.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) r[j] += u[i] * v[j];
  }
}

inline double sum_of_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double frobenius_norm(const Matrix& a) { return std::sqrt(sum_of_squares(a.values())); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace pcf
