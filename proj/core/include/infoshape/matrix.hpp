#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace infoshape {

/// Dense row-major matrix of doubles. Batches are rows, features are columns.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Resizes without preserving contents. Reuses capacity when possible so
  /// per-iteration workspaces do not reallocate.
  void reshape(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.resize(rows * cols);
  }

  void fill(double v) { data_.assign(data_.size(), v); }
  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline bool same_shape(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

// Matrix products. Shapes are checked and a ConfigError is thrown on mismatch.
// The `out` overloads write into an existing matrix (reshaped as needed) so hot
// loops can reuse buffers.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);     // out = a * b
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);  // out = a * b^T
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);  // out = a^T * b
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Thread budget for the product kernels (row-block parallelism; the summation
// order per output element is fixed, so results are bitwise identical for any
// thread count). Default is 1; the CLI raises it unless --single-thread.
void set_num_threads(int n);
int num_threads();

}  // namespace infoshape
