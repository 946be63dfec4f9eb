#include "infoshape/matrix.hpp"

#include <Eigen/Core>
#include <atomic>
#include <cmath>
#include <string>

#include "infoshape/error.hpp"

namespace infoshape {

namespace {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapConst = Eigen::Map<const EigenRowMajor>;
using Map = Eigen::Map<EigenRowMajor>;

std::atomic<int> g_threads{1};

void check_product_shapes(std::size_t inner_a, std::size_t inner_b, const char* what) {
  if (inner_a != inner_b) {
    throw ConfigError(std::string(what) + ": inner dimensions do not match (" +
                      std::to_string(inner_a) + " vs " + std::to_string(inner_b) + ")");
  }
}

// Splits the output rows into contiguous blocks, one per thread. Each output
// element is accumulated by exactly one thread in a fixed order, so the result
// does not depend on the thread count.
template <typename Kernel>
void row_blocked(std::size_t out_rows, Kernel&& kernel) {
  const int threads = g_threads.load();
  if (threads <= 1 || out_rows < 64) {
    kernel(0, out_rows);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int t = 0; t < threads; ++t) {
    const std::size_t chunk = (out_rows + threads - 1) / threads;
    const std::size_t begin = chunk * static_cast<std::size_t>(t);
    const std::size_t end = std::min(out_rows, begin + chunk);
    if (begin < end) kernel(begin, end);
  }
#else
  kernel(0, out_rows);
#endif
}

}  // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != m.cols()) throw ConfigError("from_rows: ragged row lengths");
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void set_num_threads(int n) { g_threads.store(n < 1 ? 1 : n); }
int num_threads() { return g_threads.load(); }

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check_product_shapes(a.cols(), b.rows(), "matmul");
  out.reshape(a.rows(), b.cols());
  MapConst ma(a.data(), a.rows(), a.cols());
  MapConst mb(b.data(), b.rows(), b.cols());
  Map mo(out.data(), out.rows(), out.cols());
  row_blocked(a.rows(), [&](std::size_t begin, std::size_t end) {
    mo.middleRows(begin, end - begin).noalias() = ma.middleRows(begin, end - begin) * mb;
  });
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_product_shapes(a.cols(), b.cols(), "matmul_nt");
  out.reshape(a.rows(), b.rows());
  MapConst ma(a.data(), a.rows(), a.cols());
  MapConst mb(b.data(), b.rows(), b.cols());
  Map mo(out.data(), out.rows(), out.cols());
  row_blocked(a.rows(), [&](std::size_t begin, std::size_t end) {
    mo.middleRows(begin, end - begin).noalias() =
        ma.middleRows(begin, end - begin) * mb.transpose();
  });
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_product_shapes(a.rows(), b.rows(), "matmul_tn");
  out.reshape(a.cols(), b.cols());
  MapConst ma(a.data(), a.rows(), a.cols());
  MapConst mb(b.data(), b.rows(), b.cols());
  Map mo(out.data(), out.rows(), out.cols());
  row_blocked(a.cols(), [&](std::size_t begin, std::size_t end) {
    mo.middleRows(begin, end - begin).noalias() =
        ma.middleCols(begin, end - begin).transpose() * mb;
  });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul(a, b, out);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_nt(a, b, out);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix out;
  matmul_tn(a, b, out);
  return out;
}

}  // namespace infoshape
