#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cayrec/error.hpp"

namespace cayrec {

// Dense row-major matrix of doubles. Sized for n <= ~24; every reduction
// uses a fixed left-to-right summation order so results are bit-reproducible.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw Error(ErrorCode::invalid_argument, "negative matrix dimension");
  }

  double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  static Mat identity(int n);
  Mat transposed() const;

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

Mat gemm(const Mat& x, const Mat& y);
// z += x * y, in place
void gemm_acc(const Mat& x, const Mat& y, Mat& z);
double trace(const Mat& x);
double frob2(const Mat& x);
// <x, y> = sum_ij x_ij y_ij
double dot(const Mat& x, const Mat& y);
// Tr(x * y) without forming the product (x: m x n, y: n x m).
double trace_of_product(const Mat& x, const Mat& y);

// xoshiro256** seeded by splitmix64; identical seeds give identical streams
// on every platform. Constants from Blackman & Vigna.
class Rng {
 public:
  explicit Rng(uint64_t seed);
  uint64_t next_u64();
  // uniform in [0, 1)
  double uniform();
  // uniform in {0, ..., bound-1}, bound >= 1
  uint64_t uniform_below(uint64_t bound);
  // standard normal via Box-Muller (one cached spare)
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Singular values, nonnegative and descending, via one-sided Jacobi
// rotations iterated to off-diagonal tolerance 1e-12 * max entry.
std::vector<double> singular_values(const Mat& x);

// Full SVD: x = U * diag(s) * V^T with U (rows x k), V (cols x k),
// k = min(rows, cols). Same Jacobi sweep as singular_values.
struct Svd {
  Mat u;
  std::vector<double> s;
  Mat v;
};
Svd svd(const Mat& x);

// Count of singular values above max(rows, cols) * sigma_max * 1e-10.
int matrix_rank(const Mat& x);

// Independent rank route: Gaussian elimination with partial pivoting.
int rank_by_elimination(const Mat& x, double rel_tol = 1e-10);

// Haar-ish random orthogonal matrix: Gram-Schmidt of a Gaussian matrix.
Mat random_orthogonal(int n, Rng& rng);

using ScalarFn = std::function<double(const std::vector<double>&)>;

// Central differences, (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
std::vector<double> fd_gradient(const ScalarFn& loss, const std::vector<double>& theta,
                                double h = 1e-4);

// Sum of second central differences along each coordinate axis.
double fd_hessian_trace(const ScalarFn& loss, const std::vector<double>& theta,
                        double h = 1e-3);

}  // namespace cayrec
