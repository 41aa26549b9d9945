#include "cayrec/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace cayrec {

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::transposed() const {
  Mat t(cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Mat gemm(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw Error(ErrorCode::shape_mismatch, "gemm: inner dimensions differ");
  Mat z(x.rows, y.cols);
  gemm_acc(x, y, z);
  return z;
}

void gemm_acc(const Mat& x, const Mat& y, Mat& z) {
  if (x.cols != y.rows || z.rows != x.rows || z.cols != y.cols)
    throw Error(ErrorCode::shape_mismatch, "gemm_acc: shape mismatch");
  // ikj loop order; the k-accumulation order is fixed by construction
  for (int i = 0; i < x.rows; ++i) {
    double* zi = &z.data[static_cast<size_t>(i) * z.cols];
    for (int k = 0; k < x.cols; ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      const double* yk = &y.data[static_cast<size_t>(k) * y.cols];
      for (int j = 0; j < y.cols; ++j) zi[j] += xik * yk[j];
    }
  }
}

double trace(const Mat& x) {
  if (x.rows != x.cols) throw Error(ErrorCode::shape_mismatch, "trace: matrix not square");
  double s = 0.0;
  for (int i = 0; i < x.rows; ++i) s += x(i, i);
  return s;
}

double frob2(const Mat& x) {
  double s = 0.0;
  for (double v : x.data) s += v * v;
  return s;
}

double dot(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) throw Error(ErrorCode::shape_mismatch, "dot: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < x.data.size(); ++i) s += x.data[i] * y.data[i];
  return s;
}

double trace_of_product(const Mat& x, const Mat& y) {
  if (x.cols != y.rows || x.rows != y.cols)
    throw Error(ErrorCode::shape_mismatch, "trace_of_product: shape mismatch");
  double s = 0.0;
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) s += x(i, j) * y(j, i);
  return s;
}

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed) {
  uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_below(uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::invalid_argument, "uniform_below: bound must be positive");
  // rejection to avoid modulo bias
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 == 0.0);
  u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

namespace {

// One-sided Jacobi on the columns of a (rows >= cols assumed by caller).
// On return the columns of a are mutually orthogonal; v accumulates the
// right rotations when non-null.
void jacobi_orthogonalize(Mat& a, Mat* v) {
  const int n = a.cols;
  double max_entry = 0.0;
  for (double x : a.data) max_entry = std::max(max_entry, std::abs(x));
  if (max_entry == 0.0) return;

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < a.rows; ++i) {
          const double xp = a(i, p), xq = a(i, q);
          app += xp * xp;
          aqq += xq * xq;
          apq += xp * xq;
        }
        if (app * aqq == 0.0 || std::abs(apq) <= 1e-12 * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < a.rows; ++i) {
          const double xp = a(i, p), xq = a(i, q);
          a(i, p) = c * xp - s * xq;
          a(i, q) = s * xp + c * xq;
        }
        if (v) {
          for (int i = 0; i < n; ++i) {
            const double xp = (*v)(i, p), xq = (*v)(i, q);
            (*v)(i, p) = c * xp - s * xq;
            (*v)(i, q) = s * xp + c * xq;
          }
        }
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

std::vector<double> singular_values(const Mat& x) {
  Mat a = (x.rows >= x.cols) ? x : x.transposed();
  jacobi_orthogonalize(a, nullptr);
  std::vector<double> s(a.cols);
  for (int j = 0; j < a.cols; ++j) {
    double col2 = 0.0;
    for (int i = 0; i < a.rows; ++i) col2 += a(i, j) * a(i, j);
    s[j] = std::sqrt(col2);
  }
  std::sort(s.begin(), s.end(), std::greater<double>());
  return s;
}

Svd svd(const Mat& x) {
  const bool flipped = x.rows < x.cols;
  Mat a = flipped ? x.transposed() : x;
  Mat v = Mat::identity(a.cols);
  jacobi_orthogonalize(a, &v);

  const int k = a.cols;
  std::vector<int> order(k);
  std::vector<double> norms(k);
  for (int j = 0; j < k; ++j) {
    double col2 = 0.0;
    for (int i = 0; i < a.rows; ++i) col2 += a(i, j) * a(i, j);
    norms[j] = std::sqrt(col2);
    order[j] = j;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int p, int q) { return norms[p] > norms[q]; });

  Svd out;
  out.s.resize(k);
  out.u = Mat(a.rows, k);
  out.v = Mat(a.cols, k);
  for (int j = 0; j < k; ++j) {
    const int src = order[j];
    out.s[j] = norms[src];
    const double inv = norms[src] > 0.0 ? 1.0 / norms[src] : 0.0;
    for (int i = 0; i < a.rows; ++i) out.u(i, j) = a(i, src) * inv;
    for (int i = 0; i < a.cols; ++i) out.v(i, j) = v(i, src);
  }
  if (flipped) std::swap(out.u, out.v);
  return out;
}

int matrix_rank(const Mat& x) {
  const auto s = singular_values(x);
  if (s.empty() || s[0] == 0.0) return 0;
  const double thresh = std::max(x.rows, x.cols) * s[0] * 1e-10;
  int r = 0;
  for (double v : s)
    if (v > thresh) ++r;
  return r;
}

int rank_by_elimination(const Mat& x, double rel_tol) {
  Mat a = x;
  double max_entry = 0.0;
  for (double v : a.data) max_entry = std::max(max_entry, std::abs(v));
  if (max_entry == 0.0) return 0;
  const double tol = rel_tol * max_entry;

  int rank = 0;
  int row = 0;
  for (int col = 0; col < a.cols && row < a.rows; ++col) {
    int pivot = row;
    for (int i = row + 1; i < a.rows; ++i)
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    if (std::abs(a(pivot, col)) <= tol) continue;
    if (pivot != row)
      for (int j = 0; j < a.cols; ++j) std::swap(a(pivot, j), a(row, j));
    for (int i = row + 1; i < a.rows; ++i) {
      const double f = a(i, col) / a(row, col);
      for (int j = col; j < a.cols; ++j) a(i, j) -= f * a(row, j);
    }
    ++row;
    ++rank;
  }
  return rank;
}

Mat random_orthogonal(int n, Rng& rng) {
  for (;;) {
    Mat a(n, n);
    for (auto& v : a.data) v = rng.normal();
    // modified Gram-Schmidt on columns
    bool degenerate = false;
    for (int j = 0; j < n && !degenerate; ++j) {
      for (int k = 0; k < j; ++k) {
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += a(i, k) * a(i, j);
        for (int i = 0; i < n; ++i) a(i, j) -= proj * a(i, k);
      }
      double norm2 = 0.0;
      for (int i = 0; i < n; ++i) norm2 += a(i, j) * a(i, j);
      if (norm2 < 1e-20) {
        degenerate = true;
        break;
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (int i = 0; i < n; ++i) a(i, j) *= inv;
    }
    if (!degenerate) return a;
  }
}

std::vector<double> fd_gradient(const ScalarFn& loss, const std::vector<double>& theta,
                                double h) {
  if (h <= 0.0) throw Error(ErrorCode::invalid_argument, "fd_gradient: h must be positive");
  std::vector<double> g(theta.size());
  std::vector<double> t = theta;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double orig = t[i];
    t[i] = orig + h;
    const double fp = loss(t);
    t[i] = orig - h;
    const double fm = loss(t);
    t[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double fd_hessian_trace(const ScalarFn& loss, const std::vector<double>& theta, double h) {
  if (h <= 0.0) throw Error(ErrorCode::invalid_argument, "fd_hessian_trace: h must be positive");
  const double f0 = loss(theta);
  std::vector<double> t = theta;
  double tr = 0.0;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double orig = t[i];
    t[i] = orig + h;
    const double fp = loss(t);
    t[i] = orig - h;
    const double fm = loss(t);
    t[i] = orig;
    tr += (fp - 2.0 * f0 + fm) / (h * h);
  }
  return tr;
}

}  // namespace cayrec
