#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cayrec/algebra.hpp"
#include "cayrec/numerics.hpp"

namespace cayrec {

// Theta = (A, B, C): three stacks of n real n x n slices. The table entry
// (a, b, c) is scored by the trilinear form (1/n) Tr(A_a B_b C_c).
struct FactorParams {
  int n = 0;
  std::vector<Mat> A, B, C;

  FactorParams() = default;
  explicit FactorParams(int order)
      : n(order),
        A(order, Mat(order, order)),
        B(order, Mat(order, order)),
        C(order, Mat(order, order)) {
    if (order < 1) throw Error(ErrorCode::invalid_argument, "FactorParams: order must be >= 1");
  }
};

using GradParams = FactorParams;

// Observed table cells (a, b). Each observed cell reveals its full one-hot
// fiber over c. Cells are kept sorted and deduplicated so every reduction
// over the set has one fixed order.
struct ObservationSet {
  int n = 0;
  std::vector<std::pair<int, int>> cells;

  ObservationSet() = default;
  ObservationSet(int order, std::vector<std::pair<int, int>> obs);

  static ObservationSet full(int order);
  bool is_full() const { return static_cast<int>(cells.size()) == n * n; }
};

double forward(const FactorParams& p, int a, int b, int c);

// L = 1/2 sum_{(a,b) in omega} sum_c (T_abc - [t[a][b] = c])^2
double recon_loss(const FactorParams& p, const CayleyTable& t, const ObservationSet& omega);

// Hessian trace of recon_loss, in closed form. T is trilinear, so every
// diagonal second derivative of T vanishes and the trace reduces to the
// squared gradient of T summed over observed fibers:
//   H = (1/n^2) sum_{(a,b) in omega} sum_c
//         (|A_a B_b|_F^2 + |B_b C_c|_F^2 + |C_c A_a|_F^2)
// Exact at any residual, not only at exact fits.
double flatness(const FactorParams& p, const ObservationSet& omega);

// Gradient of recon_loss + lambda * flatness. Optionally reports the two
// objective pieces evaluated at p through the out pointers.
GradParams grad(const FactorParams& p, const CayleyTable& t, const ObservationSet& omega,
                double lambda, double* recon_out = nullptr, double* flat_out = nullptr);

// A_a = P_a, B_b = P_b, C_c = P_c^T with P_g the left-translation
// permutation matrix; gives T = delta exactly and flatness 3n^2 on full
// observation. Input must be a group table.
FactorParams regular_representation(const CayleyTable& t);

// i.i.d. Gaussian entries with standard deviation scale / sqrt(n).
FactorParams init_params(int n, double scale, Rng& rng);

// A_a -> U A_a V^T, B_b -> V B_b W^T, C_c -> W C_c U^T. Forward values and
// flatness are invariant when U, V, W are orthogonal (checked to 1e-10).
FactorParams apply_gauge(const FactorParams& p, const Mat& u, const Mat& v, const Mat& w);

// Checkpoint round-trips bit-exactly: entries stored as hexadecimal float
// strings.
std::string params_to_json(const FactorParams& p);
FactorParams params_from_json(const std::string& text);

// Flattened parameter vector (A, B, C stacked row-major), for the
// finite-difference oracles.
std::vector<double> pack(const FactorParams& p);
FactorParams unpack(const std::vector<double>& theta, int n);

}  // namespace cayrec
