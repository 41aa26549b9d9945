#pragma once

#include <string>
#include <vector>

#include "cayrec/engine.hpp"
#include "cayrec/model.hpp"

namespace cayrec {

enum class Encoding { ordinal, onehot };

std::string encoding_name(Encoding e);
Encoding encoding_from_name(const std::string& name);

// ordinal: M[a][b] = t[a][b] as a real (n x n).
// onehot:  M[a*n+b][c] = [t[a][b] = c] (n^2 x n).
Mat encode_table(const CayleyTable& t, Encoding encoding);

// Factorized completion M ~ U V^T with weight decay on both factors.
struct MCFactors {
  Encoding encoding = Encoding::ordinal;
  int n = 0;
  int r = 0;
  Mat u;  // rows x r
  Mat v;  // cols x r
  bool converged = false;
  int steps_used = 0;
  double loss_final = 0.0;
};

// Minimizes sum_observed (UV^T - M)^2 + weight_decay (|U|_F^2 + |V|_F^2)
// with the same full-batch adaptive-moment loop as engine::train. Observed
// entries are the cells of omega (ordinal) or their full one-hot rows
// (onehot).
MCFactors mc_train(const CayleyTable& t, const ObservationSet& omega, Encoding encoding, int r,
                   double weight_decay, const TrainConfig& cfg, uint64_t seed);

// ordinal: clamp(round((UV^T)[a][b]), 0, n-1); onehot: row argmax with
// smallest-index tie-break.
CayleyTable mc_decode(const MCFactors& f);

// Sum of singular values.
double nuclear_norm(const Mat& x);

}  // namespace cayrec
