#include "cayrec/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cayrec {

std::string encoding_name(Encoding e) {
  return e == Encoding::ordinal ? "ordinal" : "onehot";
}

Encoding encoding_from_name(const std::string& name) {
  if (name == "ordinal") return Encoding::ordinal;
  if (name == "onehot") return Encoding::onehot;
  throw Error(ErrorCode::invalid_argument, "unknown encoding: " + name);
}

Mat encode_table(const CayleyTable& t, Encoding encoding) {
  const int n = t.n;
  if (encoding == Encoding::ordinal) {
    Mat m(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m(a, b) = static_cast<double>(t.at(a, b));
    return m;
  }
  Mat m(n * n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a * n + b, t.at(a, b)) = 1.0;
  return m;
}

MCFactors mc_train(const CayleyTable& t, const ObservationSet& omega, Encoding encoding, int r,
                   double weight_decay, const TrainConfig& cfg, uint64_t seed) {
  cfg.validate();
  if (r < 1) throw Error(ErrorCode::invalid_argument, "mc_train: r must be >= 1");
  if (weight_decay < 0.0)
    throw Error(ErrorCode::invalid_argument, "mc_train: weight_decay must be >= 0");
  if (t.n != omega.n) throw Error(ErrorCode::shape_mismatch, "mc_train: order mismatch");

  const int n = t.n;
  const Mat target = encode_table(t, encoding);
  // observed (row, col) entries of the encoded matrix
  std::vector<std::pair<int, int>> obs;
  for (auto [a, b] : omega.cells) {
    if (encoding == Encoding::ordinal) {
      obs.emplace_back(a, b);
    } else {
      for (int c = 0; c < n; ++c) obs.emplace_back(a * n + b, c);
    }
  }

  Rng rng(seed);
  MCFactors f;
  f.encoding = encoding;
  f.n = n;
  f.r = r;
  f.u = Mat(target.rows, r);
  f.v = Mat(target.cols, r);
  const double sd = 1.0 / std::sqrt(static_cast<double>(r));
  for (double& x : f.u.data) x = sd * rng.normal();
  for (double& x : f.v.data) x = sd * rng.normal();

  Mat mu(f.u.rows, r), vu(f.u.rows, r), mv(f.v.rows, r), vv(f.v.rows, r);
  Mat gu(f.u.rows, r), gv(f.v.rows, r);

  for (int step = 0; step < cfg.steps_max; ++step) {
    std::fill(gu.data.begin(), gu.data.end(), 0.0);
    std::fill(gv.data.begin(), gv.data.end(), 0.0);
    double loss = 0.0;
    for (auto [i, j] : obs) {
      double pred = 0.0;
      for (int k = 0; k < r; ++k) pred += f.u(i, k) * f.v(j, k);
      const double res = pred - target(i, j);
      loss += res * res;
      for (int k = 0; k < r; ++k) {
        gu(i, k) += 2.0 * res * f.v(j, k);
        gv(j, k) += 2.0 * res * f.u(i, k);
      }
    }
    if (weight_decay > 0.0) {
      loss += weight_decay * (frob2(f.u) + frob2(f.v));
      for (size_t k = 0; k < gu.data.size(); ++k) gu.data[k] += 2.0 * weight_decay * f.u.data[k];
      for (size_t k = 0; k < gv.data.size(); ++k) gv.data[k] += 2.0 * weight_decay * f.v.data[k];
    }
    if (!std::isfinite(loss) || loss > 1e12) throw DivergedError(step);
    f.loss_final = loss;
    if (loss <= cfg.loss_tol) {
      f.converged = true;
      f.steps_used = step;
      return f;
    }
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, step + 1);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, step + 1);
    auto update = [&](Mat& theta, Mat& m1, Mat& m2, const Mat& g) {
      for (size_t k = 0; k < theta.data.size(); ++k) {
        m1.data[k] = cfg.adam_beta1 * m1.data[k] + (1.0 - cfg.adam_beta1) * g.data[k];
        m2.data[k] = cfg.adam_beta2 * m2.data[k] + (1.0 - cfg.adam_beta2) * g.data[k] * g.data[k];
        theta.data[k] -=
            cfg.lr * (m1.data[k] / bc1) / (std::sqrt(m2.data[k] / bc2) + cfg.adam_eps);
      }
    };
    update(f.u, mu, vu, gu);
    update(f.v, mv, vv, gv);
    f.steps_used = step + 1;
  }
  return f;
}

CayleyTable mc_decode(const MCFactors& f) {
  const int n = f.n;
  CayleyTable t(n);
  if (f.encoding == Encoding::ordinal) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double pred = 0.0;
        for (int k = 0; k < f.r; ++k) pred += f.u(a, k) * f.v(b, k);
        const long rounded = std::lround(pred);
        t.at(a, b) = static_cast<int>(std::clamp<long>(rounded, 0, n - 1));
      }
    return t;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      int best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < n; ++c) {
        double pred = 0.0;
        for (int k = 0; k < f.r; ++k) pred += f.u(a * n + b, k) * f.v(c, k);
        if (pred > best_v) {
          best_v = pred;
          best = c;
        }
      }
      t.at(a, b) = best;
    }
  return t;
}

double nuclear_norm(const Mat& x) {
  double s = 0.0;
  for (double v : singular_values(x)) s += v;
  return s;
}

}  // namespace cayrec
