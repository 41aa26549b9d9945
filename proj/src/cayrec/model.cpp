#include "cayrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace cayrec {

namespace {

void check_params(const FactorParams& p) {
  if (p.n < 1 || p.A.size() != static_cast<size_t>(p.n) || p.B.size() != p.A.size() ||
      p.C.size() != p.A.size())
    throw Error(ErrorCode::invalid_argument, "malformed FactorParams");
}

void check_index(const FactorParams& p, int a, int b, int c) {
  if (a < 0 || a >= p.n || b < 0 || b >= p.n || c < 0 || c >= p.n)
    throw Error(ErrorCode::invalid_argument, "forward: index out of range");
}

}  // namespace

ObservationSet::ObservationSet(int order, std::vector<std::pair<int, int>> obs)
    : n(order), cells(std::move(obs)) {
  if (order < 1) throw Error(ErrorCode::invalid_argument, "ObservationSet: order must be >= 1");
  for (auto [a, b] : cells)
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw Error(ErrorCode::invalid_argument, "ObservationSet: cell out of range");
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
}

ObservationSet ObservationSet::full(int order) {
  std::vector<std::pair<int, int>> cells;
  cells.reserve(static_cast<size_t>(order) * order);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b) cells.emplace_back(a, b);
  return ObservationSet(order, std::move(cells));
}

double forward(const FactorParams& p, int a, int b, int c) {
  check_params(p);
  check_index(p, a, b, c);
  return trace(gemm(gemm(p.A[a], p.B[b]), p.C[c])) / p.n;
}

double recon_loss(const FactorParams& p, const CayleyTable& t, const ObservationSet& omega) {
  check_params(p);
  if (t.n != p.n || omega.n != p.n)
    throw Error(ErrorCode::shape_mismatch, "recon_loss: order mismatch");
  const int n = p.n;
  double loss = 0.0;
  for (auto [a, b] : omega.cells) {
    const Mat m = gemm(p.A[a], p.B[b]);
    const int target = t.at(a, b);
    for (int c = 0; c < n; ++c) {
      const double r = trace_of_product(m, p.C[c]) / n - (c == target ? 1.0 : 0.0);
      loss += 0.5 * r * r;
    }
  }
  return loss;
}

double flatness(const FactorParams& p, const ObservationSet& omega) {
  check_params(p);
  if (omega.n != p.n) throw Error(ErrorCode::shape_mismatch, "flatness: order mismatch");
  const int n = p.n;

  std::vector<int> cnt_a(n, 0), cnt_b(n, 0);
  for (auto [a, b] : omega.cells) {
    ++cnt_a[a];
    ++cnt_b[b];
  }

  Mat cct_sum(n, n), ctc_sum(n, n);
  for (int c = 0; c < n; ++c) {
    gemm_acc(p.C[c], p.C[c].transposed(), cct_sum);
    gemm_acc(p.C[c].transposed(), p.C[c], ctc_sum);
  }

  double h = 0.0;
  for (auto [a, b] : omega.cells) h += n * frob2(gemm(p.A[a], p.B[b]));
  for (int b = 0; b < n; ++b)
    if (cnt_b[b] > 0)
      h += cnt_b[b] * trace_of_product(gemm(p.B[b].transposed(), p.B[b]), cct_sum);
  for (int a = 0; a < n; ++a)
    if (cnt_a[a] > 0)
      h += cnt_a[a] * trace_of_product(gemm(p.A[a], p.A[a].transposed()), ctc_sum);
  return h / (static_cast<double>(n) * n);
}

GradParams grad(const FactorParams& p, const CayleyTable& t, const ObservationSet& omega,
                double lambda, double* recon_out, double* flat_out) {
  check_params(p);
  if (t.n != p.n || omega.n != p.n)
    throw Error(ErrorCode::shape_mismatch, "grad: order mismatch");
  if (lambda < 0.0) throw Error(ErrorCode::invalid_argument, "grad: lambda must be >= 0");
  const int n = p.n;
  const double n2 = static_cast<double>(n) * n;

  GradParams g(n);
  double loss = 0.0;
  double flat = 0.0;

  std::vector<int> cnt_a(n, 0), cnt_b(n, 0);
  for (auto [a, b] : omega.cells) {
    ++cnt_a[a];
    ++cnt_b[b];
  }

  const bool want_flat = lambda > 0.0 || flat_out != nullptr;
  std::vector<Mat> bbt, btb, ata, aat;
  Mat cct_sum, ctc_sum;
  if (want_flat) {
    bbt.assign(n, Mat(n, n));
    btb.assign(n, Mat(n, n));
    ata.assign(n, Mat(n, n));
    aat.assign(n, Mat(n, n));
    cct_sum = Mat(n, n);
    ctc_sum = Mat(n, n);
    for (int i = 0; i < n; ++i) {
      const Mat bt = p.B[i].transposed();
      gemm_acc(p.B[i], bt, bbt[i]);
      gemm_acc(bt, p.B[i], btb[i]);
      const Mat at = p.A[i].transposed();
      gemm_acc(at, p.A[i], ata[i]);
      gemm_acc(p.A[i], at, aat[i]);
      const Mat ct = p.C[i].transposed();
      gemm_acc(p.C[i], ct, cct_sum);
      gemm_acc(ct, p.C[i], ctc_sum);
    }
  }

  // residual pass
  Mat racc(n, n);
  for (auto [a, b] : omega.cells) {
    const Mat m = gemm(p.A[a], p.B[b]);
    const int target = t.at(a, b);
    std::fill(racc.data.begin(), racc.data.end(), 0.0);
    for (int c = 0; c < n; ++c) {
      const double r = trace_of_product(m, p.C[c]) / n - (c == target ? 1.0 : 0.0);
      loss += 0.5 * r * r;
      const double rn = r / n;
      // dL/dC_c += (r/n) M^T
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.C[c](i, j) += rn * m(j, i);
      for (size_t k = 0; k < racc.data.size(); ++k) racc.data[k] += r * p.C[c].data[k];
    }
    // dL/dA_a += (1/n) (B_b racc)^T, dL/dB_b += (1/n) (racc A_a)^T
    const Mat br = gemm(p.B[b], racc);
    const Mat ra = gemm(racc, p.A[a]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        g.A[a](i, j) += br(j, i) / n;
        g.B[b](i, j) += ra(j, i) / n;
      }
    if (want_flat) flat += n * frob2(m);
  }

  if (want_flat) {
    for (int b = 0; b < n; ++b)
      if (cnt_b[b] > 0) flat += cnt_b[b] * trace_of_product(btb[b], cct_sum);
    for (int a = 0; a < n; ++a)
      if (cnt_a[a] > 0) flat += cnt_a[a] * trace_of_product(aat[a], ctc_sum);
    flat /= n2;
  }

  if (lambda > 0.0) {
    const double scale = 2.0 * lambda / n2;
    // per-a and per-b partner sums over observed cells
    std::vector<Mat> sbbt(n, Mat(n, n)), sata(n, Mat(n, n));
    for (auto [a, b] : omega.cells) {
      for (size_t k = 0; k < sbbt[a].data.size(); ++k) sbbt[a].data[k] += bbt[b].data[k];
      for (size_t k = 0; k < sata[b].data.size(); ++k) sata[b].data[k] += ata[a].data[k];
    }
    Mat sb(n, n), sa(n, n);
    for (int b = 0; b < n; ++b)
      if (cnt_b[b] > 0)
        for (size_t k = 0; k < sb.data.size(); ++k) sb.data[k] += cnt_b[b] * btb[b].data[k];
    for (int a = 0; a < n; ++a)
      if (cnt_a[a] > 0)
        for (size_t k = 0; k < sa.data.size(); ++k) sa.data[k] += cnt_a[a] * aat[a].data[k];

    Mat tmp(n, n);
    for (int a = 0; a < n; ++a) {
      if (cnt_a[a] == 0) continue;
      std::fill(tmp.data.begin(), tmp.data.end(), 0.0);
      gemm_acc(p.A[a], sbbt[a], tmp);  // n * A_a sum_b B_b B_b^T, n folded below
      for (size_t k = 0; k < tmp.data.size(); ++k) g.A[a].data[k] += scale * n * tmp.data[k];
      std::fill(tmp.data.begin(), tmp.data.end(), 0.0);
      gemm_acc(ctc_sum, p.A[a], tmp);
      for (size_t k = 0; k < tmp.data.size(); ++k)
        g.A[a].data[k] += scale * cnt_a[a] * tmp.data[k];
    }
    for (int b = 0; b < n; ++b) {
      if (cnt_b[b] == 0) continue;
      std::fill(tmp.data.begin(), tmp.data.end(), 0.0);
      gemm_acc(sata[b], p.B[b], tmp);
      for (size_t k = 0; k < tmp.data.size(); ++k) g.B[b].data[k] += scale * n * tmp.data[k];
      std::fill(tmp.data.begin(), tmp.data.end(), 0.0);
      gemm_acc(p.B[b], cct_sum, tmp);
      for (size_t k = 0; k < tmp.data.size(); ++k)
        g.B[b].data[k] += scale * cnt_b[b] * tmp.data[k];
    }
    for (int c = 0; c < n; ++c) {
      std::fill(tmp.data.begin(), tmp.data.end(), 0.0);
      gemm_acc(sb, p.C[c], tmp);
      gemm_acc(p.C[c], sa, tmp);
      for (size_t k = 0; k < tmp.data.size(); ++k) g.C[c].data[k] += scale * tmp.data[k];
    }
  }

  if (recon_out) *recon_out = loss;
  if (flat_out) *flat_out = flat;
  return g;
}

FactorParams regular_representation(const CayleyTable& t) {
  if (!is_latin(t) || !is_associative(t) || identity_element(t) < 0)
    throw Error(ErrorCode::not_a_group, "regular_representation: table is not a group");
  const int n = t.n;
  FactorParams p(n);
  for (int gidx = 0; gidx < n; ++gidx) {
    for (int x = 0; x < n; ++x) {
      p.A[gidx](t.at(gidx, x), x) = 1.0;  // P_g e_x = e_{g o x}
      p.B[gidx](t.at(gidx, x), x) = 1.0;
      p.C[gidx](x, t.at(gidx, x)) = 1.0;  // P_g^T
    }
  }
  return p;
}

FactorParams init_params(int n, double scale, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "init_params: n must be >= 1");
  if (scale <= 0.0) throw Error(ErrorCode::invalid_argument, "init_params: scale must be > 0");
  FactorParams p(n);
  const double sd = scale / std::sqrt(static_cast<double>(n));
  for (auto* stack : {&p.A, &p.B, &p.C})
    for (Mat& m : *stack)
      for (double& v : m.data) v = sd * rng.normal();
  return p;
}

namespace {

void check_orthogonal(const Mat& u, const char* name) {
  if (u.rows != u.cols) throw Error(ErrorCode::invalid_argument, "gauge matrix not square");
  const Mat gram = gemm(u.transposed(), u);
  for (int i = 0; i < u.rows; ++i)
    for (int j = 0; j < u.cols; ++j) {
      const double target = (i == j) ? 1.0 : 0.0;
      if (std::abs(gram(i, j) - target) > 1e-10)
        throw Error(ErrorCode::invalid_argument,
                    std::string("apply_gauge: matrix ") + name + " is not orthogonal");
    }
}

}  // namespace

FactorParams apply_gauge(const FactorParams& p, const Mat& u, const Mat& v, const Mat& w) {
  check_params(p);
  if (u.rows != p.n || v.rows != p.n || w.rows != p.n)
    throw Error(ErrorCode::shape_mismatch, "apply_gauge: size mismatch");
  check_orthogonal(u, "U");
  check_orthogonal(v, "V");
  check_orthogonal(w, "W");
  FactorParams out(p.n);
  const Mat ut = u.transposed(), vt = v.transposed(), wt = w.transposed();
  for (int i = 0; i < p.n; ++i) {
    out.A[i] = gemm(gemm(u, p.A[i]), vt);
    out.B[i] = gemm(gemm(v, p.B[i]), wt);
    out.C[i] = gemm(gemm(w, p.C[i]), ut);
  }
  return out;
}

namespace {

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw Error(ErrorCode::io_error, "checkpoint: bad float literal");
  return v;
}

nlohmann::json stack_to_json(const std::vector<Mat>& stack) {
  auto arr = nlohmann::json::array();
  for (const Mat& m : stack) {
    auto rows = nlohmann::json::array();
    for (int i = 0; i < m.rows; ++i) {
      auto row = nlohmann::json::array();
      for (int j = 0; j < m.cols; ++j) row.push_back(hex_double(m(i, j)));
      rows.push_back(std::move(row));
    }
    arr.push_back(std::move(rows));
  }
  return arr;
}

void stack_from_json(const nlohmann::json& arr, std::vector<Mat>& stack, int n) {
  if (static_cast<int>(arr.size()) != n)
    throw Error(ErrorCode::io_error, "checkpoint: stack size mismatch");
  for (int s = 0; s < n; ++s) {
    const auto& rows = arr[s];
    if (static_cast<int>(rows.size()) != n)
      throw Error(ErrorCode::io_error, "checkpoint: slice row count mismatch");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n)
        throw Error(ErrorCode::io_error, "checkpoint: slice column count mismatch");
      for (int j = 0; j < n; ++j)
        stack[s](i, j) = parse_hex_double(rows[i][j].get<std::string>());
    }
  }
}

}  // namespace

std::string params_to_json(const FactorParams& p) {
  check_params(p);
  nlohmann::json j;
  j["n"] = p.n;
  j["A"] = stack_to_json(p.A);
  j["B"] = stack_to_json(p.B);
  j["C"] = stack_to_json(p.C);
  return j.dump();
}

FactorParams params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_error, std::string("checkpoint parse failed: ") + e.what());
  }
  FactorParams p(j.at("n").get<int>());
  stack_from_json(j.at("A"), p.A, p.n);
  stack_from_json(j.at("B"), p.B, p.n);
  stack_from_json(j.at("C"), p.C, p.n);
  return p;
}

std::vector<double> pack(const FactorParams& p) {
  check_params(p);
  std::vector<double> theta;
  theta.reserve(3ul * p.n * p.n * p.n);
  for (const auto* stack : {&p.A, &p.B, &p.C})
    for (const Mat& m : *stack) theta.insert(theta.end(), m.data.begin(), m.data.end());
  return theta;
}

FactorParams unpack(const std::vector<double>& theta, int n) {
  const size_t per_stack = static_cast<size_t>(n) * n * n;
  if (theta.size() != 3 * per_stack)
    throw Error(ErrorCode::shape_mismatch, "unpack: vector length mismatch");
  FactorParams p(n);
  size_t k = 0;
  for (auto* stack : {&p.A, &p.B, &p.C})
    for (Mat& m : *stack)
      for (double& v : m.data) v = theta[k++];
  return p;
}

}  // namespace cayrec
