#include "cayrec/algebra.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace cayrec {

namespace {

void check_table(const CayleyTable& t) {
  if (t.n < 1 || t.cells.size() != static_cast<size_t>(t.n) * t.n)
    throw Error(ErrorCode::invalid_argument, "malformed table");
  for (int v : t.cells)
    if (v < 0 || v >= t.n) throw Error(ErrorCode::invalid_argument, "table entry out of range");
}

bool is_permutation(const std::vector<int>& p, int n) {
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<bool> seen(n, false);
  for (int v : p) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace

CayleyTable cyclic_group(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "cyclic_group: n must be >= 1");
  CayleyTable t(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t.at(a, b) = (a + b) % n;
  return t;
}

CayleyTable direct_product(const CayleyTable& t1, const CayleyTable& t2) {
  check_table(t1);
  check_table(t2);
  if (!is_latin(t1) || !is_latin(t2))
    throw Error(ErrorCode::not_latin, "direct_product: inputs must be Latin");
  const int n1 = t1.n, n2 = t2.n;
  CayleyTable t(n1 * n2);
  for (int a1 = 0; a1 < n1; ++a1)
    for (int a2 = 0; a2 < n2; ++a2)
      for (int b1 = 0; b1 < n1; ++b1)
        for (int b2 = 0; b2 < n2; ++b2)
          t.at(a1 * n2 + a2, b1 * n2 + b2) = t1.at(a1, b1) * n2 + t2.at(a2, b2);
  return t;
}

CayleyTable dihedral_group(int m) {
  if (m < 3) throw Error(ErrorCode::invalid_argument, "dihedral_group: m must be >= 3");
  const int n = 2 * m;
  CayleyTable t(n);
  // (s1,k1)*(s2,k2) = (s1 xor s2, s2 ? (k2 - k1) : (k1 + k2) mod m)
  for (int s1 = 0; s1 < 2; ++s1)
    for (int k1 = 0; k1 < m; ++k1)
      for (int s2 = 0; s2 < 2; ++s2)
        for (int k2 = 0; k2 < m; ++k2) {
          const int s = s1 ^ s2;
          const int k = s2 ? ((k2 - k1) % m + m) % m : (k1 + k2) % m;
          t.at(s1 * m + k1, s2 * m + k2) = s * m + k;
        }
  return t;
}

bool is_latin(const CayleyTable& t) {
  check_table(t);
  const int n = t.n;
  std::vector<bool> seen(n);
  for (int a = 0; a < n; ++a) {
    std::fill(seen.begin(), seen.end(), false);
    for (int b = 0; b < n; ++b) {
      const int v = t.at(a, b);
      if (seen[v]) return false;
      seen[v] = true;
    }
  }
  for (int b = 0; b < n; ++b) {
    std::fill(seen.begin(), seen.end(), false);
    for (int a = 0; a < n; ++a) {
      const int v = t.at(a, b);
      if (seen[v]) return false;
      seen[v] = true;
    }
  }
  return true;
}

bool is_associative(const CayleyTable& t) {
  check_table(t);
  const int n = t.n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (t.at(t.at(a, b), c) != t.at(a, t.at(b, c))) return false;
  return true;
}

int identity_element(const CayleyTable& t) {
  check_table(t);
  for (int e = 0; e < t.n; ++e) {
    bool ok = true;
    for (int x = 0; x < t.n && ok; ++x)
      ok = (t.at(e, x) == x) && (t.at(x, e) == x);
    if (ok) return e;
  }
  return -1;
}

CayleyTable apply_isotopy(const CayleyTable& t, const Isotopy& iso) {
  check_table(t);
  if (!is_permutation(iso.f, t.n) || !is_permutation(iso.g, t.n) || !is_permutation(iso.h, t.n))
    throw Error(ErrorCode::invalid_isotopy, "apply_isotopy: components must be bijections");
  CayleyTable out(t.n);
  for (int a = 0; a < t.n; ++a)
    for (int b = 0; b < t.n; ++b) out.at(a, b) = iso.h[t.at(iso.f[a], iso.g[b])];
  return out;
}

Isotopy inverse(const Isotopy& iso) {
  const int n = static_cast<int>(iso.f.size());
  Isotopy inv;
  inv.f.resize(n);
  inv.g.resize(n);
  inv.h.resize(n);
  for (int i = 0; i < n; ++i) {
    inv.f[iso.f[i]] = i;
    inv.g[iso.g[i]] = i;
    inv.h[iso.h[i]] = i;
  }
  return inv;
}

Isotopy identity_isotopy(int n) {
  Isotopy iso;
  iso.f.resize(n);
  iso.g.resize(n);
  iso.h.resize(n);
  std::iota(iso.f.begin(), iso.f.end(), 0);
  std::iota(iso.g.begin(), iso.g.end(), 0);
  std::iota(iso.h.begin(), iso.h.end(), 0);
  return iso;
}

Isotopy random_isotopy(int n, Rng& rng) {
  Isotopy iso = identity_isotopy(n);
  rng.shuffle(iso.f);
  rng.shuffle(iso.g);
  rng.shuffle(iso.h);
  return iso;
}

CayleyTable principal_loop_isotope(const CayleyTable& t, int r, int c) {
  if (!is_latin(t)) throw Error(ErrorCode::not_latin, "principal_loop_isotope: table not Latin");
  if (r < 0 || r >= t.n || c < 0 || c >= t.n)
    throw Error(ErrorCode::invalid_argument, "principal_loop_isotope: cell out of range");
  const int n = t.n;
  // rdiv[x] = z with t[z][c] = x; ldiv[y] = w with t[r][w] = y
  std::vector<int> rdiv(n), ldiv(n);
  for (int z = 0; z < n; ++z) rdiv[t.at(z, c)] = z;
  for (int w = 0; w < n; ++w) ldiv[t.at(r, w)] = w;
  CayleyTable out(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) out.at(x, y) = t.at(rdiv[x], ldiv[y]);
  return out;
}

bool is_isotopic_to_group(const CayleyTable& t) {
  return is_associative(principal_loop_isotope(t, 0, 0));
}

bool exhaustive_isotopy_check(const CayleyTable& t, const CayleyTable& g) {
  if (!is_latin(t) || !is_latin(g))
    throw Error(ErrorCode::not_latin, "exhaustive_isotopy_check: inputs must be Latin");
  if (t.n != g.n) throw Error(ErrorCode::shape_mismatch, "exhaustive_isotopy_check: orders differ");
  if (t.n > 5) throw Error(ErrorCode::size_limit, "exhaustive_isotopy_check: n must be <= 5");
  const int n = t.n;

  // For fixed (f, g) the symbol map h is forced cell by cell; reject on the
  // first inconsistency or non-injectivity.
  std::vector<int> fp(n), gp(n);
  std::iota(fp.begin(), fp.end(), 0);
  std::vector<int> h(n), hinv(n);
  do {
    std::iota(gp.begin(), gp.end(), 0);
    do {
      std::fill(h.begin(), h.end(), -1);
      std::fill(hinv.begin(), hinv.end(), -1);
      bool ok = true;
      for (int a = 0; a < n && ok; ++a)
        for (int b = 0; b < n && ok; ++b) {
          const int src = t.at(fp[a], gp[b]);
          const int dst = g.at(a, b);
          if (h[src] == -1 && hinv[dst] == -1) {
            h[src] = dst;
            hinv[dst] = src;
          } else if (h[src] != dst) {
            ok = false;
          }
        }
      if (ok) return true;
    } while (std::next_permutation(gp.begin(), gp.end()));
  } while (std::next_permutation(fp.begin(), fp.end()));
  return false;
}

namespace {

bool fill_row(const CayleyTable& t, int row, int col, std::vector<int>& rowvals,
              std::vector<bool>& row_used, const std::vector<std::vector<bool>>& col_used,
              Rng& rng) {
  const int n = t.n;
  if (col == n) return true;
  std::vector<int> cands;
  for (int s = 0; s < n; ++s)
    if (!row_used[s] && !col_used[col][s]) cands.push_back(s);
  rng.shuffle(cands);
  for (int s : cands) {
    rowvals[col] = s;
    row_used[s] = true;
    if (fill_row(t, row, col + 1, rowvals, row_used, col_used, rng)) return true;
    row_used[s] = false;
  }
  rowvals[col] = -1;
  return false;
}

}  // namespace

CayleyTable random_latin_square(int n, uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "random_latin_square: n must be >= 1");
  Rng rng(seed);
  for (;;) {
    CayleyTable t(n);
    std::vector<std::vector<bool>> col_used(n, std::vector<bool>(n, false));
    bool ok = true;
    for (int row = 0; row < n && ok; ++row) {
      std::vector<int> rowvals(n, -1);
      std::vector<bool> row_used(n, false);
      ok = fill_row(t, row, 0, rowvals, row_used, col_used, rng);
      if (!ok) break;  // dead square, restart from scratch
      for (int col = 0; col < n; ++col) {
        t.at(row, col) = rowvals[col];
        col_used[col][rowvals[col]] = true;
      }
    }
    if (ok) return t;
  }
}

CayleyTable find_nonassociative_quasigroup(int n, uint64_t seed) {
  if (n < 5)
    throw Error(ErrorCode::invalid_argument,
                "find_nonassociative_quasigroup: every Latin square of order < 5 is isotopic "
                "to a group");
  Rng rng(seed);
  for (;;) {
    const CayleyTable t = random_latin_square(n, rng.next_u64());
    if (!is_isotopic_to_group(t)) return t;
  }
}

std::string table_to_json(const CayleyTable& t) {
  check_table(t);
  nlohmann::json j;
  j["n"] = t.n;
  auto rows = nlohmann::json::array();
  for (int a = 0; a < t.n; ++a) {
    auto row = nlohmann::json::array();
    for (int b = 0; b < t.n; ++b) row.push_back(t.at(a, b));
    rows.push_back(std::move(row));
  }
  j["cells"] = std::move(rows);
  return j.dump();
}

CayleyTable table_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_error, std::string("table JSON parse failed: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("cells"))
    throw Error(ErrorCode::io_error, "table JSON missing 'n' or 'cells'");
  CayleyTable t(j["n"].get<int>());
  const auto& rows = j["cells"];
  if (static_cast<int>(rows.size()) != t.n)
    throw Error(ErrorCode::io_error, "table JSON row count mismatch");
  for (int a = 0; a < t.n; ++a) {
    if (static_cast<int>(rows[a].size()) != t.n)
      throw Error(ErrorCode::io_error, "table JSON column count mismatch");
    for (int b = 0; b < t.n; ++b) t.at(a, b) = rows[a][b].get<int>();
  }
  check_table(t);
  return t;
}

std::string table_to_text(const CayleyTable& t) {
  check_table(t);
  std::ostringstream os;
  os << t.n << "\n";
  for (int a = 0; a < t.n; ++a) {
    for (int b = 0; b < t.n; ++b) {
      if (b) os << ' ';
      os << t.at(a, b);
    }
    os << "\n";
  }
  return os.str();
}

CayleyTable table_from_text(const std::string& text) {
  std::istringstream is(text);
  int n = 0;
  if (!(is >> n) || n < 1) throw Error(ErrorCode::io_error, "table text: bad order line");
  CayleyTable t(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (!(is >> t.at(a, b))) throw Error(ErrorCode::io_error, "table text: truncated");
  check_table(t);
  return t;
}

}  // namespace cayrec
