#pragma once

#include <string>
#include <vector>

#include "cayrec/error.hpp"
#include "cayrec/numerics.hpp"

namespace cayrec {

// The n x n multiplication table of a binary operation on {0..n-1}.
// cells[a*n + b] = a o b.
struct CayleyTable {
  int n = 0;
  std::vector<int> cells;

  CayleyTable() = default;
  explicit CayleyTable(int order)
      : n(order), cells(static_cast<size_t>(order) * order, 0) {
    if (order < 1) throw Error(ErrorCode::invalid_argument, "table order must be >= 1");
  }

  int at(int a, int b) const { return cells[static_cast<size_t>(a) * n + b]; }
  int& at(int a, int b) { return cells[static_cast<size_t>(a) * n + b]; }

  bool operator==(const CayleyTable& o) const = default;
};

// Row, column and symbol relabelings; each a bijection on {0..n-1}.
struct Isotopy {
  std::vector<int> f;  // rows
  std::vector<int> g;  // columns
  std::vector<int> h;  // symbols
};

CayleyTable cyclic_group(int n);
CayleyTable direct_product(const CayleyTable& t1, const CayleyTable& t2);
// Dihedral group of order 2m, m >= 3. Element (s, k) has index s*m + k.
CayleyTable dihedral_group(int m);

bool is_latin(const CayleyTable& t);
bool is_associative(const CayleyTable& t);
// Index of a two-sided identity element, or -1 if none exists.
int identity_element(const CayleyTable& t);

// result[a][b] = h(t[f(a)][g(b)])
CayleyTable apply_isotopy(const CayleyTable& t, const Isotopy& iso);
Isotopy inverse(const Isotopy& iso);
Isotopy identity_isotopy(int n);
Isotopy random_isotopy(int n, Rng& rng);

// Loop isotope of t with two-sided identity e = t[r][c]:
// result[x][y] = t[z][w] where t[z][c] = x and t[r][w] = y.
CayleyTable principal_loop_isotope(const CayleyTable& t, int r, int c);

// Decides via one principal loop isotope: a loop isotopic to a group is
// itself a group, so the isotope at (0,0) settles the question.
bool is_isotopic_to_group(const CayleyTable& t);

// Brute-force search for an isotopy carrying t onto g; n <= 5 only.
bool exhaustive_isotopy_check(const CayleyTable& t, const CayleyTable& g);

// Row-by-row backtracking; each row drawn as a random permutation subject
// to column constraints. Deterministic in (n, seed).
CayleyTable random_latin_square(int n, uint64_t seed);

// Rejection-samples random Latin squares until one is not isotopic to any
// group. Requires n >= 5 (all smaller squares are isotopic to groups).
CayleyTable find_nonassociative_quasigroup(int n, uint64_t seed);

// Serialization. JSON: {"n": int, "cells": [[int,...],...]}.
// Text: first line n, then n rows of space-separated entries.
std::string table_to_json(const CayleyTable& t);
CayleyTable table_from_json(const std::string& text);
std::string table_to_text(const CayleyTable& t);
CayleyTable table_from_text(const std::string& text);

}  // namespace cayrec
