// Small dense matrices of expressions and of doubles: symbolic Gaussian
// elimination for momentum inversion, numeric row reduction for rank.
#pragma once

#include <cmath>
#include <vector>

#include "hjdyn/calculus.hpp"
#include "hjdyn/errors.hpp"
#include "hjdyn/simplify.hpp"

namespace hjdyn {

using ExprMatrix = std::vector<std::vector<ExprPtr>>;

/// Solves M x = rhs by Gauss-Jordan elimination with simplified entries.
/// Pivots are entries that do not simplify to zero; structurally zero
/// factors skip their row operation, which keeps diagonal systems cheap.
inline std::vector<ExprPtr> symbolic_solve(const ExprMatrix& m, const std::vector<ExprPtr>& rhs) {
  const std::size_t n = m.size();
  ExprMatrix a(n);
  std::vector<ExprPtr> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i].resize(n);
    for (std::size_t j = 0; j < n; ++j) a[i][j] = simplify(m[i][j]);
    b[i] = simplify(rhs[i]);
  }
  std::vector<std::size_t> row_of_col(n);
  std::vector<bool> used(n, false);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    for (std::size_t r = 0; r < n; ++r)
      if (!used[r] && !a[r][col]->is_zero_constant()) {
        pivot = r;
        break;
      }
    if (pivot == n)
      throw UnsupportedModelError("symbolic elimination found no pivot in column " +
                                  std::to_string(col));
    used[pivot] = true;
    row_of_col[col] = pivot;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == pivot || a[r][col]->is_zero_constant()) continue;
      const ExprPtr factor = simplify(div(a[r][col], a[pivot][col]));
      for (std::size_t j = col; j < n; ++j)
        a[r][j] = simplify(sub(a[r][j], mul(factor, a[pivot][j])));
      b[r] = simplify(sub(b[r], mul(factor, b[pivot])));
    }
  }
  std::vector<ExprPtr> x(n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t r = row_of_col[col];
    x[col] = simplify(div(b[r], a[r][col]));
  }
  return x;
}

struct NumericReduction {
  int rank = 0;
  std::vector<int> pivot_columns;
};

/// Row echelon reduction with partial pivoting; entries below `tol` in
/// magnitude are treated as zero.
inline NumericReduction numeric_row_reduce(std::vector<std::vector<double>> m, double tol) {
  NumericReduction out;
  if (m.empty()) return out;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t best = r;
    for (std::size_t i = r + 1; i < rows; ++i)
      if (std::abs(m[i][c]) > std::abs(m[best][c])) best = i;
    if (std::abs(m[best][c]) <= tol) continue;
    std::swap(m[r], m[best]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      const double f = m[i][c] / m[r][c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    out.pivot_columns.push_back(static_cast<int>(c));
    ++out.rank;
    ++r;
  }
  return out;
}

}  // namespace hjdyn
