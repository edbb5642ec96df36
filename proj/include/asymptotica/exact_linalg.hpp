#pragma once

// Gauss-Jordan elimination over an exact field. Scalar must have exact
// equality (Rational, Radical); nothing here is meant for floating point.

#include <optional>
#include <vector>

#include "asymptotica/core.hpp"

namespace asymptotica {

template <typename Scalar>
struct RowEchelon {
  Matrix<Scalar> reduced;      // reduced row echelon form
  std::vector<Index> pivots;   // pivot column of row i, increasing
};

/// Reduced row echelon form with pivots chosen in column order
/// (first nonzero entry at or below the current row).
template <typename Scalar>
RowEchelon<Scalar> row_reduce(Matrix<Scalar> m) {
  const Scalar zero(0);
  std::vector<Index> pivots;
  Index row = 0;
  for (Index col = 0; col < m.cols() && row < m.rows(); ++col) {
    Index pick = -1;
    for (Index r = row; r < m.rows(); ++r) {
      if (!(m(r, col) == zero)) {
        pick = r;
        break;
      }
    }
    if (pick < 0) continue;
    if (pick != row) m.row(pick).swap(m.row(row));
    const Scalar inv = Scalar(1) / m(row, col);
    for (Index c = col; c < m.cols(); ++c) m(row, c) = m(row, c) * inv;
    for (Index r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col) == zero) continue;
      const Scalar factor = m(r, col);
      for (Index c = col; c < m.cols(); ++c) m(r, c) = m(r, c) - factor * m(row, c);
    }
    pivots.push_back(col);
    ++row;
  }
  return {std::move(m), std::move(pivots)};
}

template <typename Scalar>
Index exact_rank(const Matrix<Scalar>& m) {
  return static_cast<Index>(row_reduce(m).pivots.size());
}

/// Kernel basis: one vector per non-pivot column, in column order, with that
/// free variable set to 1 and the other free variables set to 0.
template <typename Scalar>
std::vector<Vector<Scalar>> exact_nullspace(const Matrix<Scalar>& m) {
  const auto rref = row_reduce(m);
  std::vector<bool> is_pivot(static_cast<std::size_t>(m.cols()), false);
  for (Index p : rref.pivots) is_pivot[static_cast<std::size_t>(p)] = true;

  std::vector<Vector<Scalar>> basis;
  for (Index free = 0; free < m.cols(); ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    Vector<Scalar> v = Vector<Scalar>::Constant(m.cols(), Scalar(0));
    v(free) = Scalar(1);
    for (std::size_t i = 0; i < rref.pivots.size(); ++i) {
      v(rref.pivots[i]) = -rref.reduced(static_cast<Index>(i), free);
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

/// A particular solution of a·x = b (free variables zero), or nullopt when
/// the system is inconsistent.
template <typename Scalar>
std::optional<Vector<Scalar>> exact_solve(const Matrix<Scalar>& a, const Vector<Scalar>& b) {
  Matrix<Scalar> augmented(a.rows(), a.cols() + 1);
  augmented.leftCols(a.cols()) = a;
  augmented.col(a.cols()) = b;
  const auto rref = row_reduce(std::move(augmented));
  if (!rref.pivots.empty() && rref.pivots.back() == a.cols()) return std::nullopt;
  Vector<Scalar> x = Vector<Scalar>::Constant(a.cols(), Scalar(0));
  for (std::size_t i = 0; i < rref.pivots.size(); ++i) {
    x(rref.pivots[i]) = rref.reduced(static_cast<Index>(i), a.cols());
  }
  return x;
}

}  // namespace asymptotica
