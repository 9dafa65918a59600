#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>

#include "hulc/rng.hpp"

namespace hulc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Pivots below this fraction of the largest diagonal entry are treated as
/// numerical rank deficiency.
inline constexpr double kPivotTolerance = 1e-12;

/// Cholesky factor L (lower triangular, L L^T = m) of a symmetric matrix.
/// Only the lower triangle of `m` is read. Returns nullopt when the matrix is
/// ill-conditioned: a pivot below kPivotTolerance * max diagonal entry, or a
/// non-finite entry.
template <typename Derived>
std::optional<Matrix<typename Derived::Scalar>> spd_factorize(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols() || m.rows() == 0) throw std::domain_error("spd_factorize needs a square matrix");
  const Eigen::Index n = m.rows();
  if (!m.allFinite()) return std::nullopt;
  const Scalar max_diag = m.diagonal().maxCoeff();
  if (!(max_diag > Scalar(0))) return std::nullopt;
  const Scalar floor = Scalar(kPivotTolerance) * max_diag;

  Matrix<Scalar> l = Matrix<Scalar>::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot >= floor)) return std::nullopt;
    const Scalar ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

/// Solves (L L^T) X = B given the factor from spd_factorize.
template <typename DerivedL, typename DerivedB>
auto spd_solve(const Eigen::MatrixBase<DerivedL>& l, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedL::Scalar;
  Matrix<Scalar> x = l.template triangularView<Eigen::Lower>().solve(b);
  l.transpose().template triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

/// Diagonal of the sandwich J^{-1} V J^{-1}; nullopt when J does not factor.
template <typename DerivedJ, typename DerivedV>
std::optional<Vector<typename DerivedJ::Scalar>> sandwich_diagonal(const Eigen::MatrixBase<DerivedJ>& j,
                                                                   const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedJ::Scalar;
  const auto l = spd_factorize(j);
  if (!l) return std::nullopt;
  const Matrix<Scalar> j_inv = spd_solve(*l, Matrix<Scalar>::Identity(j.rows(), j.cols()));
  // diag(A V A) with A symmetric: row_k(A) . (V A)_k
  const Matrix<Scalar> va = v * j_inv;
  return (j_inv.cwiseProduct(va.transpose())).rowwise().sum();
}

/// L g for a supplied vector of standard normals g.
template <typename DerivedL, typename DerivedG>
Vector<typename DerivedL::Scalar> mvn_sample(const Eigen::MatrixBase<DerivedL>& l,
                                             const Eigen::MatrixBase<DerivedG>& g) {
  return l.template triangularView<Eigen::Lower>() * g;
}

/// L g with g drawn from `rng` (one normal per dimension, in index order).
template <typename DerivedL>
Vector<typename DerivedL::Scalar> mvn_sample(const Eigen::MatrixBase<DerivedL>& l, RngStream& rng) {
  using Scalar = typename DerivedL::Scalar;
  Vector<Scalar> g(l.rows());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = Scalar(rng.normal());
  return mvn_sample(l, g);
}

}  // namespace hulc
