#pragma once

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "greedyopt/error.hpp"

namespace greedyopt {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted nonincreasing.
/// Column i of `vectors` belongs to `values(i)`.
template <typename Scalar>
struct SymmetricEigen {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
auto symmetrize(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return MatrixX<Scalar>(Scalar(0.5) * (m + m.transpose()));
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps over all (p, q) pairs until the off-diagonal Frobenius mass drops
/// below 1e-14 * ||M||_F or 100 sweeps have run. The input is symmetrized
/// first. Ties in the final sort keep the ascending index order of the
/// diagonal produced by the sweeps.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> symmetric_eigen(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "eigensolver needs a square matrix");
  require(all_finite(m), ErrorKind::NonFinite, "eigensolver input has NaN/Inf");

  const Index n = m.rows();
  MatrixX<Scalar> a = symmetrize(m);
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);

  const Scalar threshold = Scalar(1e-14) * a.norm();
  constexpr int kMaxSweeps = 100;
  auto off_norm = [&]() {
    Scalar s = 0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > threshold; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });

  SymmetricEigen<Scalar> out{VectorX<Scalar>(n), MatrixX<Scalar>(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// U diag(values) U^T, exactly symmetrized.
template <typename Scalar>
MatrixX<Scalar> reassemble(const MatrixX<Scalar>& vectors, const VectorX<Scalar>& values) {
  MatrixX<Scalar> m = vectors * values.asDiagonal() * vectors.transpose();
  return symmetrize(m);
}

/// Applies a scalar function to the spectrum of a symmetric matrix.
template <typename Derived, typename Fn>
MatrixX<typename Derived::Scalar> spectral_map(const Eigen::MatrixBase<Derived>& m, Fn&& fn) {
  auto eig = symmetric_eigen(m);
  auto mapped = eig.values.unaryExpr(fn).eval();
  return reassemble(eig.vectors, mapped);
}

/// Moore-Penrose pseudoinverse of a symmetric matrix; eigenvalues with
/// |lambda| <= rel_cutoff * max|lambda| are treated as zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetric_pinv(const Eigen::MatrixBase<Derived>& m,
                                                 typename Derived::Scalar rel_cutoff) {
  using Scalar = typename Derived::Scalar;
  auto eig = symmetric_eigen(m);
  const Scalar top = eig.values.cwiseAbs().maxCoeff();
  const Scalar cut = rel_cutoff * top;
  VectorX<Scalar> inv = eig.values.unaryExpr(
      [cut](Scalar s) { return std::abs(s) > cut ? Scalar(1) / s : Scalar(0); });
  return reassemble(eig.vectors, inv);
}

/// Largest eigenvalue magnitude of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar spectral_radius_sym(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return symmetric_eigen(m).values.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar rel_tol) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return true;
  auto eig = symmetric_eigen(m);
  const Scalar top = eig.values.cwiseAbs().maxCoeff();
  return eig.values.minCoeff() >= -rel_tol * top;
}

}  // namespace greedyopt
