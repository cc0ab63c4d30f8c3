#pragma once

#include <array>

#include "greedyopt/linalg.hpp"

namespace greedyopt {

enum class OrthoMethod { exact, ns5 };

/// Coefficients (a, b, c) of X <- a X + b (X X^T) X + c (X X^T)^2 X.
///
/// `convergent` is the classical quintic polar iteration: singular values in
/// (0, 1] converge to 1 with a third-order fixed point. `muon_fast` trades
/// accuracy for speed and leaves singular values scattered in roughly
/// [0.7, 1.2]; it is kept for comparison only.
struct Ns5Coefficients {
  double a, b, c;
  static constexpr Ns5Coefficients convergent() { return {15.0 / 8.0, -10.0 / 8.0, 3.0 / 8.0}; }
  static constexpr Ns5Coefficients muon_fast() { return {3.4445, -4.7750, 2.0315}; }
};

/// Orthogonal polar factor U V^T of the compact SVD of m.
///
/// Computed from the smaller Gram matrix: for p >= q, O = m (m^T m)^{-1/2} on
/// the support of m^T m. Singular values below 1e-7 * sigma_max count as zero,
/// so rank-deficient inputs yield the partial isometry U_r V_r^T.
template <typename Derived>
MatrixX<typename Derived::Scalar> polar_factor(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require(all_finite(m), ErrorKind::NonFinite, "orthogonalize input has NaN/Inf");
  require(!m.isZero(0), ErrorKind::ZeroMatrix, "cannot orthogonalize the zero matrix");
  const bool tall = m.rows() >= m.cols();
  MatrixX<Scalar> gram = tall ? MatrixX<Scalar>(m.transpose() * m) : MatrixX<Scalar>(m * m.transpose());
  auto eig = symmetric_eigen(gram);
  const Scalar cut = Scalar(1e-14) * eig.values.maxCoeff();
  VectorX<Scalar> inv_root =
      eig.values.unaryExpr([cut](Scalar s) { return s > cut ? Scalar(1) / std::sqrt(s) : Scalar(0); });
  MatrixX<Scalar> w = eig.vectors * inv_root.asDiagonal() * eig.vectors.transpose();
  return tall ? MatrixX<Scalar>(m * w) : MatrixX<Scalar>(w * m);
}

/// Five quintic Newton-Schulz steps on m / (||m||_F + 1e-7).
template <typename Derived>
MatrixX<typename Derived::Scalar> newton_schulz5(const Eigen::MatrixBase<Derived>& m,
                                                 Ns5Coefficients coef = Ns5Coefficients::convergent()) {
  using Scalar = typename Derived::Scalar;
  require(all_finite(m), ErrorKind::NonFinite, "orthogonalize input has NaN/Inf");
  const bool tall = m.rows() > m.cols();
  MatrixX<Scalar> x = tall ? MatrixX<Scalar>(m.transpose()) : MatrixX<Scalar>(m);
  x /= (x.norm() + Scalar(1e-7));
  const Scalar a = static_cast<Scalar>(coef.a);
  const Scalar b = static_cast<Scalar>(coef.b);
  const Scalar c = static_cast<Scalar>(coef.c);
  for (int it = 0; it < 5; ++it) {
    MatrixX<Scalar> gram = x * x.transpose();
    MatrixX<Scalar> poly = b * gram + c * gram * gram;
    x = a * x + poly * x;
  }
  return tall ? MatrixX<Scalar>(x.transpose()) : x;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> orthogonalize(const Eigen::MatrixBase<Derived>& m, OrthoMethod method,
                                                Ns5Coefficients coef = Ns5Coefficients::convergent()) {
  return method == OrthoMethod::exact ? polar_factor(m) : newton_schulz5(m, coef);
}

}  // namespace greedyopt
