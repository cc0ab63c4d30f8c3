#pragma once

// Least-squares endpoints under a fixed optimizer Q and the kernel
// K_Q = J Q J^T that governs the function-space flow.

#include <cmath>
#include <limits>

#include "greedyopt/linalg.hpp"

namespace greedyopt {

/// L(theta) = 0.5 ||J theta - y||^2.
template <typename Scalar>
struct LeastSquaresProblem {
  MatrixX<Scalar> jac;
  VectorX<Scalar> target;
};

template <typename Scalar>
void validate(const LeastSquaresProblem<Scalar>& prob) {
  require(prob.jac.rows() >= 1 && prob.jac.cols() >= 1, ErrorKind::DimensionMismatch, "jacobian must be non-empty");
  require(prob.target.size() == prob.jac.rows(), ErrorKind::DimensionMismatch, "target length differs from jacobian rows");
  require(all_finite(prob.jac) && all_finite(prob.target), ErrorKind::NonFinite, "problem has NaN/Inf");
}

template <typename Scalar>
class KernelMatrix {
 public:
  explicit KernelMatrix(const MatrixX<Scalar>& k) {
    require(k.rows() == k.cols() && k.rows() >= 1, ErrorKind::DimensionMismatch, "kernel must be square");
    require(all_finite(k), ErrorKind::NonFinite, "kernel has NaN/Inf");
    const Scalar scale = std::max(Scalar(1), k.cwiseAbs().maxCoeff());
    require((k - k.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * scale, ErrorKind::NonPSDInput,
            "kernel must be symmetric");
    k_ = symmetrize(k);
    require(is_psd(k_, Scalar(1e-10)), ErrorKind::NonPSDInput, "kernel must be PSD");
  }

  Index size() const { return k_.rows(); }
  const MatrixX<Scalar>& matrix() const { return k_; }

 private:
  MatrixX<Scalar> k_;
};

inline constexpr double kPinvCutoff = 1e-10;

namespace detail {

template <typename Scalar>
void check_q(const MatrixX<Scalar>& q, Index d) {
  require(q.rows() == d && q.cols() == d, ErrorKind::DimensionMismatch, "optimizer shape differs from parameter dim");
}

}  // namespace detail

/// theta_inf = Q J^T (J Q J^T)^+ y: the minimum Q^{-1}-norm interpolant
/// reached from theta_0 = 0.
template <typename Scalar>
VectorX<Scalar> analytic_endpoint(const MatrixX<Scalar>& q, const LeastSquaresProblem<Scalar>& prob) {
  validate(prob);
  detail::check_q(q, prob.jac.cols());
  const MatrixX<Scalar> qjt = q * prob.jac.transpose();
  const MatrixX<Scalar> kernel = symmetrize(MatrixX<Scalar>(prob.jac * qjt));
  if (kernel.isZero(0)) return VectorX<Scalar>::Zero(prob.jac.cols());
  return qjt * (symmetric_pinv(kernel, Scalar(kPinvCutoff)) * prob.target);
}

/// Largest stable Euler step 2 / lambda_max(Q J^T J), computed on the
/// similar symmetric matrix Q^{1/2} J^T J Q^{1/2}. Infinite when Q J^T J = 0.
template <typename Scalar>
Scalar flow_step_bound(const MatrixX<Scalar>& q, const LeastSquaresProblem<Scalar>& prob) {
  validate(prob);
  detail::check_q(q, prob.jac.cols());
  const MatrixX<Scalar> root = spectral_map(q, [](Scalar s) { return std::sqrt(std::max(s, Scalar(0))); });
  const MatrixX<Scalar> m = root * prob.jac.transpose() * prob.jac * root;
  const Scalar top = spectral_radius_sym(m);
  return top > 0 ? Scalar(2) / top : std::numeric_limits<Scalar>::infinity();
}

/// Explicit Euler on theta' = -Q J^T (J theta - y) from theta_0 = 0.
///
/// Stops once the velocity norm is at most `tol`; a check that finds it
/// already there costs one iteration.
template <typename Scalar>
VectorX<Scalar> flow_endpoint(const MatrixX<Scalar>& q, const LeastSquaresProblem<Scalar>& prob, Scalar step,
                              Scalar tol, long max_iters, long* iterations = nullptr) {
  validate(prob);
  detail::check_q(q, prob.jac.cols());
  require(step > 0 && tol > 0 && max_iters >= 1, ErrorKind::ConfigError, "step, tol and max_iters must be positive");
  const MatrixX<Scalar> qjt = q * prob.jac.transpose();
  VectorX<Scalar> theta = VectorX<Scalar>::Zero(prob.jac.cols());
  for (long it = 1; it <= max_iters; ++it) {
    const VectorX<Scalar> velocity = qjt * (prob.jac * theta - prob.target);
    const Scalar speed = velocity.norm();
    if (!std::isfinite(speed)) fail(ErrorKind::NonConvergence, "flow diverged; step exceeds the stability bound");
    if (speed <= tol) {
      if (iterations) *iterations = it;
      return theta;
    }
    theta -= step * velocity;
  }
  fail(ErrorKind::NonConvergence, "flow did not reach tolerance within max_iters");
}

/// K_Q = J Q J^T.
template <typename Scalar>
KernelMatrix<Scalar> oak_kernel(const MatrixX<Scalar>& jac, const MatrixX<Scalar>& q) {
  detail::check_q(q, jac.cols());
  return KernelMatrix<Scalar>(symmetrize(MatrixX<Scalar>(jac * q * jac.transpose())));
}

template <typename Scalar>
struct Interpolant {
  VectorX<Scalar> alpha;
  Scalar rkhs_norm_sq;
};

/// alpha = K^+ y and ||f||^2 = y^T alpha.
///
/// With ridge > 0 this is kernel ridge regression, alpha = (K + ridge I)^{-1} y,
/// and the range check is skipped.
template <typename Scalar>
Interpolant<Scalar> min_norm_interpolant(const KernelMatrix<Scalar>& k, const VectorX<Scalar>& y, Scalar ridge = 0) {
  require(y.size() == k.size(), ErrorKind::DimensionMismatch, "target length differs from kernel size");
  require(all_finite(y), ErrorKind::NonFinite, "target has NaN/Inf");
  require(ridge >= 0, ErrorKind::ConfigError, "ridge must be >= 0");
  const MatrixX<Scalar>& km = k.matrix();
  VectorX<Scalar> alpha;
  if (ridge > 0) {
    const MatrixX<Scalar> reg = km + ridge * MatrixX<Scalar>::Identity(k.size(), k.size());
    alpha = symmetric_pinv(reg, Scalar(kPinvCutoff)) * y;
  } else {
    alpha = km.isZero(0) ? VectorX<Scalar>(VectorX<Scalar>::Zero(y.size()))
                         : VectorX<Scalar>(symmetric_pinv(km, Scalar(kPinvCutoff)) * y);
    const Scalar residual = (km * alpha - y).norm();
    require(residual <= Scalar(1e-8) * y.norm(), ErrorKind::InconsistentTarget,
            "target has a component outside the kernel range");
  }
  return {alpha, y.dot(alpha)};
}

}  // namespace greedyopt
