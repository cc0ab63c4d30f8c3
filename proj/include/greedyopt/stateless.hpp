#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "greedyopt/moments.hpp"

namespace greedyopt {

// Trust regions. Each is a compact convex subset of the PSD cone containing 0.

/// {Q >= 0 : ||Q||_F^2 <= budget}
template <typename Scalar>
struct Frobenius {
  Scalar budget;
};

/// {Q >= 0 : Tr(Q) <= tau, Q <= lambda I}
template <typename Scalar>
struct Spectral {
  Scalar tau;
  Scalar lambda;
};

/// {Q >= 0 : Tr(Q^2 Sigma) <= budget}; the metric is the moment being solved for.
template <typename Scalar>
struct Lyapunov {
  Scalar budget;
};

/// {Q = diag(q) >= 0 : sum_j c_j q_j^2 <= budget}
template <typename Scalar>
struct Diagonal {
  Scalar budget;
  VectorX<Scalar> costs;
};

template <typename Scalar>
using TrustRegion = std::variant<Frobenius<Scalar>, Spectral<Scalar>, Lyapunov<Scalar>, Diagonal<Scalar>>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <typename Scalar>
std::string family_name(const TrustRegion<Scalar>& region) {
  return std::visit(overloaded{[](const Frobenius<Scalar>&) { return std::string("frobenius"); },
                               [](const Spectral<Scalar>&) { return std::string("spectral"); },
                               [](const Lyapunov<Scalar>&) { return std::string("lyapunov"); },
                               [](const Diagonal<Scalar>&) { return std::string("diagonal"); }},
                    region);
}

/// Throws InvalidBudget unless every parameter is strictly positive and the
/// diagonal cost vector (if any) matches `dim`.
template <typename Scalar>
void validate(const TrustRegion<Scalar>& region, Index dim) {
  std::visit(overloaded{
                 [](const Frobenius<Scalar>& r) {
                   require(r.budget > 0, ErrorKind::InvalidBudget, "Frobenius budget must be > 0");
                 },
                 [](const Spectral<Scalar>& r) {
                   require(r.tau > 0 && r.lambda > 0, ErrorKind::InvalidBudget,
                           "spectral tau and lambda must be > 0");
                 },
                 [](const Lyapunov<Scalar>& r) {
                   require(r.budget > 0, ErrorKind::InvalidBudget, "Lyapunov budget must be > 0");
                 },
                 [dim](const Diagonal<Scalar>& r) {
                   require(r.budget > 0, ErrorKind::InvalidBudget, "diagonal budget must be > 0");
                   require(r.costs.size() == dim, ErrorKind::DimensionMismatch,
                           "diagonal cost vector length differs from dimension");
                   require(r.costs.minCoeff() > 0, ErrorKind::InvalidBudget, "diagonal costs must be > 0");
                 }},
             region);
}

/// Q* and its learning power P* = Tr(Q* Sigma).
template <typename Scalar>
struct OptimalSolution {
  MatrixX<Scalar> q;
  Scalar power;
};

/// P(Q) = Tr(Q Sigma).
template <typename DerivedQ, typename Scalar>
Scalar learning_power(const Eigen::MatrixBase<DerivedQ>& q, const MomentMatrix<Scalar>& sigma) {
  require(q.rows() == sigma.dim() && q.cols() == sigma.dim(), ErrorKind::DimensionMismatch,
          "optimizer and moment shapes differ");
  return (q.transpose().array() * sigma.matrix().array()).sum();
}

/// Greedy allocation of lambda per eigendirection until tau is spent.
///
/// `sigma_sorted` only fixes the order; the allocation itself depends on
/// tau and lambda alone. When tau >= d * lambda every slot is capped.
template <typename Scalar>
VectorX<Scalar> water_fill(const VectorX<Scalar>& sigma_sorted, Scalar tau, Scalar lambda) {
  require(tau > 0 && lambda > 0, ErrorKind::InvalidBudget, "water_fill needs tau > 0 and lambda > 0");
  const Index d = sigma_sorted.size();
  for (Index i = 0; i < d; ++i) {
    require(sigma_sorted(i) >= 0, ErrorKind::NonPSDInput, "water_fill needs nonnegative eigenvalues");
    if (i > 0)
      require(sigma_sorted(i) <= sigma_sorted(i - 1), ErrorKind::NonPSDInput,
              "water_fill needs eigenvalues sorted nonincreasing");
  }
  VectorX<Scalar> q = VectorX<Scalar>::Zero(d);
  const Scalar ratio = std::floor(tau / lambda);
  if (ratio >= static_cast<Scalar>(d)) {
    q.setConstant(lambda);
    return q;
  }
  const Index k = static_cast<Index>(ratio);
  q.head(k).setConstant(lambda);
  q(k) = std::min(lambda, std::max(Scalar(0), tau - static_cast<Scalar>(k) * lambda));
  return q;
}

namespace detail {

template <typename Scalar>
void require_psd(const MomentMatrix<Scalar>& sigma) {
  require(is_psd(sigma.matrix(), Scalar(1e-10)), ErrorKind::NonPSDInput,
          "moment has a negative eigenvalue beyond tolerance; run psd_project first");
}

template <typename Scalar>
Scalar support_threshold(const VectorX<Scalar>& eigenvalues) {
  return eigenvalues.size() == 0 ? Scalar(0) : Scalar(1e-10) * eigenvalues.maxCoeff();
}

template <typename Scalar>
Scalar spectral_power(const VectorX<Scalar>& sigma_sorted, Scalar tau, Scalar lambda) {
  return water_fill(sigma_sorted, tau, lambda).dot(sigma_sorted);
}

}  // namespace detail

/// Closed-form maximizer of Tr(Q Sigma) over one of the four trust regions.
///
/// Sigma = 0 returns Q = 0, P = 0 for every family. The Lyapunov support
/// keeps eigenvalues above 1e-10 * sigma_max. The diagonal family only reads
/// diag(Sigma).
template <typename Scalar>
OptimalSolution<Scalar> solve(const TrustRegion<Scalar>& region, const MomentMatrix<Scalar>& sigma) {
  const Index d = sigma.dim();
  validate(region, d);
  detail::require_psd(sigma);
  const MatrixX<Scalar>& s = sigma.matrix();
  OptimalSolution<Scalar> zero{MatrixX<Scalar>::Zero(d, d), Scalar(0)};
  if (s.isZero(0)) return zero;

  return std::visit(
      overloaded{
          [&](const Frobenius<Scalar>& r) -> OptimalSolution<Scalar> {
            const Scalar norm = s.norm();
            const Scalar root_b = std::sqrt(r.budget);
            return {MatrixX<Scalar>(root_b * s / norm), root_b * norm};
          },
          [&](const Spectral<Scalar>& r) -> OptimalSolution<Scalar> {
            auto eig = symmetric_eigen(s);
            VectorX<Scalar> sig = eig.values.cwiseMax(Scalar(0));
            VectorX<Scalar> alloc = water_fill(sig, r.tau, r.lambda);
            return {reassemble(eig.vectors, alloc), alloc.dot(sig)};
          },
          [&](const Lyapunov<Scalar>& r) -> OptimalSolution<Scalar> {
            auto eig = symmetric_eigen(s);
            const Scalar cut = detail::support_threshold(eig.values);
            VectorX<Scalar> mask = (eig.values.array() > cut).template cast<Scalar>();
            const Scalar mass = mask.dot(eig.values);
            if (mass <= 0) return zero;
            const Scalar alpha = std::sqrt(r.budget / mass);
            return {reassemble(eig.vectors, VectorX<Scalar>(alpha * mask)), std::sqrt(r.budget * mass)};
          },
          [&](const Diagonal<Scalar>& r) -> OptimalSolution<Scalar> {
            VectorX<Scalar> diag = s.diagonal().cwiseMax(Scalar(0));
            const Scalar weight = (diag.array().square() / r.costs.array()).sum();
            if (weight <= 0) return zero;
            const Scalar scale = std::sqrt(r.budget / weight);
            VectorX<Scalar> q = scale * (diag.array() / r.costs.array()).matrix();
            return {MatrixX<Scalar>(q.asDiagonal()), std::sqrt(r.budget * weight)};
          }},
      region);
}

/// sup_{Q in region} Tr(Q m) for an arbitrary symmetric m.
///
/// Because Q is PSD only the PSD part of m can contribute, so each family's
/// closed form is evaluated on the clamped spectrum (or clamped diagonal).
/// The Lyapunov region takes m_+ as its own metric, which makes its gauge
/// homogeneous of degree 1/2 rather than 1.
template <typename Derived>
typename Derived::Scalar polar_gauge(const TrustRegion<typename Derived::Scalar>& region,
                                     const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "polar_gauge needs a square matrix");
  validate(region, m.rows());
  auto eig = symmetric_eigen(m);
  VectorX<Scalar> positive = eig.values.cwiseMax(Scalar(0));

  return std::visit(
      overloaded{[&](const Frobenius<Scalar>& r) { return std::sqrt(r.budget) * positive.norm(); },
                 [&](const Spectral<Scalar>& r) { return detail::spectral_power(positive, r.tau, r.lambda); },
                 [&](const Lyapunov<Scalar>& r) {
                   const Scalar cut = detail::support_threshold(positive);
                   const Scalar mass = (positive.array() > cut).select(positive.array(), Scalar(0)).sum();
                   return std::sqrt(r.budget * mass);
                 },
                 [&](const Diagonal<Scalar>& r) {
                   VectorX<Scalar> diag = m.diagonal().cwiseMax(Scalar(0));
                   return std::sqrt(r.budget * (diag.array().square() / r.costs.array()).sum());
                 }},
      region);
}

/// Largest constraint excess of q for the region (<= 0 means feasible).
///
/// Includes PSD-ness (as -lambda_min) and, for the diagonal family, the
/// off-diagonal mass. Lyapunov needs the metric `sigma`.
template <typename Scalar>
Scalar constraint_violation(const TrustRegion<Scalar>& region, const MatrixX<Scalar>& q,
                            const MomentMatrix<Scalar>& sigma) {
  auto eig = symmetric_eigen(q);
  const Scalar psd_excess = -eig.values.minCoeff();
  const Scalar asym = (q - q.transpose()).cwiseAbs().maxCoeff();
  const Scalar region_excess = std::visit(
      overloaded{[&](const Frobenius<Scalar>& r) { return q.norm() - std::sqrt(r.budget); },
                 [&](const Spectral<Scalar>& r) {
                   return std::max(q.trace() - r.tau, eig.values.maxCoeff() - r.lambda);
                 },
                 [&](const Lyapunov<Scalar>& r) {
                   return (q * q * sigma.matrix()).trace() - r.budget;
                 },
                 [&](const Diagonal<Scalar>& r) {
                   MatrixX<Scalar> off = q;
                   off.diagonal().setZero();
                   const Scalar cost = (r.costs.array() * q.diagonal().array().square()).sum();
                   return std::max(cost - r.budget, off.cwiseAbs().maxCoeff());
                 }},
      region);
  return std::max({psd_excess, asym, region_excess});
}

}  // namespace greedyopt
