#pragma once

// Brute-force verifiers for the closed forms.
//
// Nothing here calls into the closed-form solvers or the Jacobi eigensolver:
// spectra come from Eigen's SelfAdjointEigenSolver so that an error in one
// route cannot hide in the other.

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <functional>
#include <limits>
#include <random>

#include "greedyopt/stateless.hpp"

namespace greedyopt {

template <typename Scalar>
struct OracleReport {
  Scalar best_value = -std::numeric_limits<Scalar>::infinity();
  MatrixX<Scalar> best_point;
  long iterations = 0;
  bool converged = false;
};

namespace oracle_detail {

template <typename Scalar>
Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eigh(const MatrixX<Scalar>& m) {
  return Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>>(Scalar(0.5) * (m + m.transpose()));
}

template <typename Scalar>
MatrixX<Scalar> clamp_psd(const MatrixX<Scalar>& m) {
  auto es = eigh(m);
  VectorX<Scalar> w = es.eigenvalues().cwiseMax(Scalar(0));
  MatrixX<Scalar> out = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  return Scalar(0.5) * (out + out.transpose());
}

// Euclidean projection of x onto {0 <= x_i <= cap, sum x <= budget}.
template <typename Scalar>
VectorX<Scalar> project_capped_simplex(const VectorX<Scalar>& x, Scalar cap, Scalar budget) {
  auto clip = [&](Scalar shift) {
    return VectorX<Scalar>((x.array() - shift).max(Scalar(0)).min(cap));
  };
  VectorX<Scalar> y = clip(0);
  if (y.sum() <= budget) return y;
  Scalar lo = 0;
  Scalar hi = x.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (clip(mid).sum() > budget) lo = mid; else hi = mid;
  }
  return clip(hi);
}

template <typename Scalar>
MatrixX<Scalar> random_psd(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixX<Scalar> x(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) x(i, j) = static_cast<Scalar>(normal(rng));
  return x * x.transpose() / static_cast<Scalar>(d);
}

}  // namespace oracle_detail

/// Projected gradient ascent on Tr(Q Sigma) over `region`, best of `restarts`
/// random PSD starts.
///
/// Frobenius and spectral regions use their exact Euclidean projections.
/// Diagonal ascent runs in p_j = sqrt(c_j) q_j where the region is a ball
/// intersected with the orthant. The Lyapunov region is handled through its
/// homogeneous penalty form max Tr(Q S) - Tr(Q^2 S) over the PSD cone, whose
/// maximizer lies on the ray of the constrained one; the iterate is then
/// rescaled onto the boundary Tr(Q^2 S) = B.
template <typename Scalar>
OracleReport<Scalar> oracle_maximize(const TrustRegion<Scalar>& region, const MomentMatrix<Scalar>& sigma,
                                     long iters, int restarts, std::uint64_t seed) {
  using namespace oracle_detail;
  const Index d = sigma.dim();
  validate(region, d);
  const MatrixX<Scalar>& s = sigma.matrix();
  std::mt19937_64 rng(seed);

  OracleReport<Scalar> report;
  report.best_point = MatrixX<Scalar>::Zero(d, d);
  const Scalar snorm = s.norm();
  if (snorm == Scalar(0)) {
    report.best_value = 0;
    report.converged = true;
    return report;
  }

  auto value = [&](const MatrixX<Scalar>& q) { return (q.array() * s.array()).sum(); };

  for (int restart = 0; restart < std::max(1, restarts); ++restart) {
    MatrixX<Scalar> start = random_psd<Scalar>(d, rng);
    MatrixX<Scalar> q;
    bool converged = false;
    long used = 0;

    std::visit(
        overloaded{
            [&](const Frobenius<Scalar>& r) {
              const Scalar radius = std::sqrt(r.budget);
              auto project = [&](const MatrixX<Scalar>& m) {
                MatrixX<Scalar> p = clamp_psd(m);
                const Scalar n = p.norm();
                return n > radius ? MatrixX<Scalar>(p * (radius / n)) : p;
              };
              const Scalar step = radius / snorm;
              q = project(start);
              for (used = 0; used < iters; ++used) {
                MatrixX<Scalar> next = project(q + step * s);
                const Scalar change = (next - q).norm();
                q = std::move(next);
                if (change <= Scalar(1e-15) * radius) { converged = true; break; }
              }
            },
            [&](const Spectral<Scalar>& r) {
              auto project = [&](const MatrixX<Scalar>& m) {
                auto es = eigh(m);
                VectorX<Scalar> w = project_capped_simplex<Scalar>(es.eigenvalues(), r.lambda, r.tau);
                MatrixX<Scalar> p = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
                return MatrixX<Scalar>(Scalar(0.5) * (p + p.transpose()));
              };
              const Scalar step = std::max(r.tau, r.lambda) / snorm;
              q = project(start);
              for (used = 0; used < iters; ++used) {
                MatrixX<Scalar> next = project(q + step * s);
                const Scalar change = (next - q).norm();
                q = std::move(next);
                if (change <= Scalar(1e-15) * std::max(r.tau, r.lambda)) { converged = true; break; }
              }
            },
            [&](const Lyapunov<Scalar>& r) {
              const Scalar top = eigh(s).eigenvalues().cwiseAbs().maxCoeff();
              // Penalized gradient Sigma - (Q Sigma + Sigma Q) is 2*top Lipschitz.
              const Scalar step = Scalar(1) / (Scalar(2) * top);
              q = clamp_psd<Scalar>(start / top);
              MatrixX<Scalar> prev = q;
              Scalar t = 1;
              for (used = 0; used < iters; ++used) {
                // FISTA keeps ill-conditioned moments tractable.
                const Scalar t_next = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
                MatrixX<Scalar> y = q + ((t - Scalar(1)) / t_next) * (q - prev);
                MatrixX<Scalar> grad = s - (y * s + s * y);
                MatrixX<Scalar> next = clamp_psd<Scalar>(y + step * grad);
                const Scalar change = (next - q).norm();
                prev = std::move(q);
                q = std::move(next);
                t = t_next;
                if (change <= Scalar(1e-15) * (Scalar(1) + q.norm())) { converged = true; break; }
              }
              const Scalar energy = (q * q * s).trace();
              if (energy > 0) q *= std::sqrt(r.budget / energy);
            },
            [&](const Diagonal<Scalar>& r) {
              const VectorX<Scalar> root_c = r.costs.array().sqrt();
              const VectorX<Scalar> weight = s.diagonal().array() / root_c.array();
              const Scalar radius = std::sqrt(r.budget);
              auto project = [&](const VectorX<Scalar>& p) {
                VectorX<Scalar> c = p.cwiseMax(Scalar(0));
                const Scalar n = c.norm();
                return n > radius ? VectorX<Scalar>(c * (radius / n)) : c;
              };
              const Scalar wnorm = weight.cwiseMax(Scalar(0)).norm();
              const Scalar step = wnorm > 0 ? radius / wnorm : Scalar(1);
              VectorX<Scalar> p = project(start.diagonal().cwiseProduct(root_c));
              for (used = 0; used < iters; ++used) {
                VectorX<Scalar> next = project(p + step * weight);
                const Scalar change = (next - p).norm();
                p = std::move(next);
                if (change <= Scalar(1e-15) * radius) { converged = true; break; }
              }
              q = MatrixX<Scalar>((p.array() / root_c.array()).matrix().asDiagonal());
            }},
        region);

    report.iterations += used;
    const Scalar v = value(q);
    if (v > report.best_value) {
      report.best_value = v;
      report.best_point = q;
      report.converged = converged;
    }
  }
  return report;
}

/// Exhaustive vertex enumeration for max sigma.q s.t. 0 <= q <= lambda,
/// sum q <= tau.
///
/// Every subset F of capped coordinates is tried together with every choice
/// of one partially filled coordinate, whose level is scanned on a `grid`
/// point uniform mesh of [0, remaining budget] (endpoints included, so the LP
/// vertex is always visited). Ties keep the first candidate found. Intended
/// for d <= 12.
template <typename Scalar>
OracleReport<Scalar> oracle_water_fill(const VectorX<Scalar>& sigma, Scalar tau, Scalar lambda, int grid) {
  require(tau > 0 && lambda > 0, ErrorKind::InvalidBudget, "oracle_water_fill needs tau, lambda > 0");
  const Index d = sigma.size();
  require(d <= 20, ErrorKind::DimensionMismatch, "oracle_water_fill enumerates subsets; d too large");
  const int levels = std::max(grid, 2);

  OracleReport<Scalar> report;
  report.best_point = MatrixX<Scalar>::Zero(d, 1);
  const std::uint64_t subsets = std::uint64_t(1) << d;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    VectorX<Scalar> q = VectorX<Scalar>::Zero(d);
    Scalar used = 0;
    for (Index i = 0; i < d; ++i)
      if (mask & (std::uint64_t(1) << i)) { q(i) = lambda; used += lambda; }
    if (used > tau * (Scalar(1) + Scalar(1e-15))) continue;
    const Scalar room = std::min(lambda, std::max(Scalar(0), tau - used));
    for (Index j = -1; j < d; ++j) {
      if (j >= 0 && (mask & (std::uint64_t(1) << j))) continue;
      for (int level = (j < 0 ? levels - 1 : 0); level < levels; ++level) {
        VectorX<Scalar> cand = q;
        if (j >= 0) cand(j) = room * static_cast<Scalar>(level) / static_cast<Scalar>(levels - 1);
        const Scalar v = cand.dot(sigma);
        ++report.iterations;
        if (v > report.best_value) {
          report.best_value = v;
          report.best_point = cand;
        }
      }
    }
  }
  report.converged = true;
  return report;
}

/// Argmax of a scalar objective over the open-interval grid
/// beta_i = (i + 1) / (grid_points + 1); lowest index wins ties.
template <typename Scalar>
OracleReport<Scalar> oracle_beta_grid(const std::function<Scalar(Scalar)>& objective, int grid_points) {
  require(grid_points >= 2, ErrorKind::ConfigError, "oracle_beta_grid needs at least 2 points");
  OracleReport<Scalar> report;
  report.best_point = MatrixX<Scalar>::Zero(1, 1);
  for (int i = 0; i < grid_points; ++i) {
    const Scalar beta = static_cast<Scalar>(i + 1) / static_cast<Scalar>(grid_points + 1);
    const Scalar v = objective(beta);
    ++report.iterations;
    if (v > report.best_value) {
      report.best_value = v;
      report.best_point(0, 0) = beta;
    }
  }
  report.converged = true;
  return report;
}

}  // namespace greedyopt
