#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "greedyopt/stateless.hpp"

namespace greedyopt {

/// Truncated causal impulse response q_0..q_K of a dynamic optimizer; the
/// parameter velocity is sum_k q_k g[n-k].
template <typename Scalar>
class MatrixFilter {
 public:
  MatrixFilter() = default;

  explicit MatrixFilter(std::vector<MatrixX<Scalar>> taps) {
    require(!taps.empty(), ErrorKind::DimensionMismatch, "filter needs at least one tap");
    const Index d = taps.front().rows();
    for (auto& t : taps) {
      require(t.rows() == d && t.cols() == d, ErrorKind::DimensionMismatch, "tap shape mismatch");
      require(all_finite(t), ErrorKind::NonFinite, "tap has NaN/Inf");
      t = symmetrize(t);
    }
    taps_ = std::move(taps);
  }

  static MatrixFilter zero(Index dim, std::size_t taps) {
    return MatrixFilter(std::vector<MatrixX<Scalar>>(taps, MatrixX<Scalar>::Zero(dim, dim)));
  }

  Index dim() const { return taps_.empty() ? 0 : taps_.front().rows(); }
  std::size_t size() const { return taps_.size(); }
  const MatrixX<Scalar>& operator[](std::size_t k) const { return taps_[k]; }
  const std::vector<MatrixX<Scalar>>& taps() const { return taps_; }

 private:
  std::vector<MatrixX<Scalar>> taps_;
};

/// Default truncation. A 1-pole filter loses beta^(2(K+1)) of its squared
/// norm beyond K taps, so K = 64 is adequate for beta up to about 0.9.
inline constexpr Index kDefaultFilterTaps = 64;

namespace detail {

template <typename Scalar>
Scalar lagwise_inner(const std::vector<MatrixX<Scalar>>& a, const std::vector<MatrixX<Scalar>>& b) {
  require(a.empty() || b.empty() || a.front().rows() == b.front().rows(), ErrorKind::DimensionMismatch,
          "filters differ in dimension");
  Scalar acc = 0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) acc += (a[k].array() * b[k].array()).sum();
  return acc;
}

}  // namespace detail

/// <a, b>_H = sum_k Tr(a_k^T b_k) over the common lag range.
template <typename Scalar>
Scalar hilbert_inner(const MatrixFilter<Scalar>& a, const MatrixFilter<Scalar>& b) {
  return detail::lagwise_inner<Scalar>(a.taps(), b.taps());
}

/// Instantaneous learning power of a filter under lag moments r.
template <typename Scalar>
Scalar hilbert_inner(const MatrixFilter<Scalar>& a, const LagMoments<Scalar>& r) {
  return detail::lagwise_inner<Scalar>(a.taps(), r.lags());
}

template <typename Scalar>
Scalar hilbert_norm(const MatrixFilter<Scalar>& a) {
  return std::sqrt(hilbert_inner(a, a));
}

template <typename Scalar>
Scalar hilbert_norm(const LagMoments<Scalar>& r) {
  Scalar acc = 0;
  for (const auto& m : r.lags()) acc += m.squaredNorm();
  return std::sqrt(acc);
}

/// Parameter velocity (Q * g)[n] = sum_{k <= min(K, n)} q_k g[n-k].
template <typename Scalar>
VectorX<Scalar> filter_output(const MatrixFilter<Scalar>& q, const GradientStream<Scalar>& grads, std::size_t n) {
  require(q.dim() == grads.dim(), ErrorKind::DimensionMismatch, "filter and stream dimensions differ");
  VectorX<Scalar> out = VectorX<Scalar>::Zero(q.dim());
  const std::size_t last = std::min(q.size() - 1, n);
  for (std::size_t k = 0; k <= last; ++k) out.noalias() += q[k] * grads[n - k];
  return out;
}

/// Q[n] = eta (1 - beta) beta^n P. beta = 0 degenerates to the impulse eta P.
template <typename Scalar>
struct OnePoleSpec {
  Scalar eta;
  Scalar beta;
  MatrixX<Scalar> base;
};

template <typename Scalar>
void validate(const OnePoleSpec<Scalar>& spec) {
  require(spec.eta >= 0, ErrorKind::InvalidBudget, "one-pole eta must be >= 0");
  require(spec.beta >= 0 && spec.beta < 1, ErrorKind::InvalidBudget, "one-pole beta must lie in [0, 1)");
  require(spec.base.rows() == spec.base.cols(), ErrorKind::DimensionMismatch, "one-pole base must be square");
}

template <typename Scalar>
MatrixFilter<Scalar> one_pole_response(const OnePoleSpec<Scalar>& spec, Index max_lag) {
  validate(spec);
  require(max_lag >= 0, ErrorKind::DimensionMismatch, "max_lag must be nonnegative");
  std::vector<MatrixX<Scalar>> taps;
  taps.reserve(static_cast<std::size_t>(max_lag) + 1);
  Scalar gain = spec.eta * (Scalar(1) - spec.beta);
  for (Index k = 0; k <= max_lag; ++k) {
    taps.push_back(gain * spec.base);
    gain *= spec.beta;
  }
  return MatrixFilter<Scalar>(std::move(taps));
}

/// Untruncated ||Q||_H^2 = eta^2 (1-beta)^2 / (1-beta^2) Tr(P^T P).
template <typename Scalar>
Scalar one_pole_norm_sq(const OnePoleSpec<Scalar>& spec) {
  validate(spec);
  const Scalar b = spec.beta;
  return spec.eta * spec.eta * (Scalar(1) - b) * (Scalar(1) - b) / (Scalar(1) - b * b) *
         spec.base.squaredNorm();
}

/// A single Frobenius budget on the whole filter, ||Q||_H <= sqrt(B).
template <typename Scalar>
struct GlobalFrobenius {
  Scalar budget;
};

template <typename Scalar>
struct DynamicSolution {
  MatrixFilter<Scalar> filter;
  Scalar power;
};

/// Per-lag regions: the problem decouples over delays, so each PSD-projected
/// R[k] is solved independently. A single region is broadcast to all lags.
template <typename Scalar>
DynamicSolution<Scalar> solve_dynamic(const std::vector<TrustRegion<Scalar>>& regions, const LagMoments<Scalar>& r) {
  const std::size_t lags = r.lags().size();
  require(regions.size() == 1 || regions.size() == lags, ErrorKind::DimensionMismatch,
          "need one trust region per lag (or one shared)");
  std::vector<MatrixX<Scalar>> taps;
  taps.reserve(lags);
  Scalar power = 0;
  for (std::size_t k = 0; k < lags; ++k) {
    const auto& region = regions.size() == 1 ? regions.front() : regions[k];
    auto sol = solve(region, psd_project(r[k]));
    power += sol.power;
    taps.push_back(std::move(sol.q));
  }
  return {MatrixFilter<Scalar>(std::move(taps)), power};
}

/// Global Frobenius budget: Q* = sqrt(B) R / ||R||_H, P* = sqrt(B) ||R||_H.
/// The Hilbert ball carries no PSD constraint, so lags are used as given.
template <typename Scalar>
DynamicSolution<Scalar> solve_dynamic(const GlobalFrobenius<Scalar>& region, const LagMoments<Scalar>& r) {
  require(region.budget > 0, ErrorKind::InvalidBudget, "Frobenius budget must be > 0");
  const Scalar norm = hilbert_norm(r);
  if (norm == Scalar(0)) return {MatrixFilter<Scalar>::zero(r.dim(), r.lags().size()), Scalar(0)};
  const Scalar root_b = std::sqrt(region.budget);
  std::vector<MatrixX<Scalar>> taps;
  for (const auto& m : r.lags()) taps.push_back(root_b * m / norm);
  return {MatrixFilter<Scalar>(std::move(taps)), root_b * norm};
}

/// Unnormalized momentum recursion m <- g + beta m, starting from m = 0.
template <typename Scalar>
VectorX<Scalar> momentum_update(const VectorX<Scalar>& m, const VectorX<Scalar>& g, Scalar beta) {
  require(m.size() == g.size(), ErrorKind::DimensionMismatch, "momentum and gradient dimensions differ");
  return g + beta * m;
}

/// Single-sample SGD+Momentum objective sqrt(1 - beta^2) g^T m_beta.
template <typename Scalar>
Scalar sgdm_objective(Scalar beta, const VectorX<Scalar>& g_now, const VectorX<Scalar>& m_unnorm) {
  require(g_now.size() == m_unnorm.size(), ErrorKind::DimensionMismatch, "gradient and momentum dimensions differ");
  return std::sqrt(Scalar(1) - beta * beta) * g_now.dot(m_unnorm);
}

/// eta* = sqrt(B (1 + beta*) / (d (1 - beta*))).
template <typename Scalar>
Scalar sgdm_optimal_lr(Scalar beta_star, Scalar budget, Index dim) {
  require(budget > 0, ErrorKind::InvalidBudget, "budget must be > 0");
  require(beta_star >= 0 && beta_star < 1, ErrorKind::InvalidBudget, "beta must lie in [0, 1)");
  require(dim >= 1, ErrorKind::InvalidBudget, "dimension must be >= 1");
  return std::sqrt(budget * (Scalar(1) + beta_star) / (static_cast<Scalar>(dim) * (Scalar(1) - beta_star)));
}

/// Adam normalization a = sqrt((1 + beta1) / ((1 - beta1) sum_j 1/c_j)).
template <typename Scalar>
Scalar adam_normalization(Scalar beta1, const VectorX<Scalar>& costs) {
  return std::sqrt((Scalar(1) + beta1) / ((Scalar(1) - beta1) * costs.cwiseInverse().sum()));
}

/// Adam objective a(beta1) g^T u with costs c = sqrt(v) + eps and u = m / c.
///
/// m is the (1 - beta1)-normalized EMA, unlike the unnormalized SGD+Momentum
/// buffer; each objective follows its own recursion convention.
template <typename Scalar>
Scalar adam_objective(Scalar beta1, const VectorX<Scalar>& g_now, const VectorX<Scalar>& m,
                      const VectorX<Scalar>& v, Scalar eps) {
  require(g_now.size() == m.size() && m.size() == v.size(), ErrorKind::DimensionMismatch,
          "adam vectors differ in dimension");
  require(all_finite(v) && (v.size() == 0 || v.minCoeff() >= 0), ErrorKind::NonFinite,
          "second moments must be finite and nonnegative");
  const VectorX<Scalar> c = v.cwiseSqrt().array() + eps;
  const VectorX<Scalar> u = m.cwiseQuotient(c);
  const Scalar j = adam_normalization(beta1, c) * g_now.dot(u);
  require(std::isfinite(j), ErrorKind::NonFinite, "adam objective is not finite (zero cost with eps = 0?)");
  return j;
}

/// eta* = sqrt(B) a(beta1*).
template <typename Scalar>
Scalar adam_optimal_lr(Scalar beta1_star, Scalar budget, const VectorX<Scalar>& costs) {
  require(budget > 0, ErrorKind::InvalidBudget, "budget must be > 0");
  require(costs.size() > 0 && costs.minCoeff() > 0, ErrorKind::NonPositiveCost, "costs must be > 0");
  return std::sqrt(budget) * adam_normalization(beta1_star, costs);
}

}  // namespace greedyopt
