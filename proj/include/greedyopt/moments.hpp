#pragma once

#include <utility>
#include <vector>

#include "greedyopt/linalg.hpp"

namespace greedyopt {

/// Symmetric d x d gradient second moment E[g g^T].
///
/// Construction symmetrizes exactly; positive semidefiniteness is only
/// guaranteed for values produced by psd_project or estimate_moment.
template <typename Scalar>
class MomentMatrix {
 public:
  MomentMatrix() = default;

  explicit MomentMatrix(const MatrixX<Scalar>& m) {
    require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "moment must be square");
    require(all_finite(m), ErrorKind::NonFinite, "moment has NaN/Inf");
    entries_ = symmetrize(m);
  }

  Index dim() const { return entries_.rows(); }
  const MatrixX<Scalar>& matrix() const { return entries_; }

 private:
  MatrixX<Scalar> entries_;
};

/// Ordered sequence of d-dimensional gradient samples.
template <typename Scalar>
class GradientStream {
 public:
  explicit GradientStream(Index dim) : dim_(dim) {
    require(dim > 0, ErrorKind::DimensionMismatch, "stream dimension must be positive");
  }

  /// One sample per row.
  static GradientStream from_rows(const MatrixX<Scalar>& rows) {
    GradientStream s(rows.cols());
    for (Index i = 0; i < rows.rows(); ++i) s.push(rows.row(i).transpose());
    return s;
  }

  void push(const VectorX<Scalar>& g) {
    require(g.size() == dim_, ErrorKind::DimensionMismatch, "sample dimension differs from stream");
    require(all_finite(g), ErrorKind::NonFinite, "sample has NaN/Inf");
    samples_.push_back(g);
  }

  Index dim() const { return dim_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const VectorX<Scalar>& operator[](std::size_t n) const { return samples_[n]; }
  const std::vector<VectorX<Scalar>>& samples() const { return samples_; }

 private:
  Index dim_;
  std::vector<VectorX<Scalar>> samples_;
};

/// Lag autocorrelations R[0..K] (or symmetrized validation cross-moments).
template <typename Scalar>
class LagMoments {
 public:
  LagMoments() = default;

  explicit LagMoments(std::vector<MatrixX<Scalar>> lags) {
    require(!lags.empty(), ErrorKind::InsufficientSamples, "lag moments need at least lag 0");
    const Index d = lags.front().rows();
    for (auto& r : lags) {
      require(r.rows() == d && r.cols() == d, ErrorKind::DimensionMismatch, "lag shape mismatch");
      require(all_finite(r), ErrorKind::NonFinite, "lag moment has NaN/Inf");
      r = symmetrize(r);
    }
    lags_ = std::move(lags);
  }

  Index dim() const { return lags_.empty() ? 0 : lags_.front().rows(); }
  Index max_lag() const { return static_cast<Index>(lags_.size()) - 1; }
  const MatrixX<Scalar>& operator[](std::size_t k) const { return lags_[k]; }
  const std::vector<MatrixX<Scalar>>& lags() const { return lags_; }

 private:
  std::vector<MatrixX<Scalar>> lags_;
};

namespace detail {

// (1 / (N - k)) * sum_{n=k}^{N-1} lead[n] lag[n-k]^T over the first `count` samples.
template <typename Scalar>
MatrixX<Scalar> lagged_average(const GradientStream<Scalar>& lead, const GradientStream<Scalar>& lag,
                               std::size_t count, std::size_t k) {
  const Index d = lead.dim();
  MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(d, d);
  for (std::size_t n = k; n < count; ++n) acc.noalias() += lead[n] * lag[n - k].transpose();
  acc /= static_cast<Scalar>(count - k);
  return acc;
}

}  // namespace detail

/// Symmetrizes, clamps negative eigenvalues to zero and reassembles.
template <typename Derived>
MomentMatrix<typename Derived::Scalar> psd_project(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "psd_project needs a square matrix");
  require(all_finite(m), ErrorKind::NonFinite, "psd_project input has NaN/Inf");
  return MomentMatrix<Scalar>(
      spectral_map(m, [](Scalar s) { return s > Scalar(0) ? s : Scalar(0); }));
}

template <typename Scalar>
MomentMatrix<Scalar> estimate_moment(const GradientStream<Scalar>& grads) {
  require(!grads.empty(), ErrorKind::EmptyStream, "cannot estimate a moment from no samples");
  return MomentMatrix<Scalar>(symmetrize(detail::lagged_average(grads, grads, grads.size(), 0)));
}

/// Single-sample estimate g g^T, the "immediate" moment used by on-line solvers.
template <typename Derived>
MomentMatrix<typename Derived::Scalar> instantaneous_moment(const Eigen::MatrixBase<Derived>& g) {
  using Scalar = typename Derived::Scalar;
  return MomentMatrix<Scalar>(MatrixX<Scalar>(g * g.transpose()));
}

/// Lag k averages only over fully overlapping pairs (N - k terms).
template <typename Scalar>
LagMoments<Scalar> estimate_lag_moments(const GradientStream<Scalar>& grads, Index max_lag) {
  require(max_lag >= 0, ErrorKind::InsufficientSamples, "max_lag must be nonnegative");
  require(static_cast<Index>(grads.size()) > max_lag, ErrorKind::InsufficientSamples,
          "need more samples than max_lag");
  std::vector<MatrixX<Scalar>> lags;
  lags.reserve(static_cast<std::size_t>(max_lag) + 1);
  for (Index k = 0; k <= max_lag; ++k)
    lags.push_back(detail::lagged_average(grads, grads, grads.size(), static_cast<std::size_t>(k)));
  return LagMoments<Scalar>(std::move(lags));
}

/// R_val[k] = sym(E[g_val[n] g_tr[n-k]^T]).
///
/// Streams of different length are truncated to their common prefix.
template <typename Scalar>
LagMoments<Scalar> estimate_validation_moments(const GradientStream<Scalar>& train,
                                               const GradientStream<Scalar>& val, Index max_lag) {
  require(train.dim() == val.dim(), ErrorKind::DimensionMismatch,
          "train and validation streams differ in dimension");
  require(max_lag >= 0, ErrorKind::InsufficientSamples, "max_lag must be nonnegative");
  const std::size_t count = std::min(train.size(), val.size());
  require(static_cast<Index>(count) > max_lag, ErrorKind::InsufficientSamples,
          "need more aligned samples than max_lag");
  std::vector<MatrixX<Scalar>> lags;
  for (Index k = 0; k <= max_lag; ++k)
    lags.push_back(detail::lagged_average(val, train, count, static_cast<std::size_t>(k)));
  return LagMoments<Scalar>(std::move(lags));
}

}  // namespace greedyopt
