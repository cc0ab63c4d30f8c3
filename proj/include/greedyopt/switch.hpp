#pragma once

// K-choice switch optimizers.
//
// Every candidate keeps its own state and is advanced on every step; the
// candidate with the largest instantaneous objective J_k supplies the update.
// States are plain values: each step takes the state and returns the next one.

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "greedyopt/dynamic.hpp"
#include "greedyopt/orthogonalize.hpp"

namespace greedyopt {

/// Hyperparameters of one candidate: beta for SGD+M, (beta1, beta2) for Adam,
/// mu (stored in beta1) for Muon.
template <typename Scalar>
struct Candidate {
  Scalar beta1;
  Scalar beta2 = 0;
};

struct SwitchConfig {
  /// 0 disables the reset.
  int hysteresis_window = 5;
  double decay = 0.5;
  /// EMA factor for J_k before selection; 0 selects on the raw sample.
  double objective_ema = 0.0;
};

template <typename Scalar>
struct SwitchState {
  std::vector<Candidate<Scalar>> candidates;
  std::vector<VectorX<Scalar>> momenta;
  std::vector<VectorX<Scalar>> second_moments;  // Adam only
  std::vector<Scalar> smoothed_objectives;     // only with objective_ema > 0
  int hysteresis_count = 0;
  std::size_t last_selected = 0;
  long step = 0;
  Index rows = 0;  // matrix shape of the parameter block (Muon)
  Index cols = 0;
  SwitchConfig config;
};

template <typename Scalar>
struct StepRecord {
  long step = 0;
  std::size_t selected = 0;
  std::vector<Scalar> objectives;
  VectorX<Scalar> update;
};

template <typename Scalar>
struct StepResult {
  VectorX<Scalar> delta_theta;
  StepRecord<Scalar> record;
  SwitchState<Scalar> state;
};

namespace detail {

template <typename Scalar>
SwitchState<Scalar> make_state(std::vector<Candidate<Scalar>> candidates, Index dim, bool with_second,
                               SwitchConfig config) {
  require(!candidates.empty(), ErrorKind::ConfigError, "switch needs at least one candidate");
  require(dim > 0, ErrorKind::DimensionMismatch, "parameter dimension must be positive");
  require(config.hysteresis_window >= 0, ErrorKind::ConfigError, "hysteresis window must be >= 0");
  require(config.objective_ema >= 0 && config.objective_ema < 1, ErrorKind::ConfigError,
          "objective EMA factor must lie in [0, 1)");
  for (const auto& c : candidates) {
    require(c.beta1 >= 0 && c.beta1 < 1, ErrorKind::ConfigError, "beta1 must lie in [0, 1)");
    if (with_second) require(c.beta2 >= 0 && c.beta2 < 1, ErrorKind::ConfigError, "beta2 must lie in [0, 1)");
  }
  SwitchState<Scalar> s;
  s.momenta.assign(candidates.size(), VectorX<Scalar>::Zero(dim));
  if (with_second) s.second_moments.assign(candidates.size(), VectorX<Scalar>::Zero(dim));
  s.candidates = std::move(candidates);
  s.config = config;
  s.rows = dim;
  s.cols = 1;
  return s;
}

// Lowest index wins ties. Values within tol * max|J| of the leader count as tied.
template <typename Scalar>
std::size_t argmax(const std::vector<Scalar>& values, Scalar tol = Scalar(0)) {
  Scalar scale = 0;
  for (Scalar v : values) scale = std::max(scale, Scalar(std::abs(v)));
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best] + tol * scale) best = k;
  return best;
}

template <typename Scalar>
void check_dim(const SwitchState<Scalar>& s, Index n) {
  require(!s.momenta.empty() && s.momenta.front().size() == n, ErrorKind::DimensionMismatch,
          "gradient dimension differs from switch state");
}

}  // namespace detail

template <typename Scalar>
SwitchState<Scalar> make_sgdm_state(const std::vector<Scalar>& betas, Index dim, SwitchConfig config = {}) {
  std::vector<Candidate<Scalar>> c;
  for (Scalar b : betas) c.push_back({b, 0});
  return detail::make_state(std::move(c), dim, false, config);
}

template <typename Scalar>
SwitchState<Scalar> make_adam_state(const std::vector<Candidate<Scalar>>& betas, Index dim,
                                    SwitchConfig config = {}) {
  return detail::make_state(betas, dim, true, config);
}

template <typename Scalar>
SwitchState<Scalar> make_muon_state(const std::vector<Scalar>& mus, Index rows, Index cols,
                                    SwitchConfig config = {}) {
  auto s = make_sgdm_state(mus, rows * cols, config);
  s.rows = rows;
  s.cols = cols;
  return s;
}

/// Counts consecutive strictly negative selected objectives; at the window
/// length every first-moment buffer is scaled by the decay factor and the
/// counter restarts. Second moments are left alone.
template <typename Scalar>
SwitchState<Scalar> hysteresis_update(SwitchState<Scalar> state, Scalar j_selected) {
  if (state.config.hysteresis_window == 0) return state;
  state.hysteresis_count = j_selected < Scalar(0) ? state.hysteresis_count + 1 : 0;
  if (state.hysteresis_count >= state.config.hysteresis_window) {
    const Scalar decay = static_cast<Scalar>(state.config.decay);
    for (auto& m : state.momenta) m *= decay;
    state.hysteresis_count = 0;
  }
  return state;
}

namespace detail {

// Shared tail of every switch step: optional smoothing, selection, hysteresis.
template <typename Scalar, typename UpdateFn>
StepResult<Scalar> finish_step(SwitchState<Scalar> state, std::vector<Scalar> raw, UpdateFn&& update_of,
                               Scalar tie_tol = Scalar(0)) {
  std::vector<Scalar> scores = raw;
  if (state.config.objective_ema > 0) {
    const Scalar rho = static_cast<Scalar>(state.config.objective_ema);
    if (state.smoothed_objectives.size() != raw.size()) state.smoothed_objectives = raw;
    else
      for (std::size_t k = 0; k < raw.size(); ++k)
        state.smoothed_objectives[k] = rho * state.smoothed_objectives[k] + (Scalar(1) - rho) * raw[k];
    scores = state.smoothed_objectives;
  }
  const std::size_t best = argmax(scores, tie_tol);
  VectorX<Scalar> delta = update_of(state, best);

  StepRecord<Scalar> record{state.step, best, scores, delta};
  state.last_selected = best;
  ++state.step;
  state = hysteresis_update(std::move(state), raw[best]);
  return {std::move(delta), std::move(record), std::move(state)};
}

template <typename Scalar>
StepResult<Scalar> sgdm_step(SwitchState<Scalar> state, const VectorX<Scalar>& g, const VectorX<Scalar>& probe,
                             Scalar eta) {
  check_dim(state, g.size());
  require(probe.size() == g.size(), ErrorKind::DimensionMismatch, "probe gradient dimension differs");
  std::vector<Scalar> j(state.candidates.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    const Scalar beta = state.candidates[k].beta1;
    state.momenta[k] = momentum_update(state.momenta[k], g, beta);
    j[k] = sgdm_objective(beta, probe, state.momenta[k]);
  }
  return finish_step(std::move(state), std::move(j),
                     [eta](const SwitchState<Scalar>& s, std::size_t k) { return VectorX<Scalar>(-eta * s.momenta[k]); });
}

template <typename Scalar>
StepResult<Scalar> adam_step(SwitchState<Scalar> state, const VectorX<Scalar>& g, const VectorX<Scalar>& probe,
                             Scalar eta, Scalar eps) {
  check_dim(state, g.size());
  require(probe.size() == g.size(), ErrorKind::DimensionMismatch, "probe gradient dimension differs");
  require(state.second_moments.size() == state.candidates.size(), ErrorKind::ConfigError,
          "state was not created for Adam");
  require(all_finite(g), ErrorKind::NonFinite, "gradient has NaN/Inf");
  std::vector<Scalar> j(state.candidates.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto [b1, b2] = state.candidates[k];
    state.second_moments[k] = b2 * state.second_moments[k] + (Scalar(1) - b2) * g.cwiseAbs2();
    state.momenta[k] = b1 * state.momenta[k] + (Scalar(1) - b1) * g;
    j[k] = adam_objective(b1, probe, state.momenta[k], state.second_moments[k], eps);
  }
  return finish_step(std::move(state), std::move(j), [eta, eps](const SwitchState<Scalar>& s, std::size_t k) {
    const VectorX<Scalar> c = s.second_moments[k].cwiseSqrt().array() + eps;
    return VectorX<Scalar>(-eta * s.momenta[k].cwiseQuotient(c));
  });
}

}  // namespace detail

/// One step of the SGD+Momentum switch: m_k <- beta_k m_k + g,
/// J_k = sqrt(1 - beta_k^2) g^T m_k, delta = -eta m_{k*}.
template <typename Scalar>
StepResult<Scalar> sgdm_switch_step(SwitchState<Scalar> state, const VectorX<Scalar>& g, Scalar eta) {
  return detail::sgdm_step(std::move(state), g, g, eta);
}

/// Validation-aware variant: momenta follow the training gradient, the
/// objective probes with the validation gradient.
template <typename Scalar>
StepResult<Scalar> sgdm_switch_step(SwitchState<Scalar> state, const VectorX<Scalar>& g_train,
                                    const VectorX<Scalar>& g_val, Scalar eta) {
  return detail::sgdm_step(std::move(state), g_train, g_val, eta);
}

/// One step of the Adam switch (no bias correction; per-candidate v_k).
template <typename Scalar>
StepResult<Scalar> adam_switch_step(SwitchState<Scalar> state, const VectorX<Scalar>& g, Scalar eta,
                                    Scalar eps = Scalar(1e-8)) {
  return detail::adam_step(std::move(state), g, g, eta, eps);
}

template <typename Scalar>
StepResult<Scalar> adam_switch_step(SwitchState<Scalar> state, const VectorX<Scalar>& g_train,
                                    const VectorX<Scalar>& g_val, Scalar eta, Scalar eps) {
  return detail::adam_step(std::move(state), g_train, g_val, eta, eps);
}

// ---------------------------------------------------------------------------
// Preconditioned families

namespace precond {

template <typename Scalar>
struct Identity {
  Index dim;
};
template <typename Scalar>
struct Dense {
  MatrixX<Scalar> p;
};
template <typename Scalar>
struct BlockDiag {
  std::vector<MatrixX<Scalar>> blocks;
};
/// P = F_1 (x) F_2 (x) ...; factors are the already-inverted roots G_i^{-1/2}.
template <typename Scalar>
struct Kronecker {
  std::vector<MatrixX<Scalar>> factors;
};
/// P = diag(1 / c_j).
template <typename Scalar>
struct DiagonalCost {
  VectorX<Scalar> costs;
};

}  // namespace precond

template <typename Scalar>
using Preconditioner = std::variant<precond::Identity<Scalar>, precond::Dense<Scalar>, precond::BlockDiag<Scalar>,
                                    precond::Kronecker<Scalar>, precond::DiagonalCost<Scalar>>;

template <typename Scalar>
MatrixX<Scalar> kronecker(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  MatrixX<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Scalar>
Index precond_dim(const Preconditioner<Scalar>& p) {
  return std::visit(overloaded{[](const precond::Identity<Scalar>& x) { return x.dim; },
                               [](const precond::Dense<Scalar>& x) { return x.p.rows(); },
                               [](const precond::BlockDiag<Scalar>& x) {
                                 Index n = 0;
                                 for (const auto& b : x.blocks) n += b.rows();
                                 return n;
                               },
                               [](const precond::Kronecker<Scalar>& x) {
                                 Index n = x.factors.empty() ? 0 : 1;
                                 for (const auto& f : x.factors) n *= f.rows();
                                 return n;
                               },
                               [](const precond::DiagonalCost<Scalar>& x) { return x.costs.size(); }},
                    p);
}

/// Throws unless every block/factor is square and PSD and costs are positive.
template <typename Scalar>
void validate(const Preconditioner<Scalar>& p) {
  auto check = [](const MatrixX<Scalar>& m) {
    require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "preconditioner blocks must be square");
    require(is_psd(m, Scalar(1e-10)), ErrorKind::NonPSDInput, "preconditioner blocks must be PSD");
  };
  std::visit(overloaded{[](const precond::Identity<Scalar>& x) {
                          require(x.dim > 0, ErrorKind::DimensionMismatch, "identity dimension must be > 0");
                        },
                        [&](const precond::Dense<Scalar>& x) { check(x.p); },
                        [&](const precond::BlockDiag<Scalar>& x) {
                          require(!x.blocks.empty(), ErrorKind::DimensionMismatch, "no blocks");
                          for (const auto& b : x.blocks) check(b);
                        },
                        [&](const precond::Kronecker<Scalar>& x) {
                          require(!x.factors.empty(), ErrorKind::DimensionMismatch, "no factors");
                          for (const auto& f : x.factors) check(f);
                        },
                        [](const precond::DiagonalCost<Scalar>& x) {
                          require(x.costs.size() > 0 && x.costs.minCoeff() > 0, ErrorKind::NonPositiveCost,
                                  "diagonal costs must be > 0");
                        }},
             p);
}

/// P m.
template <typename Scalar>
VectorX<Scalar> precond_apply(const Preconditioner<Scalar>& p, const VectorX<Scalar>& m) {
  require(precond_dim(p) == m.size(), ErrorKind::DimensionMismatch, "preconditioner dimension differs");
  return std::visit(overloaded{[&](const precond::Identity<Scalar>&) { return VectorX<Scalar>(m); },
                               [&](const precond::Dense<Scalar>& x) { return VectorX<Scalar>(x.p * m); },
                               [&](const precond::BlockDiag<Scalar>& x) {
                                 VectorX<Scalar> out(m.size());
                                 Index at = 0;
                                 for (const auto& b : x.blocks) {
                                   out.segment(at, b.rows()) = b * m.segment(at, b.rows());
                                   at += b.rows();
                                 }
                                 return out;
                               },
                               [&](const precond::Kronecker<Scalar>& x) {
                                 MatrixX<Scalar> full = x.factors.front();
                                 for (std::size_t i = 1; i < x.factors.size(); ++i) full = kronecker(full, x.factors[i]);
                                 return VectorX<Scalar>(full * m);
                               },
                               [&](const precond::DiagonalCost<Scalar>& x) {
                                 return VectorX<Scalar>(m.cwiseQuotient(x.costs));
                               }},
                    p);
}

/// Trace that normalizes the trust-region budget: Tr(P) for dense and
/// block-diagonal, the total dimension for identity and Kronecker (whose
/// factors whiten their own second moments), sum_j 1/c_j for diagonal costs.
template <typename Scalar>
Scalar precond_trace(const Preconditioner<Scalar>& p) {
  return std::visit(overloaded{[](const precond::Identity<Scalar>& x) { return static_cast<Scalar>(x.dim); },
                               [](const precond::Dense<Scalar>& x) { return x.p.trace(); },
                               [](const precond::BlockDiag<Scalar>& x) {
                                 Scalar t = 0;
                                 for (const auto& b : x.blocks) t += b.trace();
                                 return t;
                               },
                               [&](const precond::Kronecker<Scalar>&) { return static_cast<Scalar>(precond_dim(p)); },
                               [](const precond::DiagonalCost<Scalar>& x) { return x.costs.cwiseInverse().sum(); }},
                    p);
}

/// sqrt(1 - beta^2) / sqrt(trace) * g^T P m.
template <typename Scalar>
Scalar precond_objective(Scalar beta, const Preconditioner<Scalar>& p, const VectorX<Scalar>& g,
                         const VectorX<Scalar>& m_unnorm) {
  require(g.size() == m_unnorm.size(), ErrorKind::DimensionMismatch, "gradient and momentum dimensions differ");
  return std::sqrt(Scalar(1) - beta * beta) / std::sqrt(precond_trace(p)) * g.dot(precond_apply(p, m_unnorm));
}

/// eta* = sqrt(B (1 + beta*) / ((1 - beta*) trace)).
template <typename Scalar>
Scalar precond_optimal_lr(Scalar beta_star, Scalar budget, const Preconditioner<Scalar>& p) {
  require(budget > 0, ErrorKind::InvalidBudget, "budget must be > 0");
  require(beta_star >= 0 && beta_star < 1, ErrorKind::InvalidBudget, "beta must lie in [0, 1)");
  return std::sqrt(budget * (Scalar(1) + beta_star) / ((Scalar(1) - beta_star) * precond_trace(p)));
}

/// Preconditioned SGD+Momentum switch: delta = -eta P m_{k*}.
template <typename Scalar>
StepResult<Scalar> precond_switch_step(SwitchState<Scalar> state, const Preconditioner<Scalar>& p,
                                       const VectorX<Scalar>& g, Scalar eta) {
  detail::check_dim(state, g.size());
  std::vector<Scalar> j(state.candidates.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    const Scalar beta = state.candidates[k].beta1;
    state.momenta[k] = momentum_update(state.momenta[k], g, beta);
    j[k] = precond_objective(beta, p, g, state.momenta[k]);
  }
  return detail::finish_step(std::move(state), std::move(j), [&](const SwitchState<Scalar>& s, std::size_t k) {
    return VectorX<Scalar>(-eta * precond_apply(p, s.momenta[k]));
  });
}

/// sum_j c_j / sqrt(sum_j 1/c_j).
template <typename Scalar>
Scalar rmsprop_objective(const VectorX<Scalar>& costs) {
  require(costs.size() > 0 && costs.minCoeff() > 0, ErrorKind::NonPositiveCost, "costs must be > 0");
  return costs.sum() / std::sqrt(costs.cwiseInverse().sum());
}

/// eta* = sqrt(B / sum_j 1/c_j).
template <typename Scalar>
Scalar rmsprop_optimal_lr(Scalar budget, const VectorX<Scalar>& costs) {
  require(budget > 0, ErrorKind::InvalidBudget, "budget must be > 0");
  require(costs.size() > 0 && costs.minCoeff() > 0, ErrorKind::NonPositiveCost, "costs must be > 0");
  return std::sqrt(budget / costs.cwiseInverse().sum());
}

// ---------------------------------------------------------------------------
// Muon

/// <G, Ortho(B_mu)> with the exact polar factor. `mu` is implied by the
/// accumulated buffer B_mu = G + mu B_prev and is only kept for the caller's
/// bookkeeping.
template <typename Scalar>
Scalar muon_objective([[maybe_unused]] Scalar mu, const MatrixX<Scalar>& g_now, const MatrixX<Scalar>& b_momentum) {
  require(g_now.rows() == b_momentum.rows() && g_now.cols() == b_momentum.cols(), ErrorKind::DimensionMismatch,
          "gradient and momentum shapes differ");
  return (g_now.array() * polar_factor(b_momentum).array()).sum();
}

/// Muon switch step on a rows x cols block. Selection always uses the exact
/// polar factor; the applied update uses `method`. A zero buffer scores 0 and
/// produces a zero update. Objectives within 1e-12 relative of the leader are
/// treated as tied, since buffers differing only in scale give the same score
/// up to rounding.
template <typename Scalar>
StepResult<Scalar> muon_switch_step(SwitchState<Scalar> state, const MatrixX<Scalar>& g, Scalar eta,
                                    OrthoMethod method = OrthoMethod::exact,
                                    Ns5Coefficients coef = Ns5Coefficients::convergent()) {
  require(g.rows() == state.rows && g.cols() == state.cols, ErrorKind::DimensionMismatch,
          "gradient block shape differs from switch state");
  const VectorX<Scalar> flat = g.reshaped();
  std::vector<Scalar> j(state.candidates.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    const Scalar mu = state.candidates[k].beta1;
    state.momenta[k] = momentum_update(state.momenta[k], flat, mu);
    MatrixX<Scalar> b = state.momenta[k].reshaped(state.rows, state.cols);
    j[k] = b.isZero(0) ? Scalar(0) : muon_objective(mu, g, b);
  }
  return detail::finish_step(std::move(state), std::move(j), [&](const SwitchState<Scalar>& s, std::size_t k) {
    MatrixX<Scalar> b = s.momenta[k].reshaped(s.rows, s.cols);
    if (b.isZero(0)) return VectorX<Scalar>(VectorX<Scalar>::Zero(b.size()));
    MatrixX<Scalar> o = orthogonalize(b, method, coef);
    return VectorX<Scalar>(-eta * o.reshaped());
  }, Scalar(1e-12));
}

// ---------------------------------------------------------------------------
// Validation-aware objectives

template <typename Scalar>
struct SgdmBase {
  Scalar beta;
};
template <typename Scalar>
struct AdamBase {
  Scalar beta1;
  VectorX<Scalar> second_moment;
  Scalar eps = Scalar(1e-8);
};
template <typename Scalar>
struct PrecondBase {
  Scalar beta;
  Preconditioner<Scalar> precond;
};

template <typename Scalar>
using BaseObjective = std::variant<SgdmBase<Scalar>, AdamBase<Scalar>, PrecondBase<Scalar>>;

/// The base objective with the validation gradient in the dot product; the
/// update direction (momentum or Adam first moment) stays training-driven.
template <typename Scalar>
Scalar validation_objective(const BaseObjective<Scalar>& base, const VectorX<Scalar>& g_val,
                            const VectorX<Scalar>& update_direction) {
  return std::visit(overloaded{[&](const SgdmBase<Scalar>& b) { return sgdm_objective(b.beta, g_val, update_direction); },
                               [&](const AdamBase<Scalar>& b) {
                                 return adam_objective(b.beta1, g_val, update_direction, b.second_moment, b.eps);
                               },
                               [&](const PrecondBase<Scalar>& b) {
                                 return precond_objective(b.beta, b.precond, g_val, update_direction);
                               }},
                    base);
}

}  // namespace greedyopt
