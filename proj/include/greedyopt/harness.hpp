#pragma once

// Desk-scale experiments: quadratic and Rosenbrock runs under stateless
// optimizers, and a one-hidden-layer MLP trained with the switch optimizers.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "greedyopt/stateless.hpp"
#include "greedyopt/switch.hpp"

namespace greedyopt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Trace {
  long steps = 0;
  std::vector<double> loss;
  std::vector<int> selected;                   // empty unless a switch chose candidates
  std::vector<std::vector<double>> objectives;  // per-step J_k, same length as selected
  std::map<std::string, std::string> meta;
};

/// CSV with columns step, loss[, selected, J_0..J_{K-1}].
std::string trace_csv(const Trace& trace);

/// `count` PSD matrices with ||Q||_F = sqrt(budget): symmetric Gaussian
/// draws, PSD-projected and rescaled. Draws whose projection vanishes are
/// redrawn.
std::vector<MatrixXd> sample_equal_power_family(double budget, Index dim, int count, std::uint64_t seed);

/// theta <- theta - eta Q A theta with loss 0.5 theta^T A theta recorded
/// after every step. Throws Divergence once the loss exceeds 1e12.
Trace run_quadratic(const MatrixXd& a, const MatrixXd& q, const VectorXd& theta0, double eta, long steps);

/// Largest eta keeping the quadratic run stable, 2 / lambda_max(Q A).
double quadratic_stability_limit(const MatrixXd& a, const MatrixXd& q);

struct RosenbrockConfig {
  double a = 1.0;
  double b = 100.0;
  VectorXd start = (VectorXd(2) << -1.2, 1.0).finished();
  TrustRegion<double> region = Diagonal<double>{1e-6, VectorXd::Ones(2)};
  /// Sigma <- ema Sigma + (1 - ema) g g^T.
  double ema = 0.9;
  double eta = 1.0;
  long steps = 500;
};

double rosenbrock_loss(double a, double b, const VectorXd& theta);
VectorXd rosenbrock_gradient(double a, double b, const VectorXd& theta);

/// theta <- theta + eta Q*(Sigma_n) g with g = -grad L. A zero running moment
/// gives Q* = 0 and the step is skipped.
Trace run_rosenbrock(const RosenbrockConfig& config);

struct MlpConfig {
  Index input_dim = 20;
  Index hidden = 16;
  Index samples = 800;
  double separation = 1.0;
  std::uint64_t seed = 0;  // data, init and minibatch order all derive from it
  Index batch = 64;
  long steps = 400;
  double eta = 0.01;
  double eps = 1e-8;
  std::string optimizer = "adam";  // "adam" or "sgdm"
  std::vector<Candidate<double>> candidates{{0.8, 0.999}, {0.99, 0.999}};
  SwitchConfig switch_config;
};

void validate(const MlpConfig& config);

struct MlpData {
  MatrixXd x;  // samples x input_dim
  std::vector<int> labels;
};

MlpData make_two_gaussians(const MlpConfig& config);
VectorXd mlp_init(const MlpConfig& config);
Index mlp_param_count(const MlpConfig& config);

/// Mean softmax cross-entropy over `rows` (all rows when empty) and its
/// gradient with respect to the flat parameter vector.
double mlp_loss_grad(const MlpConfig& config, const VectorXd& params, const MlpData& data,
                     const std::vector<Index>& rows, VectorXd* grad);

/// Trains with the switch optimizer; loss is the full training loss after each step.
Trace run_mlp_switch(const MlpConfig& config);

/// Same data, init and minibatches as run_mlp_switch, updated by the plain
/// fixed-hyperparameter recursion of config.candidates.front() with no
/// switching and no hysteresis.
Trace run_mlp_fixed(const MlpConfig& config);

}  // namespace greedyopt
