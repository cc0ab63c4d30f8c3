#include "greedyopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "greedyopt/io.hpp"

namespace greedyopt {

namespace {

constexpr double kDivergenceLoss = 1e12;

void check_loss(double loss, long step) {
  if (!std::isfinite(loss) || loss > kDivergenceLoss)
    fail(ErrorKind::Divergence, "loss diverged at step " + std::to_string(step));
}

MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

}  // namespace

std::string trace_csv(const Trace& trace) {
  const bool switched = !trace.selected.empty();
  const std::size_t k = switched && !trace.objectives.empty() ? trace.objectives.front().size() : 0;
  std::string out = "step,loss";
  if (switched) {
    out += ",selected";
    for (std::size_t i = 0; i < k; ++i) out += ",J_" + std::to_string(i);
  }
  out += "\n";
  for (std::size_t n = 0; n < trace.loss.size(); ++n) {
    out += std::to_string(n) + "," + io::format_double(trace.loss[n]);
    if (switched) {
      out += "," + std::to_string(trace.selected[n]);
      for (double j : trace.objectives[n]) out += "," + io::format_double(j);
    }
    out += "\n";
  }
  return out;
}

std::vector<MatrixXd> sample_equal_power_family(double budget, Index dim, int count, std::uint64_t seed) {
  require(budget > 0, ErrorKind::InvalidBudget, "budget must be > 0");
  require(dim >= 1, ErrorKind::DimensionMismatch, "dimension must be >= 1");
  require(count >= 1, ErrorKind::ConfigError, "count must be >= 1");
  std::mt19937_64 rng(seed);
  const double radius = std::sqrt(budget);
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    MatrixXd q = psd_project(gaussian_matrix(dim, dim, rng)).matrix();
    const double norm = q.norm();
    if (norm == 0) continue;
    out.push_back(q * (radius / norm));
  }
  return out;
}

double quadratic_stability_limit(const MatrixXd& a, const MatrixXd& q) {
  require(a.rows() == a.cols() && q.rows() == a.rows() && q.cols() == a.cols(), ErrorKind::DimensionMismatch,
          "A and Q must be square and of equal size");
  const MatrixXd root = spectral_map(a, [](double s) { return std::sqrt(std::max(s, 0.0)); });
  const double top = spectral_radius_sym(MatrixXd(root * q * root));
  return top > 0 ? 2.0 / top : std::numeric_limits<double>::infinity();
}

Trace run_quadratic(const MatrixXd& a, const MatrixXd& q, const VectorXd& theta0, double eta, long steps) {
  require(a.rows() == a.cols() && q.rows() == a.rows() && q.cols() == a.cols() && theta0.size() == a.rows(),
          ErrorKind::DimensionMismatch, "quadratic run shapes differ");
  require(is_psd(a, 1e-10), ErrorKind::NonPSDInput, "A must be PSD");
  require(steps >= 0, ErrorKind::ConfigError, "steps must be >= 0");
  Trace trace;
  trace.steps = steps;
  trace.meta["kind"] = "quadratic";
  trace.meta["eta"] = io::format_double(eta);
  const MatrixXd qa = q * a;
  VectorXd theta = theta0;
  for (long n = 0; n < steps; ++n) {
    theta -= eta * (qa * theta);
    const double loss = 0.5 * theta.dot(a * theta);
    check_loss(loss, n);
    trace.loss.push_back(loss);
  }
  return trace;
}

double rosenbrock_loss(double a, double b, const VectorXd& theta) {
  require(theta.size() == 2, ErrorKind::DimensionMismatch, "Rosenbrock is two-dimensional");
  const double x = theta(0), y = theta(1);
  return (a - x) * (a - x) + b * (y - x * x) * (y - x * x);
}

VectorXd rosenbrock_gradient(double a, double b, const VectorXd& theta) {
  require(theta.size() == 2, ErrorKind::DimensionMismatch, "Rosenbrock is two-dimensional");
  const double x = theta(0), y = theta(1);
  VectorXd g(2);
  g(0) = -2.0 * (a - x) - 4.0 * b * x * (y - x * x);
  g(1) = 2.0 * b * (y - x * x);
  return g;
}

Trace run_rosenbrock(const RosenbrockConfig& config) {
  require(config.start.size() == 2, ErrorKind::DimensionMismatch, "Rosenbrock start must be a 2-vector");
  require(all_finite(config.start), ErrorKind::Divergence, "Rosenbrock start is not finite");
  require(config.ema >= 0 && config.ema < 1, ErrorKind::ConfigError, "ema must lie in [0, 1)");
  require(config.steps >= 0, ErrorKind::ConfigError, "steps must be >= 0");
  validate(config.region, 2);
  Trace trace;
  trace.steps = config.steps;
  trace.meta["kind"] = "rosenbrock";
  trace.meta["family"] = family_name(config.region);
  VectorXd theta = config.start;
  MatrixXd sigma = MatrixXd::Zero(2, 2);
  for (long n = 0; n < config.steps; ++n) {
    const VectorXd g = -rosenbrock_gradient(config.a, config.b, theta);
    sigma = config.ema * sigma + (1.0 - config.ema) * g * g.transpose();
    if (!g.isZero(0)) {
      const auto sol = solve(config.region, MomentMatrix<double>(sigma));
      theta += config.eta * (sol.q * g);
    }
    if (!all_finite(theta)) fail(ErrorKind::Divergence, "parameters became non-finite at step " + std::to_string(n));
    const double loss = rosenbrock_loss(config.a, config.b, theta);
    check_loss(loss, n);
    trace.loss.push_back(loss);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// MLP: input -> tanh hidden -> 2-way softmax

namespace {

constexpr Index kClasses = 2;

struct MlpView {
  Eigen::Map<const MatrixXd> w1;
  Eigen::Map<const VectorXd> b1;
  Eigen::Map<const MatrixXd> w2;
  Eigen::Map<const VectorXd> b2;
};

MlpView view(const MlpConfig& c, const VectorXd& p) {
  const double* at = p.data();
  Eigen::Map<const MatrixXd> w1(at, c.hidden, c.input_dim);
  at += c.hidden * c.input_dim;
  Eigen::Map<const VectorXd> b1(at, c.hidden);
  at += c.hidden;
  Eigen::Map<const MatrixXd> w2(at, kClasses, c.hidden);
  at += kClasses * c.hidden;
  Eigen::Map<const VectorXd> b2(at, kClasses);
  return {w1, b1, w2, b2};
}

// Minibatch row lists for every step, drawn without replacement per step.
std::vector<std::vector<Index>> batch_schedule(const MlpConfig& c) {
  std::mt19937_64 rng(c.seed * 3 + 7);
  std::vector<Index> all(static_cast<std::size_t>(c.samples));
  std::iota(all.begin(), all.end(), Index(0));
  std::vector<std::vector<Index>> out;
  out.reserve(static_cast<std::size_t>(c.steps));
  for (long n = 0; n < c.steps; ++n) {
    if (c.batch >= c.samples) {
      out.emplace_back();
      continue;
    }
    for (Index i = 0; i < c.batch; ++i) {
      std::uniform_int_distribution<Index> pick(i, c.samples - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    out.emplace_back(all.begin(), all.begin() + c.batch);
  }
  return out;
}

}  // namespace

void validate(const MlpConfig& c) {
  require(c.input_dim >= 1 && c.hidden >= 1 && c.samples >= 2, ErrorKind::ConfigError, "MLP widths must be positive");
  require(c.batch >= 1, ErrorKind::ConfigError, "batch must be >= 1");
  require(c.steps >= 0, ErrorKind::ConfigError, "steps must be >= 0");
  require(c.eta > 0 && c.eps >= 0, ErrorKind::ConfigError, "eta must be > 0 and eps >= 0");
  require(c.separation >= 0, ErrorKind::ConfigError, "separation must be >= 0");
  require(c.optimizer == "adam" || c.optimizer == "sgdm", ErrorKind::ConfigError,
          "optimizer must be \"adam\" or \"sgdm\"");
  require(!c.candidates.empty(), ErrorKind::ConfigError, "need at least one candidate");
}

Index mlp_param_count(const MlpConfig& c) {
  return c.hidden * c.input_dim + c.hidden + kClasses * c.hidden + kClasses;
}

MlpData make_two_gaussians(const MlpConfig& c) {
  std::mt19937_64 rng(c.seed);
  VectorXd mu = gaussian_matrix(c.input_dim, 1, rng);
  mu *= c.separation / mu.norm();
  std::bernoulli_distribution coin(0.5);
  MlpData data{gaussian_matrix(c.samples, c.input_dim, rng), std::vector<int>(static_cast<std::size_t>(c.samples))};
  for (Index i = 0; i < c.samples; ++i) {
    const int label = coin(rng) ? 1 : 0;
    data.labels[static_cast<std::size_t>(i)] = label;
    data.x.row(i) += (label == 1 ? mu : VectorXd(-mu)).transpose();
  }
  return data;
}

VectorXd mlp_init(const MlpConfig& c) {
  std::mt19937_64 rng(c.seed + 1000);
  VectorXd p = VectorXd::Zero(mlp_param_count(c));
  const MatrixXd w1 = gaussian_matrix(c.hidden, c.input_dim, rng) / std::sqrt(double(c.input_dim));
  const MatrixXd w2 = gaussian_matrix(kClasses, c.hidden, rng) / std::sqrt(double(c.hidden));
  p.head(w1.size()) = w1.reshaped();
  p.segment(w1.size() + c.hidden, w2.size()) = w2.reshaped();
  return p;
}

double mlp_loss_grad(const MlpConfig& c, const VectorXd& params, const MlpData& data,
                     const std::vector<Index>& rows, VectorXd* grad) {
  require(params.size() == mlp_param_count(c), ErrorKind::DimensionMismatch, "parameter count differs from layout");
  const MlpView p = view(c, params);
  const Index n = rows.empty() ? data.x.rows() : static_cast<Index>(rows.size());
  MatrixXd x(n, c.input_dim);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index r = rows.empty() ? i : rows[static_cast<std::size_t>(i)];
    x.row(i) = data.x.row(r);
    y[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(r)];
  }

  const MatrixXd h = ((x * p.w1.transpose()).rowwise() + p.b1.transpose()).array().tanh().matrix();
  MatrixXd logits = (h * p.w2.transpose()).rowwise() + p.b2.transpose();
  logits.colwise() -= logits.rowwise().maxCoeff();
  MatrixXd prob = logits.array().exp().matrix();
  prob.array().colwise() /= prob.rowwise().sum().array();

  double loss = 0;
  for (Index i = 0; i < n; ++i) loss -= std::log(prob(i, y[static_cast<std::size_t>(i)]));
  loss /= double(n);

  if (grad) {
    MatrixXd dlogits = prob;
    for (Index i = 0; i < n; ++i) dlogits(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    dlogits /= double(n);
    const MatrixXd gw2 = dlogits.transpose() * h;
    const VectorXd gb2 = dlogits.colwise().sum().transpose();
    const MatrixXd dz = ((dlogits * p.w2).array() * (1.0 - h.array().square())).matrix();
    const MatrixXd gw1 = dz.transpose() * x;
    const VectorXd gb1 = dz.colwise().sum().transpose();
    grad->resize(params.size());
    Index at = 0;
    grad->segment(at, gw1.size()) = gw1.reshaped();
    at += gw1.size();
    grad->segment(at, gb1.size()) = gb1;
    at += gb1.size();
    grad->segment(at, gw2.size()) = gw2.reshaped();
    at += gw2.size();
    grad->segment(at, gb2.size()) = gb2;
  }
  return loss;
}

Trace run_mlp_switch(const MlpConfig& c) {
  validate(c);
  const MlpData data = make_two_gaussians(c);
  const auto batches = batch_schedule(c);
  VectorXd theta = mlp_init(c);
  const Index dim = theta.size();

  SwitchState<double> state;
  if (c.optimizer == "adam") {
    state = make_adam_state(c.candidates, dim, c.switch_config);
  } else {
    std::vector<double> betas;
    for (const auto& k : c.candidates) betas.push_back(k.beta1);
    state = make_sgdm_state(betas, dim, c.switch_config);
  }

  Trace trace;
  trace.steps = c.steps;
  trace.meta["kind"] = "mlp-switch";
  trace.meta["optimizer"] = c.optimizer;
  trace.meta["candidates"] = std::to_string(c.candidates.size());
  VectorXd g;
  for (long n = 0; n < c.steps; ++n) {
    mlp_loss_grad(c, theta, data, batches[static_cast<std::size_t>(n)], &g);
    auto step = c.optimizer == "adam" ? adam_switch_step(std::move(state), g, c.eta, c.eps)
                                      : sgdm_switch_step(std::move(state), g, c.eta);
    theta += step.delta_theta;
    state = std::move(step.state);
    const double loss = mlp_loss_grad(c, theta, data, {}, nullptr);
    check_loss(loss, n);
    trace.loss.push_back(loss);
    trace.selected.push_back(static_cast<int>(step.record.selected));
    trace.objectives.push_back(std::move(step.record.objectives));
  }
  return trace;
}

Trace run_mlp_fixed(const MlpConfig& c) {
  validate(c);
  const MlpData data = make_two_gaussians(c);
  const auto batches = batch_schedule(c);
  VectorXd theta = mlp_init(c);
  const auto [b1, b2] = c.candidates.front();
  VectorXd m = VectorXd::Zero(theta.size());
  VectorXd v = VectorXd::Zero(theta.size());

  Trace trace;
  trace.steps = c.steps;
  trace.meta["kind"] = "mlp-fixed";
  trace.meta["optimizer"] = c.optimizer;
  VectorXd g;
  for (long n = 0; n < c.steps; ++n) {
    mlp_loss_grad(c, theta, data, batches[static_cast<std::size_t>(n)], &g);
    if (c.optimizer == "adam") {
      v = b2 * v + (1.0 - b2) * g.cwiseAbs2();
      m = b1 * m + (1.0 - b1) * g;
      const VectorXd denom = v.cwiseSqrt().array() + c.eps;
      theta += -c.eta * m.cwiseQuotient(denom);
    } else {
      m = g + b1 * m;
      theta += -c.eta * m;
    }
    const double loss = mlp_loss_grad(c, theta, data, {}, nullptr);
    check_loss(loss, n);
    trace.loss.push_back(loss);
  }
  return trace;
}

}  // namespace greedyopt
