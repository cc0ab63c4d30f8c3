#include "greedyopt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <regex>

#include "greedyopt/harness.hpp"
#include "greedyopt/io.hpp"
#include "greedyopt/oracle.hpp"

namespace greedyopt::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

enum class Level { error = 0, info = 1, debug = 2 };

Level log_level() {
  const char* env = std::getenv("GREEDYOPT_LOG");
  const std::string v = env ? env : "";
  if (v == "debug") return Level::debug;
  if (v == "info") return Level::info;
  return Level::error;
}

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err), level_(log_level()) {}
  void info(const std::string& msg) const { emit(Level::info, "info", msg); }
  void debug(const std::string& msg) const { emit(Level::debug, "debug", msg); }
  void error(const std::string& msg) const { err_ << "error: " << msg << "\n"; }

 private:
  void emit(Level at, const char* tag, const std::string& msg) const {
    if (static_cast<int>(level_) >= static_cast<int>(at)) err_ << tag << ": " << msg << "\n";
  }
  std::ostream& err_;
  Level level_;
};

struct RegionFlags {
  std::string family;
  std::optional<double> budget, tau, lambda;
  std::string costs_path;
};

void add_region_flags(CLI::App* cmd, RegionFlags& f, bool family_required) {
  auto* fam = cmd->add_option("--family", f.family, "frobenius|spectral|lyapunov|diagonal")
                  ->check(CLI::IsMember({"frobenius", "spectral", "lyapunov", "diagonal"}));
  if (family_required) fam->required();
  cmd->add_option("--budget", f.budget, "budget B (frobenius, lyapunov, diagonal)");
  cmd->add_option("--tau", f.tau, "trace budget (spectral)");
  cmd->add_option("--lambda", f.lambda, "eigenvalue cap (spectral)");
  cmd->add_option("--costs", f.costs_path, "cost vector file (diagonal)");
}

TrustRegion<double> make_region(const std::string& family, std::optional<double> budget, std::optional<double> tau,
                                std::optional<double> lambda, const VectorXd& costs) {
  auto need = [](const std::optional<double>& v, const char* name) {
    require(v.has_value(), ErrorKind::ConfigError, std::string("missing --") + name);
    return *v;
  };
  if (family == "frobenius") return Frobenius<double>{need(budget, "budget")};
  if (family == "lyapunov") return Lyapunov<double>{need(budget, "budget")};
  if (family == "spectral") return Spectral<double>{need(tau, "tau"), need(lambda, "lambda")};
  if (family == "diagonal") {
    require(costs.size() > 0, ErrorKind::ConfigError, "diagonal family needs --costs");
    return Diagonal<double>{need(budget, "budget"), costs};
  }
  fail(ErrorKind::ConfigError, "unknown family '" + family + "'");
}

TrustRegion<double> region_from_flags(const RegionFlags& f) {
  VectorXd costs;
  if (!f.costs_path.empty()) costs = io::load_vector(f.costs_path);
  return make_region(f.family, f.budget, f.tau, f.lambda, costs);
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else io::write_text(path, text);
}

json load_json(const std::string& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, path + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::ConfigError, std::string("bad type for config key '") + key + "'");
  }
}

std::pair<Index, Index> parse_dims(const std::string& text) {
  static const std::regex range(R"(^\s*(\d+)\s*\.\.\s*(\d+)\s*$)");
  static const std::regex single(R"(^\s*(\d+)\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, range)) {
    const Index a = std::stol(m[1]), b = std::stol(m[2]);
    require(a >= 1 && a <= b, ErrorKind::ConfigError, "--dims needs 1 <= a <= b");
    return {a, b};
  }
  if (std::regex_match(text, m, single)) {
    const Index a = std::stol(m[1]);
    require(a >= 1, ErrorKind::ConfigError, "--dims must be >= 1");
    return {a, a};
  }
  fail(ErrorKind::ConfigError, "--dims expects a..b");
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  RegionFlags region;
  std::string sigma, out;
};

int run_solve(const SolveArgs& a, std::ostream& out, const Logger& log) {
  const MomentMatrix<double> sigma(io::load_matrix(a.sigma));
  const auto region = region_from_flags(a.region);
  const auto sol = solve(region, sigma);
  log.info("solved " + family_name(region) + " d=" + std::to_string(sigma.dim()) + " power=" +
           io::format_double(sol.power));
  emit(a.out, io::dump(io::solution_to_json(region, sol)), out);
  return 0;
}

struct SolveDynamicArgs {
  RegionFlags region;
  std::string moments, out;
  bool global = false;
};

int run_solve_dynamic(const SolveDynamicArgs& a, std::ostream& out, const Logger& log) {
  const auto r = io::lag_moments_from_json(load_json(a.moments));
  DynamicSolution<double> sol;
  std::string family;
  if (a.global) {
    require(a.region.family.empty() || a.region.family == "frobenius", ErrorKind::ConfigError,
            "--global only applies to the frobenius family");
    require(a.region.budget.has_value(), ErrorKind::ConfigError, "missing --budget");
    sol = solve_dynamic(GlobalFrobenius<double>{*a.region.budget}, r);
    family = "global-frobenius";
  } else {
    require(!a.region.family.empty(), ErrorKind::ConfigError, "missing --family (or --global)");
    const auto region = region_from_flags(a.region);
    sol = solve_dynamic(std::vector<TrustRegion<double>>{region}, r);
    family = family_name(region);
  }
  log.info("solved dynamic " + family + " lags=" + std::to_string(r.lags().size()));
  json j = io::filter_to_json(sol.filter);
  j["family"] = family;
  j["power"] = sol.power;
  emit(a.out, io::dump(j), out);
  return 0;
}

struct CertifyArgs {
  RegionFlags region;
  std::string sigma, out, dims = "2..6";
  int trials = 100;
  std::uint64_t seed = 0;
  long iters = 4000;
  int restarts = 2;
};

MatrixXd random_psd_instance(Index d, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> rank(1, d);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index r = rank(rng);
  MatrixXd x(d, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < d; ++i) x(i, j) = normal(rng);
  return x * x.transpose() / double(r);
}

int run_certify(const CertifyArgs& a, std::ostream& out, const Logger& log) {
  require(a.trials >= 1, ErrorKind::ConfigError, "--trials must be >= 1");
  require(a.iters >= 1 && a.restarts >= 1, ErrorKind::ConfigError, "--iters and --restarts must be >= 1");
  const auto [dmin, dmax] = parse_dims(a.dims);
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Index> pick_dim(dmin, dmax);

  double max_gap = -std::numeric_limits<double>::infinity();
  double max_shortfall = 0;
  double max_violation = -std::numeric_limits<double>::infinity();
  int failures = 0;
  const int trials = a.sigma.empty() ? a.trials : 1;
  for (int t = 0; t < trials; ++t) {
    MatrixXd s = a.sigma.empty() ? random_psd_instance(pick_dim(rng), rng) : io::load_matrix(a.sigma);
    const MomentMatrix<double> sigma(s);
    const Index d = sigma.dim();
    VectorXd costs = a.region.costs_path.empty() ? VectorXd((0.5 + 2.5 * VectorXd::NullaryExpr(d, [&] {
                                                     return unit(rng);
                                                   }).array()).matrix())
                                                 : io::load_vector(a.region.costs_path);
    const double lambda = a.region.lambda.value_or(0.2 + 1.8 * unit(rng));
    const double tau = a.region.tau.value_or((0.1 + 1.1 * unit(rng)) * double(d) * lambda);
    const double budget = a.region.budget.value_or(0.5 + 4.5 * unit(rng));
    const auto region = make_region(a.region.family, budget, tau, lambda, costs);

    const auto closed = solve(region, sigma);
    const auto report = oracle_maximize(region, sigma, a.iters, a.restarts, rng());
    const double scale = 1.0 + std::abs(closed.power);
    const double gap = (report.best_value - closed.power) / scale;
    const double violation = constraint_violation(region, report.best_point, sigma);
    max_gap = std::max(max_gap, gap);
    max_shortfall = std::max(max_shortfall, -gap);
    max_violation = std::max(max_violation, violation);
    const bool ok = gap <= 1e-6 && violation <= 1e-8;
    if (!ok) ++failures;
    log.debug("trial " + std::to_string(t) + " d=" + std::to_string(d) + " closed=" +
              io::format_double(closed.power) + " oracle=" + io::format_double(report.best_value));
  }

  json report = {{"family", a.region.family},
                 {"trials", trials},
                 {"dims", {dmin, dmax}},
                 {"seed", a.seed},
                 {"oracle_iters", a.iters},
                 {"oracle_restarts", a.restarts},
                 {"max_gap", max_gap},
                 {"max_oracle_shortfall", max_shortfall},
                 {"max_oracle_violation", max_violation},
                 {"failures", failures},
                 {"passed", failures == 0}};
  if (a.out.empty()) {
    out << io::dump(report);
  } else {
    fs::create_directories(a.out);
    io::write_text((fs::path(a.out) / "report.json").string(), io::dump(report));
  }
  log.info("certify " + a.region.family + ": max_gap=" + io::format_double(max_gap) +
           " failures=" + std::to_string(failures));
  return failures == 0 ? 0 : 1;
}

struct EndpointArgs {
  std::string problem, q, out;
  std::optional<double> step;
  double tol = 1e-10;
  long max_iters = 1000000;
};

int run_endpoint(const EndpointArgs& a, std::ostream& out, const Logger& log) {
  const auto prob = io::problem_from_json(load_json(a.problem));
  const Index d = prob.jac.cols();
  const MatrixXd q = a.q.empty() ? MatrixXd(MatrixXd::Identity(d, d)) : io::load_matrix(a.q);
  const double bound = flow_step_bound(q, prob);
  const double step = a.step.value_or(std::isfinite(bound) ? 0.5 * bound : 1.0);
  const VectorXd analytic = analytic_endpoint(q, prob);
  long iterations = 0;
  const VectorXd flow = flow_endpoint(q, prob, step, a.tol, a.max_iters, &iterations);
  json j = {{"analytic", io::vector_to_json(analytic)},
            {"flow", io::vector_to_json(flow)},
            {"max_abs_diff", (analytic - flow).cwiseAbs().maxCoeff()},
            {"step", step},
            {"step_bound", std::isfinite(bound) ? json(bound) : json(nullptr)},
            {"iterations", iterations},
            {"residual", (prob.jac * analytic - prob.target).norm()}};
  log.info("endpoint flow converged in " + std::to_string(iterations) + " iterations");
  emit(a.out, io::dump(j), out);
  return 0;
}

struct TrainArgs {
  std::string kind, config, out;
  std::optional<std::uint64_t> seed;
};

std::vector<Candidate<double>> candidates_from_json(const json& j) {
  require(j.is_array() && !j.empty(), ErrorKind::ConfigError, "\"candidates\" must be a non-empty array");
  std::vector<Candidate<double>> out;
  for (const auto& c : j) {
    if (c.is_number()) out.push_back({c.get<double>(), 0.999});
    else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
      out.push_back({c[0].get<double>(), c[1].get<double>()});
    else fail(ErrorKind::ConfigError, "each candidate is a number or a [beta1, beta2] pair");
  }
  return out;
}

SwitchConfig switch_config_from_json(const json& j) {
  SwitchConfig s;
  s.hysteresis_window = get_or<int>(j, "hysteresis_window", s.hysteresis_window);
  s.decay = get_or<double>(j, "decay", s.decay);
  s.objective_ema = get_or<double>(j, "objective_ema", s.objective_ema);
  return s;
}

TrustRegion<double> region_from_json(const json& j, Index dim) {
  const std::string family = get_or<std::string>(j, "family", "frobenius");
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    return get_or<double>(j, key, 0.0);
  };
  std::optional<double> budget = opt("budget");
  if (!budget && (family == "frobenius" || family == "lyapunov")) budget = 1.0;
  VectorXd costs = j.contains("costs") ? io::vector_from_json(j.at("costs")) : VectorXd(VectorXd::Ones(dim));
  return make_region(family, budget, opt("tau"), opt("lambda"), costs);
}

Trace train_quadratic(const json& cfg, std::uint64_t seed, json& effective) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd a;
  if (cfg.contains("a")) {
    a = io::matrix_from_json(cfg.at("a"));
  } else {
    const Index d = get_or<Index>(cfg, "dim", 10);
    const double cond = get_or<double>(cfg, "condition", 100.0);
    require(d >= 1 && cond >= 1, ErrorKind::ConfigError, "dim >= 1 and condition >= 1 required");
    MatrixXd x(d, d);
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < d; ++i) x(i, j) = normal(rng);
    const MatrixXd u = Eigen::HouseholderQR<MatrixXd>(x).householderQ();
    VectorXd ev(d);
    for (Index i = 0; i < d; ++i) ev(i) = d == 1 ? 1.0 : std::pow(cond, double(i) / double(d - 1));
    a = symmetrize(MatrixXd(u * ev.asDiagonal() * u.transpose()));
  }
  const Index d = a.rows();
  MatrixXd q;
  if (cfg.contains("q")) {
    q = io::matrix_from_json(cfg.at("q"));
  } else {
    q = solve(region_from_json(cfg, d), MomentMatrix<double>(a)).q;
  }
  VectorXd theta0(d);
  if (cfg.contains("theta0")) theta0 = io::vector_from_json(cfg.at("theta0"));
  else
    for (Index i = 0; i < d; ++i) theta0(i) = normal(rng);
  const double eta = get_or<double>(cfg, "eta", 0.5 * quadratic_stability_limit(a, q));
  const long steps = get_or<long>(cfg, "steps", 200);
  effective["eta"] = eta;
  effective["steps"] = steps;
  return run_quadratic(a, q, theta0, eta, steps);
}

Trace train_rosenbrock(const json& cfg, json& effective) {
  RosenbrockConfig rc;
  rc.a = get_or<double>(cfg, "a", rc.a);
  rc.b = get_or<double>(cfg, "b", rc.b);
  if (cfg.contains("start")) rc.start = io::vector_from_json(cfg.at("start"));
  rc.ema = get_or<double>(cfg, "ema", rc.ema);
  rc.eta = get_or<double>(cfg, "eta", rc.eta);
  rc.steps = get_or<long>(cfg, "steps", rc.steps);
  if (cfg.contains("family")) {
    json r = cfg;
    if (!r.contains("budget") && r.at("family") == "diagonal") r["budget"] = 1e-6;
    rc.region = region_from_json(r, 2);
  }
  effective["family"] = family_name(rc.region);
  return run_rosenbrock(rc);
}

Trace train_mlp(const json& cfg, std::uint64_t seed) {
  MlpConfig mc;
  mc.seed = seed;
  mc.input_dim = get_or<Index>(cfg, "input_dim", mc.input_dim);
  mc.hidden = get_or<Index>(cfg, "hidden", mc.hidden);
  mc.samples = get_or<Index>(cfg, "samples", mc.samples);
  mc.separation = get_or<double>(cfg, "separation", mc.separation);
  mc.batch = get_or<Index>(cfg, "batch", mc.batch);
  mc.steps = get_or<long>(cfg, "steps", mc.steps);
  mc.eta = get_or<double>(cfg, "eta", mc.eta);
  mc.eps = get_or<double>(cfg, "eps", mc.eps);
  mc.optimizer = get_or<std::string>(cfg, "optimizer", mc.optimizer);
  if (cfg.contains("candidates")) mc.candidates = candidates_from_json(cfg.at("candidates"));
  mc.switch_config = switch_config_from_json(cfg);
  return run_mlp_switch(mc);
}

int run_train(const TrainArgs& a, std::ostream& out, const Logger& log) {
  json cfg = a.config.empty() ? json::object() : load_json(a.config);
  require(cfg.is_object(), ErrorKind::ConfigError, "train config must be a JSON object");
  if (!a.kind.empty()) cfg["kind"] = a.kind;
  if (a.seed) cfg["seed"] = *a.seed;
  require(cfg.contains("kind"), ErrorKind::ConfigError, "train needs a kind (quadratic|rosenbrock|mlp-switch)");
  const std::string kind = get_or<std::string>(cfg, "kind", "");
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  cfg["seed"] = seed;

  json effective = json::object();
  Trace trace;
  if (kind == "quadratic") trace = train_quadratic(cfg, seed, effective);
  else if (kind == "rosenbrock") trace = train_rosenbrock(cfg, effective);
  else if (kind == "mlp-switch") trace = train_mlp(cfg, seed);
  else fail(ErrorKind::ConfigError, "unknown train kind '" + kind + "'");

  const std::string hash = io::fnv1a_hex(cfg.dump());
  json manifest = {{"kind", kind},
                   {"config", cfg},
                   {"config_hash", hash},
                   {"seed", seed},
                   {"steps", trace.steps},
                   {"final_loss", trace.loss.empty() ? json(nullptr) : json(trace.loss.back())},
                   {"resolved", effective},
                   {"files", {"trace.csv"}}};
  if (a.out.empty()) {
    out << trace_csv(trace);
  } else {
    fs::create_directories(a.out);
    io::write_text((fs::path(a.out) / "trace.csv").string(), trace_csv(trace));
    io::write_text((fs::path(a.out) / "manifest.json").string(), io::dump(manifest));
  }
  log.info("train " + kind + " done, config " + hash);
  return 0;
}

struct SwitchDemoArgs {
  std::string stream, config, out;
};

int run_switch_demo(const SwitchDemoArgs& a, std::ostream& out, const Logger& log) {
  const json cfg = load_json(a.config);
  require(cfg.is_object(), ErrorKind::ConfigError, "switch config must be a JSON object");
  const std::string opt = get_or<std::string>(cfg, "optimizer", "sgdm");
  require(cfg.contains("candidates"), ErrorKind::ConfigError, "switch config needs \"candidates\"");
  const auto candidates = candidates_from_json(cfg.at("candidates"));
  const double eta = get_or<double>(cfg, "eta", 0.01);
  const double eps = get_or<double>(cfg, "eps", 1e-8);
  const SwitchConfig sc = switch_config_from_json(cfg);
  const MatrixXd rows = io::matrix_from_csv(io::read_text(a.stream));
  const Index dim = rows.cols();

  std::vector<double> betas;
  for (const auto& c : candidates) betas.push_back(c.beta1);
  std::vector<StepRecord<double>> records;
  if (opt == "sgdm" || opt == "adam") {
    auto state = opt == "sgdm" ? make_sgdm_state(betas, dim, sc) : make_adam_state(candidates, dim, sc);
    for (Index n = 0; n < rows.rows(); ++n) {
      const VectorXd g = rows.row(n).transpose();
      auto r = opt == "sgdm" ? sgdm_switch_step(std::move(state), g, eta) : adam_switch_step(std::move(state), g, eta, eps);
      state = std::move(r.state);
      records.push_back(std::move(r.record));
    }
  } else if (opt == "muon") {
    require(cfg.contains("shape") && cfg.at("shape").is_array() && cfg.at("shape").size() == 2, ErrorKind::ConfigError,
            "muon needs \"shape\": [rows, cols]");
    const Index p = cfg.at("shape")[0].get<Index>(), q = cfg.at("shape")[1].get<Index>();
    require(p >= 1 && q >= 1 && p * q == dim, ErrorKind::ConfigError, "shape does not match stream width");
    auto state = make_muon_state(betas, p, q, sc);
    for (Index n = 0; n < rows.rows(); ++n) {
      const VectorXd flat = rows.row(n).transpose();
      const MatrixXd g = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          flat.data(), p, q);
      auto r = muon_switch_step(std::move(state), g, eta);
      state = std::move(r.state);
      records.push_back(std::move(r.record));
    }
  } else {
    fail(ErrorKind::ConfigError, "optimizer must be sgdm, adam or muon");
  }
  log.info("switch-demo processed " + std::to_string(records.size()) + " steps");
  emit(a.out, io::step_records_csv(records), out);
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Logger log(err);
  CLI::App app{"greedy-optimal optimizers from gradient statistics", "greedyopt"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "stateless closed form from a moment file");
  add_region_flags(solve_cmd, solve_args.region, true);
  solve_cmd->add_option("--sigma", solve_args.sigma, "moment matrix (JSON or CSV)")->required();
  solve_cmd->add_option("--out", solve_args.out, "output path (default stdout)");

  SolveDynamicArgs dyn_args;
  auto* dyn_cmd = app.add_subcommand("solve-dynamic", "per-lag or global closed form from lag moments");
  add_region_flags(dyn_cmd, dyn_args.region, false);
  dyn_cmd->add_option("--moments", dyn_args.moments, "lag moments JSON")->required();
  dyn_cmd->add_flag("--global", dyn_args.global, "single Frobenius budget over the whole filter");
  dyn_cmd->add_option("--out", dyn_args.out, "output path (default stdout)");

  CertifyArgs cert_args;
  auto* cert_cmd = app.add_subcommand("certify", "closed form vs projected-gradient oracle");
  add_region_flags(cert_cmd, cert_args.region, true);
  cert_cmd->add_option("--sigma", cert_args.sigma, "certify this moment instead of random ones");
  cert_cmd->add_option("--dims", cert_args.dims, "dimension range a..b");
  cert_cmd->add_option("--trials", cert_args.trials, "random instances");
  cert_cmd->add_option("--seed", cert_args.seed, "RNG seed");
  cert_cmd->add_option("--iters", cert_args.iters, "oracle iterations per restart");
  cert_cmd->add_option("--restarts", cert_args.restarts, "oracle restarts");
  cert_cmd->add_option("--out", cert_args.out, "directory for report.json (default stdout)");

  EndpointArgs end_args;
  auto* end_cmd = app.add_subcommand("endpoint", "least-squares endpoint, analytic vs Euler flow");
  end_cmd->add_option("--problem", end_args.problem, "problem JSON {jac, y}")->required();
  end_cmd->add_option("--q", end_args.q, "optimizer matrix (default identity)");
  end_cmd->add_option("--step", end_args.step, "Euler step (default half the stability bound)");
  end_cmd->add_option("--tol", end_args.tol, "velocity tolerance");
  end_cmd->add_option("--max-iters", end_args.max_iters, "iteration cap");
  end_cmd->add_option("--out", end_args.out, "output path (default stdout)");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "harness runs: quadratic | rosenbrock | mlp-switch");
  train_cmd->add_option("kind", train_args.kind, "run kind (overrides config)")
      ->check(CLI::IsMember({"quadratic", "rosenbrock", "mlp-switch"}));
  train_cmd->add_option("--config", train_args.config, "run config JSON");
  train_cmd->add_option("--seed", train_args.seed, "RNG seed (overrides config)");
  train_cmd->add_option("--out", train_args.out, "output directory (default: trace CSV on stdout)");

  SwitchDemoArgs demo_args;
  auto* demo_cmd = app.add_subcommand("switch-demo", "stream gradients through a switch optimizer");
  demo_cmd->add_option("--stream", demo_args.stream, "gradient CSV, one sample per row")->required();
  demo_cmd->add_option("--config", demo_args.config, "switch config JSON")->required();
  demo_cmd->add_option("--out", demo_args.out, "step record CSV (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_args, out, log);
    if (dyn_cmd->parsed()) return run_solve_dynamic(dyn_args, out, log);
    if (cert_cmd->parsed()) return run_certify(cert_args, out, log);
    if (end_cmd->parsed()) return run_endpoint(end_args, out, log);
    if (train_cmd->parsed()) return run_train(train_args, out, log);
    if (demo_cmd->parsed()) return run_switch_demo(demo_args, out, log);
  } catch (const Error& e) {
    log.error(e.what());
    return e.is_numerical() ? 1 : 2;
  } catch (const json::exception& e) {
    log.error(std::string("JSON: ") + e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    log.error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log.error(e.what());
    return 2;
  }
  return 2;
}

}  // namespace greedyopt::cli
