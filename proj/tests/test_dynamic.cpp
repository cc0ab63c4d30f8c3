#include <numeric>

#include "test_util.hpp"

using namespace greedyopt;
using testutil::MatrixXd;
using testutil::VectorXd;

namespace {

MatrixXd diag(std::initializer_list<double> v) {
  VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

// Stationary AR(1) stream g[n] = rho g[n-1] + sqrt(1 - rho^2) w[n], so R[k] = rho^k I.
GradientStream<double> ar1_stream(Index d, std::size_t n, double rho, std::mt19937_64& rng) {
  GradientStream<double> s(d);
  VectorXd g = testutil::gaussian(d, 1, rng);
  for (std::size_t i = 0; i < n; ++i) {
    s.push(g);
    g = rho * g + std::sqrt(1 - rho * rho) * VectorXd(testutil::gaussian(d, 1, rng));
  }
  return s;
}

// Time average of sqrt(1 - beta^2) g[n]^T m_beta[n] along the stream.
double mean_sgdm_objective(const GradientStream<double>& s, double beta) {
  VectorXd m = VectorXd::Zero(s.dim());
  double acc = 0;
  for (const auto& g : s.samples()) {
    m = momentum_update(m, g, beta);
    acc += sgdm_objective(beta, g, m);
  }
  return acc / double(s.size());
}

}  // namespace

TEST(HilbertInner, ReducesToStatelessTrace) {
  MatrixFilter<double> a({MatrixXd::Identity(2, 2)});
  LagMoments<double> r({diag({3, 1})});
  EXPECT_DOUBLE_EQ(hilbert_inner(a, r), 4);
}

TEST(HilbertInner, DisjointSupportIsOrthogonal) {
  MatrixFilter<double> a({MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2)});
  MatrixFilter<double> b({MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2)});
  EXPECT_EQ(hilbert_inner(a, b), 0);
}

TEST(HilbertInner, DimensionMismatch) {
  MatrixFilter<double> a({MatrixXd::Identity(2, 2)});
  MatrixFilter<double> b({MatrixXd::Identity(3, 3)});
  testutil::expect_error([&] { hilbert_inner(a, b); }, ErrorKind::DimensionMismatch);
}

// eta = 1, beta = 0.5, P = I_2: (1 - beta)^2 / (1 - beta^2) * Tr(I_2) = 2/3.
TEST(OnePole, SquaredNormGeometricSeries) {
  OnePoleSpec<double> spec{1.0, 0.5, MatrixXd::Identity(2, 2)};
  EXPECT_NEAR(one_pole_norm_sq(spec), 2.0 / 3.0, 1e-15);
  auto q = one_pole_response(spec, 200);
  EXPECT_NEAR(hilbert_inner(q, q), 2.0 / 3.0, 1e-10);
}

TEST(OnePole, Taps) {
  auto q = one_pole_response(OnePoleSpec<double>{2.0, 0.5, MatrixXd::Identity(1, 1)}, 2);
  ASSERT_EQ(q.size(), 3u);
  EXPECT_DOUBLE_EQ(q[0](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(q[1](0, 0), 0.5);
  EXPECT_DOUBLE_EQ(q[2](0, 0), 0.25);
}

TEST(OnePole, ZeroBetaIsImpulse) {
  auto q = one_pole_response(OnePoleSpec<double>{1.5, 0.0, diag({1, 2})}, 3);
  EXPECT_EQ(q[0], 1.5 * diag({1, 2}));
  for (std::size_t k = 1; k < q.size(); ++k) EXPECT_TRUE(q[k].isZero(0));
}

TEST(OnePole, TruncatedNorm) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 20; ++t) {
    const double eta = testutil::uniform(rng, 0.1, 3), beta = testutil::uniform(rng, 0.01, 0.95);
    const Index k = testutil::uniform_int(rng, 0, 40);
    MatrixXd p = testutil::random_psd(3, rng);
    OnePoleSpec<double> spec{eta, beta, p};
    auto q = one_pole_response(spec, k);
    const double expected = one_pole_norm_sq(spec) * (1 - std::pow(beta, 2.0 * double(k + 1)));
    EXPECT_NEAR(std::pow(hilbert_norm(q), 2), expected, 1e-12 * (1 + expected));
  }
}

TEST(OnePole, InvalidSpec) {
  testutil::expect_error([] { one_pole_response(OnePoleSpec<double>{1, 1.0, MatrixXd::Identity(1, 1)}, 2); },
                         ErrorKind::InvalidBudget);
  testutil::expect_error([] { one_pole_response(OnePoleSpec<double>{-1, 0.5, MatrixXd::Identity(1, 1)}, 2); },
                         ErrorKind::InvalidBudget);
}

TEST(SolveDynamic, LagZeroReduction) {
  LagMoments<double> r({diag({3, 1})});
  TrustRegion<double> region = Spectral<double>{1.5, 1.0};
  auto dyn = solve_dynamic(std::vector<TrustRegion<double>>{region}, r);
  auto st = solve(region, MomentMatrix<double>(diag({3, 1})));
  ASSERT_EQ(dyn.filter.size(), 1u);
  EXPECT_EQ(dyn.filter[0], st.q);
  EXPECT_EQ(dyn.power, st.power);
}

TEST(SolveDynamic, GlobalFrobeniusExample) {
  LagMoments<double> r({diag({1, 0}), diag({0, 1})});
  auto dyn = solve_dynamic(GlobalFrobenius<double>{1}, r);
  EXPECT_LE((dyn.filter[0] - diag({1, 0}) / std::sqrt(2.0)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((dyn.filter[1] - diag({0, 1}) / std::sqrt(2.0)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(dyn.power, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(hilbert_norm(dyn.filter), 1.0, 1e-15);
}

TEST(SolveDynamic, ZeroMoments) {
  LagMoments<double> r({MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)});
  auto g = solve_dynamic(GlobalFrobenius<double>{1}, r);
  EXPECT_EQ(g.power, 0);
  EXPECT_EQ(hilbert_norm(g.filter), 0);
  auto p = solve_dynamic(std::vector<TrustRegion<double>>{Lyapunov<double>{2}}, r);
  EXPECT_EQ(p.power, 0);
  EXPECT_EQ(hilbert_norm(p.filter), 0);
}

TEST(SolveDynamic, Errors) {
  LagMoments<double> r({diag({1, 1}), diag({1, 1})});
  testutil::expect_error([&] { solve_dynamic(GlobalFrobenius<double>{0}, r); }, ErrorKind::InvalidBudget);
  std::vector<TrustRegion<double>> three(3, Frobenius<double>{1});
  testutil::expect_error([&] { solve_dynamic(three, r); }, ErrorKind::DimensionMismatch);
}

TEST(SolveDynamicProperty, LagDecoupling) {
  std::mt19937_64 rng(52);
  for (int f = 1; f < 4; ++f) {
    std::vector<MatrixXd> lags;
    std::vector<TrustRegion<double>> regions;
    for (int k = 0; k < 4; ++k) {
      lags.push_back(testutil::random_psd(4, rng));
      regions.push_back(testutil::random_region(f, 4, rng));
    }
    auto dyn = solve_dynamic(regions, LagMoments<double>(lags));
    for (std::size_t k = 0; k < lags.size(); ++k) {
      auto st = solve(regions[k], psd_project(lags[k]));
      EXPECT_LE((dyn.filter[k] - st.q).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(SolveDynamicProperty, GlobalFrobeniusBeatsOnePoleCone) {
  std::mt19937_64 rng(53);
  auto s = ar1_stream(3, 4000, 0.7, rng);
  auto r = estimate_lag_moments(s, 30);
  auto best = solve_dynamic(GlobalFrobenius<double>{1}, r);
  for (double beta : {0.1, 0.5, 0.7, 0.9}) {
    OnePoleSpec<double> spec{1.0, beta, MatrixXd::Identity(3, 3)};
    auto q = one_pole_response(spec, 30);
    const double scale = 1.0 / hilbert_norm(q);
    EXPECT_LE(scale * hilbert_inner(q, r), best.power + 1e-12);
  }
}

TEST(HilbertPower, TimeAverageMatchesLagMoments) {
  std::mt19937_64 rng(54);
  const double rho = 0.5;
  const std::size_t n = 40000;
  auto s = ar1_stream(2, n, rho, rng);
  auto q = one_pole_response(OnePoleSpec<double>{1.0, 0.6, MatrixXd::Identity(2, 2)}, 20);

  const std::size_t burn = q.size();
  std::vector<double> samples;
  for (std::size_t i = burn; i < n; ++i) samples.push_back(s[i].dot(filter_output(q, s, i)));
  // Batch means for the standard error of a correlated series.
  const std::size_t batches = 40, per = samples.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b)
    means[b] = std::accumulate(samples.begin() + long(b * per), samples.begin() + long((b + 1) * per), 0.0) / per;
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / double(batches);
  double var = 0;
  for (double m : means) var += (m - mean) * (m - mean);
  const double se = std::sqrt(var / double(batches - 1) / double(batches));

  std::vector<MatrixXd> truth;
  for (Index k = 0; k <= 20; ++k) truth.push_back(std::pow(rho, double(k)) * MatrixXd::Identity(2, 2));
  EXPECT_NEAR(mean, hilbert_inner(q, LagMoments<double>(truth)), 3 * se);
  EXPECT_NEAR(mean, hilbert_inner(q, estimate_lag_moments(s, 20)), 3 * se);
}

TEST(Sgdm, ConstantStreamIncreasingInBeta) {
  VectorXd g = VectorXd::Unit(3, 1);
  auto j = [&](double beta) {
    VectorXd m = VectorXd::Zero(3);
    for (int n = 0; n < 5000; ++n) m = momentum_update(m, g, beta);
    return sgdm_objective(beta, g, m);
  };
  EXPECT_NEAR(j(0.99), std::sqrt(1.99 / 0.01), 1e-9);
  EXPECT_NEAR(j(0.01), std::sqrt(1.01 / 0.99), 1e-12);
  EXPECT_NEAR(j(0.99) / j(0.01), std::sqrt(199.0 * 0.99 / 1.01), 1e-9);
  double prev = 0;
  for (double beta = 0.05; beta < 0.99; beta += 0.05) {
    EXPECT_GT(j(beta), prev);
    prev = j(beta);
  }
}

TEST(Sgdm, AlternatingStreamDecreasingInBeta) {
  VectorXd g = VectorXd::Unit(2, 0);
  auto j = [&](double beta) {
    VectorXd m = VectorXd::Zero(2), gn;
    for (int n = 0; n < 4000; ++n) {
      gn = (n % 2 ? -1.0 : 1.0) * g;
      m = momentum_update(m, gn, beta);
    }
    return sgdm_objective(beta, gn, m);
  };
  for (double beta : {0.1, 0.5, 0.9}) EXPECT_NEAR(j(beta), std::sqrt((1 - beta) / (1 + beta)), 1e-12);
  EXPECT_GT(j(0.01), j(0.99));
}

TEST(Sgdm, OrthogonalMomentumGivesZero) {
  EXPECT_EQ(sgdm_objective(0.5, VectorXd(VectorXd::Unit(2, 0)), VectorXd(VectorXd::Unit(2, 1))), 0);
}

TEST(Sgdm, DimensionMismatch) {
  testutil::expect_error([] { sgdm_objective(0.5, VectorXd(VectorXd::Ones(2)), VectorXd(VectorXd::Ones(3))); },
                         ErrorKind::DimensionMismatch);
}

TEST(Sgdm, OptimalLearningRate) {
  EXPECT_NEAR(sgdm_optimal_lr(0.9, 1.0, 100), std::sqrt(0.19), 1e-15);
  EXPECT_NEAR(sgdm_optimal_lr(1e-12, 4.0, 4), 1.0, 1e-11);
  EXPECT_NEAR(sgdm_optimal_lr(0.5, 4.0, 4), std::sqrt(3.0), 1e-15);
  testutil::expect_error([] { sgdm_optimal_lr(0.5, 0.0, 4); }, ErrorKind::InvalidBudget);
  testutil::expect_error([] { sgdm_optimal_lr(1.0, 1.0, 4); }, ErrorKind::InvalidBudget);
}

TEST(SgdmProperty, ArgmaxInvariantUnderScaling) {
  std::mt19937_64 rng(55);
  auto s = ar1_stream(3, 2000, 0.4, rng);
  auto argmax = [](const GradientStream<double>& st) {
    return oracle_beta_grid<double>([&](double b) { return mean_sgdm_objective(st, b); }, 39).best_point(0, 0);
  };
  GradientStream<double> scaled(3);
  for (const auto& g : s.samples()) scaled.push(7.5 * g);
  EXPECT_EQ(argmax(s), argmax(scaled));
}

// One-pole cone: the 2-D (eta, beta) grid optimum under the Hilbert budget and
// the beta maximizing the sample SGD+Momentum objective agree within a cell.
TEST(SgdmProperty, PostProjectionMatchesGrid) {
  std::mt19937_64 rng(56);
  const Index d = 2;
  const double budget = 1.0, rho = 0.6;
  auto s = ar1_stream(d, 20000, rho, rng);
  const Index lags = 200;
  auto r = estimate_lag_moments(s, lags);

  std::vector<double> betas;
  for (int i = 1; i < 200; ++i) betas.push_back(0.005 * i);

  std::size_t closed = 0;
  double best_j = -1e300;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double j = mean_sgdm_objective(s, betas[i]);
    if (j > best_j) { best_j = j; closed = i; }
  }

  const double eta_max = 4.0 * std::sqrt(budget / double(d));
  const int eta_points = 1000000;
  std::size_t grid = 0;
  double best_p = -1e300;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    auto unit = one_pole_response(OnePoleSpec<double>{1.0, betas[i], MatrixXd::Identity(d, d)}, lags);
    const double p1 = hilbert_inner(unit, r), n1 = hilbert_inner(unit, unit);
    // Power and squared norm are linear and quadratic in eta.
    const int feasible = std::min(eta_points, int(std::floor(std::sqrt(budget / n1) / eta_max * eta_points)));
    const double p = (eta_max * feasible / eta_points) * p1;
    if (p > best_p) { best_p = p; grid = i; }
  }
  EXPECT_LE(std::abs(betas[closed] - betas[grid]), 0.005 + 1e-12);
  EXPECT_NEAR(betas[closed], rho, 0.05);
  EXPECT_GT(betas[grid], betas.front());
  EXPECT_LT(betas[grid], betas.back());
}

TEST(Adam, PlugInArithmetic) {
  VectorXd one = VectorXd::Ones(1);
  EXPECT_NEAR(adam_objective(0.5, one, one, one, 0.0), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(adam_normalization(0.5, one), std::sqrt(3.0), 1e-15);
}

TEST(Adam, ZeroGradient) {
  VectorXd z = VectorXd::Zero(3);
  EXPECT_EQ(adam_objective(0.9, z, VectorXd(VectorXd::Ones(3)), VectorXd(VectorXd::Ones(3)), 1e-8), 0);
}

TEST(Adam, ConstantStreamLargerBetaWins) {
  VectorXd g(3);
  g << 0.5, -2, 1;
  const VectorXd v = g.cwiseAbs2();
  const double small = adam_objective(0.8, g, g, v, 0.0), large = adam_objective(0.99, g, g, v, 0.0);
  EXPECT_NEAR(small / adam_normalization(0.8, VectorXd(g.cwiseAbs())), g.cwiseAbs().sum(), 1e-12);
  EXPECT_GT(large, small);
}

TEST(Adam, Errors) {
  VectorXd one = VectorXd::Ones(2);
  testutil::expect_error([&] { adam_objective(0.5, one, one, VectorXd(VectorXd::Ones(3)), 1e-8); },
                         ErrorKind::DimensionMismatch);
  testutil::expect_error([&] { adam_objective(0.5, one, one, VectorXd(VectorXd::Zero(2)), 0.0); },
                         ErrorKind::NonFinite);
  testutil::expect_error([&] { adam_objective(0.5, one, one, VectorXd(-one), 1e-8); }, ErrorKind::NonFinite);
}

TEST(Adam, OptimalLearningRate) {
  VectorXd c = VectorXd::Ones(4);
  EXPECT_NEAR(adam_optimal_lr(0.0, 4.0, c), 1.0, 1e-15);
  testutil::expect_error([&] { adam_optimal_lr(0.5, 1.0, VectorXd(VectorXd::Zero(4))); }, ErrorKind::NonPositiveCost);
}
