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

VectorXd vec(std::initializer_list<double> v) {
  VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d;
}

double power(const TrustRegion<double>& r, const MatrixXd& s) { return solve(r, MomentMatrix<double>(s)).power; }

constexpr int kFamilies = 4;

}  // namespace

TEST(LearningPower, Trace) {
  EXPECT_DOUBLE_EQ(learning_power(MatrixXd::Identity(2, 2), MomentMatrix<double>(diag({3, 1}))), 4);
  EXPECT_DOUBLE_EQ(learning_power(MatrixXd::Zero(2, 2), MomentMatrix<double>(diag({3, 1}))), 0);
  EXPECT_DOUBLE_EQ(learning_power(diag({2, 1}), MomentMatrix<double>(diag({3, 1}))), 7);
}

TEST(LearningPower, DimensionMismatch) {
  testutil::expect_error([] { learning_power(MatrixXd::Identity(3, 3), MomentMatrix<double>(diag({3, 1}))); },
                         ErrorKind::DimensionMismatch);
}

TEST(WaterFill, FractionalSlot) {
  EXPECT_EQ(water_fill(vec({3, 2, 1}), 1.5, 1.0), vec({1, 0.5, 0}));
}

TEST(WaterFill, CapsSaturate) {
  EXPECT_EQ(water_fill(vec({3, 2, 1}), 5.0, 1.0), vec({1, 1, 1}));
}

TEST(WaterFill, IntegralRatioHasEmptySlot) {
  EXPECT_EQ(water_fill(vec({3, 2, 1}), 2.0, 1.0), vec({1, 1, 0}));
}

TEST(WaterFill, TotalIsMinOfBudgetAndCaps) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const Index d = testutil::uniform_int(rng, 1, 8);
    const double tau = testutil::uniform(rng, 0.1, 10), lambda = testutil::uniform(rng, 0.1, 3);
    VectorXd s = VectorXd::LinSpaced(d, double(d), 1.0);
    EXPECT_NEAR(water_fill(s, tau, lambda).sum(), std::min(tau, double(d) * lambda), 1e-12);
  }
}

TEST(WaterFill, InvalidBudget) {
  testutil::expect_error([] { water_fill(vec({1, 0}), 0.0, 1.0); }, ErrorKind::InvalidBudget);
  testutil::expect_error([] { water_fill(vec({1, 0}), 1.0, -1.0); }, ErrorKind::InvalidBudget);
}

TEST(Solve, FrobeniusExample) {
  auto sol = solve(TrustRegion<double>(Frobenius<double>{4}), MomentMatrix<double>(diag({3, 1})));
  EXPECT_LE((sol.q - (2 / std::sqrt(10.0)) * diag({3, 1})).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(sol.power, 2 * std::sqrt(10.0), 1e-14);
}

TEST(Solve, FrobeniusIsotropic) {
  auto sol = solve(TrustRegion<double>(Frobenius<double>{1}), MomentMatrix<double>(MatrixXd::Identity(2, 2)));
  EXPECT_LE((sol.q - MatrixXd::Identity(2, 2) / std::sqrt(2.0)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(sol.power, std::sqrt(2.0), 1e-15);
}

TEST(Solve, LyapunovExample) {
  auto sol = solve(TrustRegion<double>(Lyapunov<double>{5}), MomentMatrix<double>(diag({4, 1, 0})));
  EXPECT_LE((sol.q - diag({1, 1, 0})).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(sol.power, 5, 1e-14);
}

TEST(Solve, DiagonalExample) {
  auto sol = solve(TrustRegion<double>(Diagonal<double>{2, vec({4, 1})}), MomentMatrix<double>(diag({2, 1})));
  EXPECT_LE((sol.q - diag({0.5, 1})).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(sol.power, 2, 1e-15);
}

TEST(Solve, DiagonalIgnoresOffDiagonal) {
  MatrixXd s(2, 2);
  s << 2, 0.7, 0.7, 1;
  auto sol = solve(TrustRegion<double>(Diagonal<double>{2, vec({4, 1})}), MomentMatrix<double>(s));
  EXPECT_LE((sol.q - diag({0.5, 1})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Solve, SpectralExample) {
  auto sol = solve(TrustRegion<double>(Spectral<double>{1.5, 1}), MomentMatrix<double>(diag({1, 3, 2})));
  EXPECT_LE((sol.q - diag({0, 1, 0.5})).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(sol.power, 4, 1e-14);
}

TEST(Solve, ZeroMomentGivesZeroForEveryFamily) {
  std::mt19937_64 rng(1);
  for (int f = 0; f < kFamilies; ++f) {
    auto sol = solve(testutil::random_region(f, 3, rng), MomentMatrix<double>(MatrixXd::Zero(3, 3)));
    EXPECT_TRUE(sol.q.isZero(0));
    EXPECT_EQ(sol.power, 0.0);
  }
}

TEST(Solve, Errors) {
  testutil::expect_error([] { solve(TrustRegion<double>(Frobenius<double>{1}), MomentMatrix<double>(diag({1, -1}))); },
                         ErrorKind::NonPSDInput);
  testutil::expect_error([] { solve(TrustRegion<double>(Frobenius<double>{0}), MomentMatrix<double>(diag({1, 1}))); },
                         ErrorKind::InvalidBudget);
  testutil::expect_error(
      [] { solve(TrustRegion<double>(Spectral<double>{1, 0}), MomentMatrix<double>(diag({1, 1}))); },
      ErrorKind::InvalidBudget);
  testutil::expect_error(
      [] { solve(TrustRegion<double>(Diagonal<double>{1, vec({1})}), MomentMatrix<double>(diag({1, 1}))); },
      ErrorKind::DimensionMismatch);
  testutil::expect_error(
      [] { solve(TrustRegion<double>(Diagonal<double>{1, vec({1, 0})}), MomentMatrix<double>(diag({1, 1}))); },
      ErrorKind::InvalidBudget);
}

TEST(SolveProperty, FeasiblePsdAndPowerConsistent) {
  std::mt19937_64 rng(22);
  for (int f = 0; f < kFamilies; ++f) {
    for (int t = 0; t < 50; ++t) {
      const Index d = testutil::uniform_int(rng, 1, 7);
      MomentMatrix<double> s(testutil::random_psd(d, rng));
      auto region = testutil::random_region(f, d, rng);
      auto sol = solve(region, s);
      EXPECT_LE(constraint_violation(region, sol.q, s), 1e-10 * (1 + sol.q.norm())) << family_name(region);
      EXPECT_NEAR(sol.power, learning_power(sol.q, s), 1e-10 * (1 + sol.power));
      EXPECT_GE(sol.power, 0);
    }
  }
}

TEST(SolveProperty, OrderPreservation) {
  std::mt19937_64 rng(23);
  for (int f = 0; f < kFamilies; ++f) {
    for (int t = 0; t < 50; ++t) {
      const Index d = testutil::uniform_int(rng, 1, 6);
      MatrixXd s2 = testutil::random_psd(d, rng);
      MatrixXd delta = testutil::gaussian(d, 1, rng);
      auto region = testutil::random_region(f, d, rng);
      const double p1 = power(region, s2 + delta * delta.transpose());
      const double p2 = power(region, s2);
      EXPECT_GE(p1, p2 - 1e-10 * (1 + p2)) << family_name(region);
    }
  }
}

TEST(SolveProperty, HomogeneityAndConvexity) {
  std::mt19937_64 rng(24);
  for (int f : {0, 1, 3}) {
    for (int t = 0; t < 50; ++t) {
      const Index d = testutil::uniform_int(rng, 1, 6);
      MatrixXd s1 = testutil::random_psd(d, rng), s2 = testutil::random_psd(d, rng);
      auto region = testutil::random_region(f, d, rng);
      const double scale = testutil::uniform(rng, 0, 5);
      const double p1 = power(region, s1), p2 = power(region, s2);
      EXPECT_NEAR(power(region, scale * s1), scale * p1, 1e-10 * (1 + scale * p1)) << family_name(region);
      EXPECT_LE(power(region, 0.5 * s1 + 0.5 * s2), 0.5 * p1 + 0.5 * p2 + 1e-10) << family_name(region);
    }
  }
}

// The Lyapunov region measures Q in the metric of the moment it is solved
// for, so its optimal power is homogeneous of degree 1/2 and concave.
TEST(SolveProperty, LyapunovHalfHomogeneous) {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 50; ++t) {
    const Index d = testutil::uniform_int(rng, 1, 6);
    MatrixXd s1 = testutil::random_psd(d, rng, d), s2 = testutil::random_psd(d, rng, d);
    TrustRegion<double> region = Lyapunov<double>{testutil::uniform(rng, 0.5, 5)};
    const double scale = testutil::uniform(rng, 0.1, 5);
    const double p1 = power(region, s1), p2 = power(region, s2);
    EXPECT_NEAR(power(region, scale * s1), std::sqrt(scale) * p1, 1e-10 * (1 + p1));
    EXPECT_GE(power(region, 0.5 * s1 + 0.5 * s2), 0.5 * p1 + 0.5 * p2 - 1e-10);
  }
}

TEST(SolveProperty, FrobeniusLipschitz) {
  std::mt19937_64 rng(26);
  for (int t = 0; t < 100; ++t) {
    const Index d = testutil::uniform_int(rng, 1, 6);
    MatrixXd a = testutil::random_psd(d, rng), b = testutil::random_psd(d, rng);
    const double budget = testutil::uniform(rng, 0.5, 5);
    TrustRegion<double> region = Frobenius<double>{budget};
    EXPECT_LE(std::abs(power(region, a) - power(region, b)), std::sqrt(budget) * (a - b).norm() + 1e-12);
  }
}

TEST(SolveProperty, Commutativity) {
  std::mt19937_64 rng(27);
  for (int f = 0; f < kFamilies; ++f) {
    for (int t = 0; t < 25; ++t) {
      const Index d = testutil::uniform_int(rng, 1, 8);
      MatrixXd s = testutil::random_psd(d, rng);
      if (f == 3) s = MatrixXd(s.diagonal().asDiagonal());  // diagonal family commutes with diagonal moments
      auto region = testutil::random_region(f, d, rng);
      auto sol = solve(region, MomentMatrix<double>(s));
      const MatrixXd comm = sol.q * s - s * sol.q;
      EXPECT_LE(comm.norm(), 1e-10 * sol.q.norm() * s.norm() + 1e-300) << family_name(region);
    }
  }
}

TEST(PolarGauge, EqualsSolvePowerOnPsd) {
  EXPECT_NEAR(polar_gauge(TrustRegion<double>(Frobenius<double>{4}), diag({3, 1})), 2 * std::sqrt(10.0), 1e-14);
  std::mt19937_64 rng(28);
  for (int f = 0; f < kFamilies; ++f) {
    const Index d = 4;
    MatrixXd s = testutil::random_psd(d, rng);
    auto region = testutil::random_region(f, d, rng);
    EXPECT_NEAR(polar_gauge(region, s), power(region, s), 1e-10 * (1 + power(region, s)));
  }
}

TEST(PolarGauge, ZeroAtOrigin) {
  std::mt19937_64 rng(29);
  for (int f = 0; f < kFamilies; ++f) EXPECT_EQ(polar_gauge(testutil::random_region(f, 3, rng), MatrixXd::Zero(3, 3)), 0);
}

TEST(PolarGauge, Homogeneity) {
  std::mt19937_64 rng(30);
  const MatrixXd m = diag({1, 2});
  for (int f : {0, 1, 3}) {
    auto region = testutil::random_region(f, 2, rng);
    EXPECT_NEAR(polar_gauge(region, MatrixXd(2 * m)), 2 * polar_gauge(region, m), 1e-12);
  }
  TrustRegion<double> lyap = Lyapunov<double>{3};
  EXPECT_NEAR(polar_gauge(lyap, MatrixXd(2 * m)), std::sqrt(2.0) * polar_gauge(lyap, m), 1e-12);
}

TEST(PolarGauge, IndefiniteUsesPsdPart) {
  TrustRegion<double> frob = Frobenius<double>{4};
  EXPECT_NEAR(polar_gauge(frob, diag({3, -5})), 2 * 3, 1e-14);
  TrustRegion<double> spec = Spectral<double>{1.5, 1};
  EXPECT_NEAR(polar_gauge(spec, diag({-1, 3, 2})), 3 + 0.5 * 2, 1e-14);
  EXPECT_EQ(polar_gauge(frob, diag({-3, -5})), 0);
}
