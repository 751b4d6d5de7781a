#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sysid/experiment.hpp"
#include "sysid/lti.hpp"

using namespace sysid;

// =============================================================================
// Impulse response
// =============================================================================

TEST(ImpulseResponse, IdentitySystem) {
  const Vector g = impulse_response(RationalModel(Vector{{1.0}}, Vector(0), 0), 4);
  EXPECT_EQ(g, (Vector{{1.0, 0.0, 0.0, 0.0}}));
}

TEST(ImpulseResponse, BenchmarkSystemFirstCoefficients) {
  // g(0) = 0.41, g(1) = 1.82 g(0), g(2) = 1.82 g(1) - 2.04 g(0)
  const Vector g = impulse_response(benchmark_system(), 3);
  EXPECT_DOUBLE_EQ(g[0], 0.41);
  EXPECT_NEAR(g[1], 0.7462, 1e-15);
  EXPECT_NEAR(g[2], 1.82 * 0.7462 - 2.04 * 0.41, 1e-15);
  EXPECT_NEAR(g[2], 0.521684, 1e-12);
}

TEST(ImpulseResponse, ExampleSystemStaticGain) {
  const RationalModel m = example_system();
  EXPECT_NEAR(m.b[0], 0.72, 1e-15);
  EXPECT_NEAR(m.f[0], -1.28, 1e-15);
  EXPECT_NEAR(m.f[1], 0.64, 1e-15);
  EXPECT_NEAR(impulse_response(m, 2001).sum(), 2.0, 1e-9);
  EXPECT_NEAR(m.static_gain(), 2.0, 1e-12);
}

TEST(ImpulseResponse, StaticGainMatchesSumForStableModels) {
  Rng rng = make_rng({11});
  for (int trial = 0; trial < 10; ++trial) {
    const RationalModel m = oracle::random_stable_model(rng, {1, 3, 1});
    EXPECT_NEAR(impulse_response(m, 2000).sum(), m.static_gain(), 1e-6 * std::max(1.0, std::abs(m.static_gain())));
  }
}

TEST(ImpulseResponse, FirIsShiftedNumerator) {
  const RationalModel m(Vector{{0.5, -1.0, 2.0}}, Vector(0), 2);
  const Vector g = impulse_response(m, 7);
  EXPECT_EQ(g, (Vector{{0.0, 0.0, 0.5, -1.0, 2.0, 0.0, 0.0}}));
}

TEST(ImpulseResponse, BenchmarkSystemDecays) {
  const Vector g = impulse_response(benchmark_system(), 1000);
  EXPECT_LT(g.tail(500).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ImpulseResponse, UnstableModelReportsDivergence) {
  const RationalModel unstable(Vector{{1.0}}, Vector{{-2.0}}, 0);
  EXPECT_NO_THROW(impulse_response(unstable, 30));
  EXPECT_THROW(impulse_response(unstable, 100), DivergedResponse);
  EXPECT_THROW(impulse_response_jacobian(unstable, 100), DivergedResponse);
}

TEST(ImpulseResponse, RejectsEmptyHorizon) {
  EXPECT_THROW(impulse_response(benchmark_system(), 0), std::invalid_argument);
}

// =============================================================================
// Jacobian
// =============================================================================

TEST(Jacobian, FirIsShiftedIdentity) {
  const Matrix jac = impulse_response_jacobian(RationalModel(Vector{{0.3, -0.7}}, Vector(0), 0), 5);
  Matrix expected = Matrix::Zero(5, 2);
  expected(0, 0) = 1.0;
  expected(1, 1) = 1.0;
  EXPECT_EQ(jac, expected);
}

TEST(Jacobian, HandRecursionForFirstOrderPole) {
  // g = [1, 0.5, 0.25]; s(k) = -g(k-1) - f1 s(k-1)
  const Matrix jac = impulse_response_jacobian(RationalModel(Vector{{1.0}}, Vector{{-0.5}}, 0), 3);
  EXPECT_NEAR(jac(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(jac(1, 1), -1.0, 1e-15);
  EXPECT_NEAR(jac(2, 1), -1.0, 1e-15);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  Rng rng = make_rng({5});
  for (int trial = 0; trial < 20; ++trial) {
    const Orders orders{trial % 3, 1 + trial % 5, trial % 2};
    const RationalModel m = oracle::random_stable_model(rng, orders);
    const Matrix jac = impulse_response_jacobian(m, 50);
    const Matrix fd = oracle::fd_jacobian(m, 50);
    for (Eigen::Index p = 0; p < jac.cols(); ++p) {
      const double scale = std::max(jac.col(p).lpNorm<Eigen::Infinity>(), 1e-12);
      EXPECT_LE((jac.col(p) - fd.col(p)).lpNorm<Eigen::Infinity>() / scale, 1e-5) << "trial " << trial << " col " << p;
    }
  }
}

// =============================================================================
// Parameter layout
// =============================================================================

TEST(RationalModel, FlattenRoundTripsAndKeepsOrder) {
  const RationalModel m(Vector{{1.0, 2.0}}, Vector{{3.0, 4.0, 5.0}}, 2);
  EXPECT_EQ(m.flatten(), (Vector{{1.0, 2.0, 3.0, 4.0, 5.0}}));
  Rng rng = make_rng({3});
  for (int trial = 0; trial < 25; ++trial) {
    const Orders o{trial % 4, trial % 6, trial % 3};
    const RationalModel r = oracle::random_stable_model(rng, o);
    EXPECT_EQ(RationalModel::unflatten(r.flatten(), o), r);
  }
  EXPECT_THROW(RationalModel::unflatten(Vector::Zero(3), {0, 1, 0}), std::invalid_argument);
}

TEST(RationalModel, RejectsInvalidShapes) {
  EXPECT_THROW(RationalModel(Vector(0), Vector(0), 0), std::invalid_argument);
  EXPECT_THROW(RationalModel(Vector::Ones(1), Vector(0), -1), std::invalid_argument);
  EXPECT_THROW(Dataset(Vector::Ones(3), Vector::Ones(2)), std::invalid_argument);
}

// =============================================================================
// Toeplitz regressor and simulation
// =============================================================================

TEST(Toeplitz, SmallExamples) {
  Matrix expected(3, 3);
  expected << 1, 0, 0, 2, 1, 0, 3, 2, 1;
  EXPECT_EQ(build_toeplitz(Vector{{1.0, 2.0, 3.0}}), expected);
  EXPECT_EQ(build_toeplitz(Vector{{5.0}}), (Matrix::Constant(1, 1, 5.0)));
  const Matrix singular = build_toeplitz(Vector{{0.0, 1.0}});
  EXPECT_EQ(singular.determinant(), 0.0);
  EXPECT_THROW(build_toeplitz(Vector(0)), std::invalid_argument);
}

TEST(Toeplitz, StructureProperty) {
  Rng rng = make_rng({8});
  for (int n : {1, 2, 7, 40}) {
    const Matrix H = build_toeplitz(gaussian_vector(rng, n, 1.0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j > i) EXPECT_EQ(H(i, j), 0.0);
        if (i + 1 < n && j + 1 < n) EXPECT_EQ(H(i, j), H(i + 1, j + 1));
      }
    }
  }
}

TEST(Simulate, IdentityAndImpulse) {
  Rng rng = make_rng({4});
  const Vector u = gaussian_vector(rng, 12, 1.0);
  Vector delta = Vector::Zero(12);
  delta[0] = 1.0;
  EXPECT_EQ(simulate(delta, u), u);
  const Vector g = gaussian_vector(rng, 12, 1.0);
  EXPECT_EQ(simulate(g, delta), g);
}

TEST(Simulate, AgreesWithToeplitzProduct) {
  Rng rng = make_rng({9});
  for (int n : {1, 5, 64}) {
    const Vector u = gaussian_vector(rng, n, 1.0);
    const Vector g = impulse_response(benchmark_system(), n);
    EXPECT_LE((simulate(g, u) - build_toeplitz(u) * g).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Simulate, AddsNoiseAndChecksLengths) {
  const Vector u{{1.0, 0.0}};
  const Vector g{{1.0, 1.0}};
  EXPECT_EQ(simulate(g, u, Vector{{0.5, -0.5}}), (Vector{{1.5, 0.5}}));
  EXPECT_THROW(simulate(Vector::Ones(3), u), std::invalid_argument);
  EXPECT_THROW(simulate(g, u, Vector::Ones(3)), std::invalid_argument);
}

// =============================================================================
// White noise
// =============================================================================

TEST(WhiteNoise, ZeroVarianceIsZero) { EXPECT_TRUE(sample_white_noise(10, 0.0, 1).isZero(0.0)); }

TEST(WhiteNoise, SampleVariance) {
  const Vector e = sample_white_noise(100000, 2.0, 42);
  const double mean = e.mean();
  const double var = (e.array() - mean).square().sum() / (e.size() - 1);
  EXPECT_NEAR(var, 2.0, 0.05);
  EXPECT_NEAR(mean, 0.0, 0.02);
}

TEST(WhiteNoise, DeterministicPerSeed) {
  EXPECT_EQ(sample_white_noise(50, 1.0, 7), sample_white_noise(50, 1.0, 7));
  EXPECT_NE(sample_white_noise(50, 1.0, 7), sample_white_noise(50, 1.0, 8));
  EXPECT_THROW(sample_white_noise(0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_white_noise(3, -1.0, 1), std::invalid_argument);
}
