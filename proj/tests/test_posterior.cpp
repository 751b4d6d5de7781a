#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sysid/experiment.hpp"
#include "sysid/posterior.hpp"

using namespace sysid;

// =============================================================================
// Least-squares summary
// =============================================================================

TEST(LsSummary, NoiseFreeDataIsInterpolated) {
  Rng rng = make_rng({51});
  const int n = 20;
  const Vector u = oracle::random_input(rng, n);
  const Vector g = impulse_response(benchmark_system(), n);
  const Matrix H = build_toeplitz(u);
  const PosteriorSummary s = ls_summary(H, H * g);
  EXPECT_LE((s.mean - g).lpNorm<Eigen::Infinity>(), 1e-8);
  EXPECT_FALSE(s.rank_deficient);
  EXPECT_LE(oracle::rel_diff(s.weight, H.transpose() * H), 1e-14);
  ASSERT_TRUE(s.covariance.has_value());
  // H is typically ill conditioned; judge the inverse relative to cond(W).
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(s.weight).singularValues();
  const double cond = sv[0] / sv[n - 1];
  EXPECT_LE(oracle::rel_diff(*s.covariance * s.weight, Matrix::Identity(n, n)), 1e-13 * cond);
}

TEST(LsSummary, UnitImpulseGivesIdentity) {
  Vector u = Vector::Zero(6);
  u[0] = 1.0;
  const Vector y{{0.3, -1.0, 2.0, 0.0, 5.0, 1.5}};
  const PosteriorSummary s = ls_summary(build_toeplitz(u), y);
  EXPECT_EQ(s.mean, y);
  EXPECT_EQ(s.weight, Matrix::Identity(6, 6));
  ASSERT_TRUE(s.band().has_value());
  EXPECT_EQ(*s.band(), Vector::Constant(6, 2.0));
}

TEST(LsSummary, ZeroFirstInputIsRankDeficient) {
  const Vector u{{0.0, 1.0, 0.5, -0.3}};
  const Matrix H = build_toeplitz(u);
  const Vector y{{0.0, 1.0, 2.0, 0.5}};
  const PosteriorSummary s = ls_summary(H, y);
  EXPECT_TRUE(s.rank_deficient);
  EXPECT_FALSE(s.covariance.has_value());
  EXPECT_FALSE(s.band().has_value());
  // Minimum-norm least squares agrees with the normal equations on the range.
  EXPECT_LE((H.transpose() * (H * s.mean - y)).norm(), 1e-10);
  EXPECT_LE((s.mean - H.completeOrthogonalDecomposition().solve(y)).norm(), 1e-10);
}

TEST(LsSummary, RejectsMismatchedData) {
  EXPECT_THROW(ls_summary(Matrix::Identity(3, 3), Vector::Zero(4)), std::invalid_argument);
}

// =============================================================================
// Gaussian posterior
// =============================================================================

TEST(GaussianPosterior, LargeNoiseReturnsPrior) {
  Rng rng = make_rng({52});
  const int n = 12;
  const Matrix H = build_toeplitz(oracle::random_input(rng, n));
  const Vector y = gaussian_vector(rng, n, 1.0);
  const KernelMatrix K = dc_kernel({2.0, 0.8, 0.6, 1.0}, n);
  const PosteriorSummary s = gaussian_posterior(K, 1e12, H, y);
  EXPECT_LE(s.mean.norm(), 1e-9);
  ASSERT_TRUE(s.covariance.has_value());
  EXPECT_LE(oracle::rel_diff(*s.covariance, K.cov), 1e-9);
}

TEST(GaussianPosterior, FlatPriorMatchesLeastSquares) {
  Rng rng = make_rng({53});
  const int n = 10;
  const Matrix H = build_toeplitz(oracle::random_input(rng, n, 0.5));
  const Vector y = gaussian_vector(rng, n, 1.0);
  KernelMatrix K{1e12 * Matrix::Identity(n, n), Matrix(1e-12 * Matrix::Identity(n, n))};
  const PosteriorSummary s = gaussian_posterior(K, 1.0, H, y);
  const PosteriorSummary ls = ls_summary(H, y);
  EXPECT_LE((s.mean - ls.mean).norm() / ls.mean.norm(), 1e-4);
}

TEST(GaussianPosterior, AgreesWithInformationForm) {
  Rng rng = make_rng({54});
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 15;
    std::uniform_real_distribution<double> alpha(0.5, 0.9), rho(-0.8, 0.8), lambda(0.1, 2.0);
    const DcHyperParams eta{1.0 + trial, alpha(rng), rho(rng), lambda(rng)};
    const Matrix H = build_toeplitz(oracle::random_input(rng, n));
    const Vector y = gaussian_vector(rng, n, 1.0);
    const KernelMatrix K = dc_kernel(eta, n);
    const PosteriorSummary s = gaussian_posterior(K, eta.lambda, H, y);
    const oracle::InformationForm info = oracle::information_form_posterior(K.cov, eta.lambda, H, y);
    EXPECT_LE(oracle::rel_diff(s.mean, info.mean), 1e-8) << "trial " << trial;
    EXPECT_LE(oracle::rel_diff(*s.covariance, info.covariance), 1e-8) << "trial " << trial;
    EXPECT_LE(oracle::rel_diff(s.weight, info.weight), 1e-8) << "trial " << trial;
  }
}

TEST(GaussianPosterior, WeightInvertsCovarianceAndEncodesPrior) {
  Rng rng = make_rng({55});
  const int n = 20;
  const DcHyperParams eta{5.0, 0.85, 0.7, 0.5};
  const Matrix H = build_toeplitz(oracle::random_input(rng, n));
  const Vector y = gaussian_vector(rng, n, 1.0);
  const KernelMatrix K = dc_kernel(eta, n);
  const PosteriorSummary s = gaussian_posterior(K, eta.lambda, H, y);
  EXPECT_LE(oracle::rel_diff(s.weight * *s.covariance, Matrix::Identity(n, n)), 1e-7);
  EXPECT_LE(oracle::rel_diff(s.weight - H.transpose() * H / eta.lambda, K.cov.inverse()), 1e-8);
}

TEST(GaussianPosterior, WorksWithoutClosedFormPrecision) {
  Rng rng = make_rng({56});
  const int n = 8;
  const Matrix K = oracle::random_spd(rng, n);
  const Matrix H = build_toeplitz(oracle::random_input(rng, n));
  const Vector y = gaussian_vector(rng, n, 1.0);
  const PosteriorSummary s = gaussian_posterior(KernelMatrix{K, std::nullopt}, 0.7, H, y);
  const oracle::InformationForm info = oracle::information_form_posterior(K, 0.7, H, y);
  EXPECT_LE(oracle::rel_diff(s.mean, info.mean), 1e-8);
  EXPECT_LE(oracle::rel_diff(s.weight, info.weight), 1e-8);
}

TEST(GaussianPosterior, ShrinksTowardZero) {
  Rng rng = make_rng({57});
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 12;
    const DcHyperParams eta{3.0, 0.8, 0.5, 1.0};
    const Matrix H = build_toeplitz(oracle::random_input(rng, n));
    const Vector y = gaussian_vector(rng, n, 2.0);
    const PosteriorSummary s = gaussian_posterior(dc_kernel(eta, n), eta.lambda, H, y);
    const PosteriorSummary ls = ls_summary(H, y);
    // The posterior mean minimizes a penalized fit, so its K^-1 norm cannot exceed the LS one.
    const Matrix Kinv = *dc_kernel(eta, n).precision;
    EXPECT_LE(s.mean.dot(Kinv * s.mean), ls.mean.dot(Kinv * ls.mean) + 1e-9);
  }
}
