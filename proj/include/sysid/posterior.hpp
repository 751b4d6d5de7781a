#pragma once

#include <optional>

#include "sysid/kernel.hpp"
#include "sysid/lti.hpp"

namespace sysid {

/// W = factor^T * factor together with target = factor * mean. Lets the risk
/// be evaluated as 1/2 ||target - factor * g||^2 without ever forming
/// factor * mean in floating point, which matters when the least-squares
/// mean is huge (H nearly singular).
struct WeightFactor {
  Matrix factor;
  Vector target;
};

/// Inputs of the decision rule: mean g_bar, weight (precision) W and, when
/// it exists, the covariance Sigma.
struct PosteriorSummary {
  ImpulseResponse mean;
  Matrix weight;
  std::optional<Matrix> covariance;
  std::optional<WeightFactor> factor;
  bool rank_deficient = false;

  Eigen::Index size() const { return mean.size(); }

  /// 2 * sqrt(diag(W^-1)); empty when W is singular.
  std::optional<Vector> band() const;
};

/// Least-squares summary: g_bar = H^+ y, W = H^T H (noise variance set to 1,
/// which does not change the decision), Sigma = (H^T H)^-1 when it exists.
///
/// When u(1) != 0 H is triangular with a nonzero diagonal and is solved
/// exactly by substitution; otherwise a rank-revealing pseudoinverse with
/// singular-value cutoff 1e-10 * sigma_max is used and Sigma is absent.
PosteriorSummary ls_summary(const Matrix& H, const Vector& y);

/// Gaussian conditional of g ~ N(0, K) given y = H g + e, e ~ N(0, lambda I).
/// Mean and covariance are computed in data-space form
///   g_bar = K H^T S^-1 y,  Sigma = K - K H^T S^-1 H K,  S = lambda I + H K H^T,
/// and W = K^-1 + H^T H / lambda, using the closed-form K^-1 when available.
PosteriorSummary gaussian_posterior(const KernelMatrix& K, double lambda, const Matrix& H, const Vector& y);

}  // namespace sysid
