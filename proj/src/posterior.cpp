#include "sysid/posterior.hpp"

#include <cmath>

#include "sysid/linalg.hpp"

namespace sysid {

std::optional<Vector> PosteriorSummary::band() const {
  Vector variances;
  if (covariance) {
    variances = covariance->diagonal();
  } else {
    Eigen::LLT<Matrix> llt(weight);
    if (llt.info() != Eigen::Success) return std::nullopt;
    variances = llt.solve(Matrix::Identity(weight.rows(), weight.cols())).diagonal();
  }
  if (!variances.allFinite() || (variances.array() < 0.0).any()) return std::nullopt;
  return Vector(2.0 * variances.cwiseSqrt());
}

PosteriorSummary ls_summary(const Matrix& H, const Vector& y) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n || y.size() != n || n < 1) {
    throw std::invalid_argument("ls_summary: H must be N x N with N = length(y) >= 1");
  }
  PosteriorSummary out;
  out.weight.noalias() = H.transpose() * H;

  if (H(0, 0) != 0.0) {
    const auto lower = H.triangularView<Eigen::Lower>();
    out.mean = lower.solve(y);
    Matrix hinv = Matrix::Identity(n, n);
    lower.solveInPlace(hinv);
    Matrix cov = hinv * hinv.transpose();
    if (cov.allFinite()) out.covariance = std::move(cov);
    out.factor = WeightFactor{H, y};
  } else {
    Eigen::JacobiSVD<Matrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);  // relative to sigma_max
    out.mean = svd.solve(y);
    out.rank_deficient = svd.rank() < n;
    // The projection of y on range(H) is what the weighted risk can see.
    out.factor = WeightFactor{H, H * out.mean};
  }
  return out;
}

PosteriorSummary gaussian_posterior(const KernelMatrix& K, double lambda, const Matrix& H, const Vector& y) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n || y.size() != n || K.size() != n || n < 1) {
    throw std::invalid_argument("gaussian_posterior: K, H and y dimensions disagree");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("gaussian_posterior: lambda must be positive");

  const Matrix& k = K.cov;
  const Matrix hk = H.triangularView<Eigen::Lower>() * k;  // H K
  Matrix s = hk * H.transpose();
  s.diagonal().array() += lambda;
  const JitteredCholesky chol = cholesky_with_jitter(symmetrize(s));

  PosteriorSummary out;
  out.mean = hk.transpose() * chol.llt.solve(y);
  out.covariance = symmetrize(k - hk.transpose() * chol.llt.solve(hk));

  Matrix kinv;
  if (K.precision) {
    kinv = *K.precision;
  } else {
    const JitteredCholesky kchol = cholesky_with_jitter(k);
    kinv = kchol.llt.solve(Matrix::Identity(n, n));
  }
  out.weight = symmetrize(kinv + H.transpose() * H / lambda);
  return out;
}

}  // namespace sysid
