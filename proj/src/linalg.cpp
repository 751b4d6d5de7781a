#include "sysid/linalg.hpp"

#include <cmath>

namespace sysid {

double JitteredCholesky::log_determinant() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) throw FactorizationError("cholesky_with_jitter: matrix must be square and nonempty");
  const double scale = A.trace() / static_cast<double>(n);
  if (!std::isfinite(scale) || scale <= 0.0) {
    throw FactorizationError("cholesky_with_jitter: trace is not positive and finite");
  }
  // First attempt is unshifted; the jitter ladder only kicks in on failure.
  for (double s = 0.0; s <= 1e-6 * 1.0000001; s = (s == 0.0 ? 1e-10 : s * 10.0)) {
    JitteredCholesky out;
    out.jitter = s * scale;
    Eigen::MatrixXd shifted = A;
    shifted.diagonal().array() += out.jitter;
    out.llt.compute(shifted);
    if (out.llt.info() == Eigen::Success && out.llt.matrixLLT().diagonal().allFinite()) return out;
  }
  throw FactorizationError("cholesky_with_jitter: not positive definite after jitter escalation");
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(A));
  if (eig.info() != Eigen::Success) throw FactorizationError("psd_sqrt: eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  const double top = std::max(values.cwiseAbs().maxCoeff(), 0.0);
  if (values.minCoeff() < -1e-10 * top) throw FactorizationError("psd_sqrt: matrix is not positive semidefinite");
  values = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace sysid
