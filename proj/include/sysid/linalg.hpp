#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace sysid {

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;  // absolute diagonal shift that was added

  double log_determinant() const;
};

/// Cholesky of A; if that fails, of A + jitter*I with jitter = s * trace(A)/n
/// for s = 1e-10, 1e-9, ..., 1e-6. Throws FactorizationError if all fail.
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& A);

/// Symmetric square root S with S*S^T = A for PSD A (eigenvalues below
/// -1e-10 * max are rejected, small negatives are clamped to zero).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& A) { return 0.5 * (A + A.transpose()); }

}  // namespace sysid
