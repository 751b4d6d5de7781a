#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sysid/lti.hpp"
#include "sysid/optim.hpp"
#include "sysid/parallel.hpp"

namespace sysid {

/// DC kernel hyperparameters plus the measurement noise variance.
struct DcHyperParams {
  double c = 1.0;       // scale, > 0
  double alpha = 0.8;   // decay, in (0, 1)
  double rho = 0.5;     // neighbour correlation, in (-1, 1)
  double lambda = 1.0;  // noise variance, > 0

  bool valid() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Prior covariance of the impulse response. `precision` holds K^-1 when it
/// is known in closed form (always the case for dc_kernel).
struct KernelMatrix {
  Matrix cov;
  std::optional<Matrix> precision;

  Eigen::Index size() const { return cov.rows(); }
};

/// K(i,j) = c * alpha^((i+j)/2) * rho^|i-j| for i, j = 1..n, so K(1,1) = c*alpha.
KernelMatrix dc_kernel(const DcHyperParams& eta, int n);

/// Closed-form inverse of the DC kernel. With D = diag(alpha^(i/2)) and R the
/// AR(1) correlation rho^|i-j|, K = c D R D and R^-1 is tridiagonal.
Matrix dc_precision(const DcHyperParams& eta, int n);

/// ln det K(eta) = n ln c + ln(alpha) n(n+1)/2 + (n-1) ln(1 - rho^2).
double dc_log_determinant(const DcHyperParams& eta, int n);

/// Marginal log-likelihood of y with the impulse response integrated out:
///   -1/2 ln det(lambda I + H K H^T) - 1/2 y^T (lambda I + H K H^T)^-1 y
/// without the -N/2 ln(2 pi) constant. K is built at n = N.
double marginal_log_likelihood(const DcHyperParams& eta, const Matrix& H, const Vector& y);

/// Precomputed data products for repeated likelihood evaluations.
class MarginalLikelihood {
 public:
  MarginalLikelihood(const Matrix& H, const Vector& y);

  double value(const DcHyperParams& eta) const;

  /// Value and gradient with respect to (log c, logit alpha, artanh rho, log lambda).
  double value_and_gradient(const DcHyperParams& eta, Eigen::Vector4d& grad) const;

  int size() const { return static_cast<int>(hty_.size()); }

 private:
  double evaluate(const DcHyperParams& eta, Eigen::Vector4d* grad) const;

  Matrix hth_;
  Vector hty_;
  Matrix h_;
  Vector y_;
};

/// Unconstrained coordinates (log c, logit alpha, artanh rho, log lambda).
Eigen::Vector4d to_unconstrained(const DcHyperParams& eta);
DcHyperParams from_unconstrained(const Eigen::Vector4d& x);

struct TunerOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;     // gradient tolerance in unconstrained coordinates
  int restarts = 4;            // perturbed restarts in addition to the init
  double perturbation = 0.5;   // std-dev of restart offsets in unconstrained coordinates
  bool pin_lambda = false;     // keep init.lambda fixed
  std::uint64_t seed = 0;
};

struct TuneStart {
  int index = 0;
  DcHyperParams init;
  DcHyperParams result;
  double log_likelihood = 0.0;
  int iterations = 0;
  StopReason reason = StopReason::MaxIterations;
};

struct TuneResult {
  DcHyperParams params;
  double log_likelihood = 0.0;
  double init_log_likelihood = 0.0;
  std::vector<TuneStart> starts;
};

/// Empirical-Bayes tuning: quasi-Newton ascent on the marginal likelihood from
/// `init` and `opts.restarts` perturbed copies of it; the highest likelihood
/// wins, ties going to the lowest start index. Never returns a point worse
/// than `init`.
TuneResult tune_hyperparameters(const Matrix& H, const Vector& y, const DcHyperParams& init,
                                const TunerOptions& opts = {}, Exec exec = Exec::Parallel);

}  // namespace sysid
