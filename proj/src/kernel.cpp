#include "sysid/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <omp.h>

#include "sysid/linalg.hpp"
#include "sysid/random.hpp"

namespace sysid {

bool DcHyperParams::valid() const {
  return std::isfinite(c) && c > 0.0 && alpha > 0.0 && alpha < 1.0 && rho > -1.0 && rho < 1.0 &&
         std::isfinite(lambda) && lambda > 0.0;
}

void DcHyperParams::validate() const {
  if (!(std::isfinite(c) && c > 0.0)) throw std::invalid_argument("DC kernel: c must be positive, got " + std::to_string(c));
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("DC kernel: alpha must lie in (0, 1), got " + std::to_string(alpha));
  if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("DC kernel: rho must lie in (-1, 1), got " + std::to_string(rho));
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw std::invalid_argument("DC kernel: lambda must be positive, got " + std::to_string(lambda));
}

KernelMatrix dc_kernel(const DcHyperParams& eta, int n) {
  eta.validate();
  if (n < 1) throw std::invalid_argument("dc_kernel: dimension must be >= 1");
  KernelMatrix out;
  out.cov.resize(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      const double v = eta.c * std::pow(eta.alpha, 0.5 * (i + j)) * std::pow(eta.rho, j - i);
      out.cov(i - 1, j - 1) = v;
      out.cov(j - 1, i - 1) = v;
    }
  }
  out.precision = dc_precision(eta, n);
  return out;
}

namespace {

// Tridiagonal R^-1 for R(i,j) = rho^|i-j|: (1/(1-rho^2)) * T with
// T = tridiag(-rho; 1, 1+rho^2, ..., 1+rho^2, 1; -rho). Returns (diag, off).
void ar1_precision(double rho, int n, Vector& diag, Vector& off) {
  const double s = 1.0 / (1.0 - rho * rho);
  diag = Vector::Constant(n, (1.0 + rho * rho) * s);
  diag[0] = s;
  diag[n - 1] = s;
  if (n == 1) diag[0] = 1.0;
  off = Vector::Constant(std::max(n - 1, 0), -rho * s);
}

// d/drho of the above.
void ar1_precision_derivative(double rho, int n, Vector& diag, Vector& off) {
  const double s = 1.0 / (1.0 - rho * rho);
  const double ds = 2.0 * rho * s * s;
  diag = Vector::Constant(n, ds * (1.0 + rho * rho) + s * 2.0 * rho);
  diag[0] = ds;
  diag[n - 1] = ds;
  if (n == 1) diag[0] = 0.0;
  off = Vector::Constant(std::max(n - 1, 0), -(ds * rho + s));
}

}  // namespace

Matrix dc_precision(const DcHyperParams& eta, int n) {
  eta.validate();
  if (n < 1) throw std::invalid_argument("dc_precision: dimension must be >= 1");
  Vector diag, off;
  ar1_precision(eta.rho, n, diag, off);
  Vector inv_scale(n);  // alpha^(-i/2), i = 1..n
  for (int i = 1; i <= n; ++i) inv_scale[i - 1] = std::pow(eta.alpha, -0.5 * i);
  Matrix P = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    P(i, i) = diag[i] * inv_scale[i] * inv_scale[i] / eta.c;
    if (i + 1 < n) {
      const double v = off[i] * inv_scale[i] * inv_scale[i + 1] / eta.c;
      P(i, i + 1) = v;
      P(i + 1, i) = v;
    }
  }
  return P;
}

double dc_log_determinant(const DcHyperParams& eta, int n) {
  eta.validate();
  const double nn = n;
  return nn * std::log(eta.c) + std::log(eta.alpha) * nn * (nn + 1.0) / 2.0 +
         (nn - 1.0) * std::log1p(-eta.rho * eta.rho);
}

MarginalLikelihood::MarginalLikelihood(const Matrix& H, const Vector& y) : h_(H), y_(y) {
  if (H.rows() != H.cols() || H.rows() != y.size() || y.size() < 1) {
    throw std::invalid_argument("marginal likelihood: H must be N x N with N = length(y) >= 1");
  }
  hth_.noalias() = H.transpose() * H;
  hty_.noalias() = H.transpose() * y;
}

double MarginalLikelihood::value(const DcHyperParams& eta) const { return evaluate(eta, nullptr); }

double MarginalLikelihood::value_and_gradient(const DcHyperParams& eta, Eigen::Vector4d& grad) const {
  return evaluate(eta, &grad);
}

// Evaluated in information form. With P = K^-1 + H^T H / lambda and
// m = P^-1 H^T y / lambda:
//   ln det S      = N ln lambda + ln det K + ln det P
//   y^T S^-1 y    = ||y - H m||^2 / lambda + m^T K^-1 m
// K^-1 is tridiagonal up to scaling, so only P needs a factorization, and
// the diagonal rescaling of P absorbs the alpha^-i growth of K^-1.
double MarginalLikelihood::evaluate(const DcHyperParams& eta, Eigen::Vector4d* grad) const {
  eta.validate();
  const int n = size();
  const double lambda = eta.lambda;
  const Matrix kinv = dc_precision(eta, n);

  Matrix P = kinv + hth_ / lambda;
  const Vector d = P.diagonal().cwiseSqrt().cwiseInverse();
  const Matrix Ps = d.asDiagonal() * P * d.asDiagonal();
  const JitteredCholesky chol = cholesky_with_jitter(Ps);

  const double logdet_p = chol.log_determinant() - 2.0 * d.array().log().sum();
  const Vector m = d.asDiagonal() * chol.llt.solve(d.asDiagonal() * (hty_ / lambda));
  const Vector r = y_ - h_.triangularView<Eigen::Lower>() * m;
  const double quad = r.squaredNorm() / lambda + m.dot(kinv * m);
  const double logdet_s = n * std::log(lambda) + dc_log_determinant(eta, n) + logdet_p;
  const double ell = -0.5 * (logdet_s + quad);
  if (grad == nullptr) return ell;

  // Posterior covariance, needed only on the tridiagonal band.
  Matrix linv = Matrix::Identity(n, n);
  chol.llt.matrixL().solveInPlace(linv);
  Vector sig_diag(n), sig_off(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) {
    sig_diag[i] = d[i] * d[i] * linv.col(i).tail(n - i).squaredNorm();
    if (i + 1 < n) sig_off[i] = d[i] * d[i + 1] * linv.col(i).tail(n - i - 1).dot(linv.col(i + 1).tail(n - i - 1));
  }

  // M = m m^T + Sigma on the band; dl/dK = 1/2 K^-1 (M - K) K^-1.
  double tr_kinv_m = 0.0, tr_kinv_sigma = 0.0, d_alpha = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m_ii = m[i] * m[i] + sig_diag[i];
    double mk_ii = m_ii * kinv(i, i);
    tr_kinv_m += kinv(i, i) * m_ii;
    tr_kinv_sigma += kinv(i, i) * sig_diag[i];
    if (i + 1 < n) {
      const double m_ij = m[i] * m[i + 1] + sig_off[i];
      tr_kinv_m += 2.0 * kinv(i, i + 1) * m_ij;
      tr_kinv_sigma += 2.0 * kinv(i, i + 1) * sig_off[i];
      mk_ii += m_ij * kinv(i + 1, i);
    }
    if (i > 0) mk_ii += (m[i] * m[i - 1] + sig_off[i - 1]) * kinv(i - 1, i);
    d_alpha += (i + 1) / (2.0 * eta.alpha) * (mk_ii - 1.0);
  }
  const double d_logc = 0.5 * (tr_kinv_m - n);

  Vector qd_diag, qd_off;
  ar1_precision_derivative(eta.rho, n, qd_diag, qd_off);
  double d_rho = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double ai = std::pow(eta.alpha, -0.5 * i);
    const double k_ii = eta.c * std::pow(eta.alpha, static_cast<double>(i));
    d_rho += (m[i - 1] * m[i - 1] + sig_diag[i - 1] - k_ii) * qd_diag[i - 1] * ai * ai;
    if (i < n) {
      const double aj = std::pow(eta.alpha, -0.5 * (i + 1));
      const double k_ij = eta.c * std::pow(eta.alpha, i + 0.5) * eta.rho;
      d_rho += 2.0 * (m[i - 1] * m[i] + sig_off[i - 1] - k_ij) * qd_off[i - 1] * ai * aj;
    }
  }
  d_rho *= -0.5 / eta.c;

  const double d_lambda = 0.5 * (r.squaredNorm() / (lambda * lambda) - tr_kinv_sigma / lambda);

  (*grad)[0] = d_logc;
  (*grad)[1] = d_alpha * eta.alpha * (1.0 - eta.alpha);
  (*grad)[2] = d_rho * (1.0 - eta.rho * eta.rho);
  (*grad)[3] = d_lambda * lambda;
  return ell;
}

double marginal_log_likelihood(const DcHyperParams& eta, const Matrix& H, const Vector& y) {
  return MarginalLikelihood(H, y).value(eta);
}

Eigen::Vector4d to_unconstrained(const DcHyperParams& eta) {
  eta.validate();
  return {std::log(eta.c), std::log(eta.alpha / (1.0 - eta.alpha)), std::atanh(eta.rho), std::log(eta.lambda)};
}

DcHyperParams from_unconstrained(const Eigen::Vector4d& x) {
  // Clamps keep the mapped values strictly inside their open intervals in double.
  const double lc = std::clamp(x[0], -60.0, 60.0);
  const double la = std::clamp(x[1], -30.0, 30.0);
  const double lr = std::clamp(x[2], -15.0, 15.0);
  const double ll = std::clamp(x[3], -60.0, 60.0);
  return {std::exp(lc), 1.0 / (1.0 + std::exp(-la)), std::tanh(lr), std::exp(ll)};
}

namespace {

TuneStart run_tuner_start(const MarginalLikelihood& ml, const Eigen::Vector4d& x0, int index,
                          const TunerOptions& opts, double pinned_lambda) {
  const int dim = opts.pin_lambda ? 3 : 4;
  auto expand = [&](const Eigen::VectorXd& z) {
    Eigen::Vector4d x;
    x.head<3>() = z.head<3>();
    x[3] = opts.pin_lambda ? std::log(pinned_lambda) : z[3];
    return x;
  };
  Objective objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* g) -> double {
    const DcHyperParams eta = from_unconstrained(expand(z));
    try {
      if (g == nullptr) return -ml.value(eta);
      Eigen::Vector4d full;
      const double v = ml.value_and_gradient(eta, full);
      *g = -full.head(dim);
      return -v;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  MinimizeOptions mo;
  mo.max_iterations = opts.max_iterations;
  mo.gradient_tolerance = opts.tolerance;
  const MinimizeResult res = minimize_bfgs(objective, x0.head(dim), mo);

  TuneStart s;
  s.index = index;
  s.init = from_unconstrained(x0);
  if (opts.pin_lambda) s.init.lambda = pinned_lambda;
  s.result = from_unconstrained(expand(res.x));
  s.log_likelihood = -res.value;
  s.iterations = res.iterations;
  s.reason = res.reason;
  return s;
}

}  // namespace

TuneResult tune_hyperparameters(const Matrix& H, const Vector& y, const DcHyperParams& init,
                                const TunerOptions& opts, Exec exec) {
  init.validate();
  if (opts.restarts < 0) throw std::invalid_argument("tune_hyperparameters: restarts must be >= 0");
  const MarginalLikelihood ml(H, y);

  TuneResult out;
  out.init_log_likelihood = ml.value(init);
  if (!std::isfinite(out.init_log_likelihood)) {
    throw std::invalid_argument("tune_hyperparameters: marginal likelihood is not finite at init");
  }

  const int total = 1 + opts.restarts;
  std::vector<Eigen::Vector4d> starts(total);
  starts[0] = to_unconstrained(init);
  for (int i = 1; i < total; ++i) {
    Rng rng = make_rng({opts.seed, static_cast<std::uint64_t>(i), 0x6b65726eULL});
    starts[i] = starts[0] + gaussian_vector(rng, 4, opts.perturbation * opts.perturbation);
    if (opts.pin_lambda) starts[i][3] = starts[0][3];
  }

  out.starts.resize(total);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < total; ++i) out.starts[i] = run_tuner_start(ml, starts[i], i, opts, init.lambda);
  } else {
    for (int i = 0; i < total; ++i) out.starts[i] = run_tuner_start(ml, starts[i], i, opts, init.lambda);
  }

  out.params = init;
  out.log_likelihood = out.init_log_likelihood;
  for (const TuneStart& s : out.starts) {
    if (std::isfinite(s.log_likelihood) && s.log_likelihood > out.log_likelihood) {
      out.log_likelihood = s.log_likelihood;
      out.params = s.result;
    }
  }
  return out;
}

}  // namespace sysid
