#pragma once

// Test-only reference computations. These deliberately take different
// numerical routes from the library (explicit inverses, determinants,
// eigendecompositions, finite differences) so they can act as oracles.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "sysid/kernel.hpp"
#include "sysid/lti.hpp"
#include "sysid/random.hpp"

namespace sysid::oracle {

/// Stable model with random poles (radius < 0.9) and N(0,1) numerator.
inline RationalModel random_stable_model(Rng& rng, const Orders& orders) {
  std::uniform_real_distribution<double> radius(0.05, 0.9), angle(0.0, std::numbers::pi);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector poly = Vector::Ones(1);
  auto multiply = [&](const Vector& fac) {
    Vector out = Vector::Zero(poly.size() + fac.size() - 1);
    for (Eigen::Index i = 0; i < poly.size(); ++i) out.segment(i, fac.size()) += poly[i] * fac;
    poly = out;
  };
  for (int k = 0; k < orders.nf / 2; ++k) {
    const double r = radius(rng), phi = angle(rng);
    multiply(Vector{{1.0, -2.0 * r * std::cos(phi), r * r}});
  }
  if (orders.nf % 2) multiply(Vector{{1.0, -radius(rng)}});
  Vector b(orders.nb + 1);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = normal(rng);
  return RationalModel(b, poly.tail(orders.nf), orders.nk);
}

inline Vector random_input(Rng& rng, int n, double min_first = 0.2) {
  Vector u = gaussian_vector(rng, n, 1.0);
  if (std::abs(u[0]) < min_first) u[0] = u[0] < 0 ? -min_first : min_first;
  return u;
}

inline Matrix random_spd(Rng& rng, int n, double ridge = 0.1) {
  Matrix a(n, n);
  for (int j = 0; j < n; ++j) a.col(j) = gaussian_vector(rng, n, 1.0);
  return a * a.transpose() / n + ridge * Matrix::Identity(n, n);
}

/// Central finite-difference Jacobian of the impulse response.
inline Matrix fd_jacobian(const RationalModel& model, int T, double step = 1e-6) {
  const Vector theta = model.flatten();
  const Orders orders = model.orders();
  Matrix jac(T, theta.size());
  for (Eigen::Index p = 0; p < theta.size(); ++p) {
    Vector plus = theta, minus = theta;
    plus[p] += step;
    minus[p] -= step;
    jac.col(p) = (impulse_response(RationalModel::unflatten(plus, orders), T) -
                  impulse_response(RationalModel::unflatten(minus, orders), T)) /
                 (2.0 * step);
  }
  return jac;
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double step = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index p = 0; p < x.size(); ++p) {
    Vector plus = x, minus = x;
    plus[p] += step;
    minus[p] -= step;
    g[p] = (f(plus) - f(minus)) / (2.0 * step);
  }
  return g;
}

/// Marginal likelihood by explicit determinant and LU solve of S = lambda I + H K H^T.
inline double dense_marginal_likelihood(const Matrix& K, double lambda, const Matrix& H, const Vector& y) {
  Matrix S = H * K * H.transpose();
  S.diagonal().array() += lambda;
  const Eigen::PartialPivLU<Matrix> lu(S);
  return -0.5 * std::log(lu.determinant()) - 0.5 * y.dot(lu.solve(y));
}

/// Same quantity through the eigendecomposition of S.
inline double eigen_marginal_likelihood(const Matrix& K, double lambda, const Matrix& H, const Vector& y) {
  Matrix S = H * K * H.transpose();
  S.diagonal().array() += lambda;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()));
  const Vector proj = eig.eigenvectors().transpose() * y;
  return -0.5 * eig.eigenvalues().array().log().sum() -
         0.5 * (proj.array().square() / eig.eigenvalues().array()).sum();
}

struct InformationForm {
  Vector mean;
  Matrix weight;
  Matrix covariance;
};

/// Gaussian posterior written literally in information form:
/// W = K^-1 + H^T H / lambda, g_bar = W^-1 H^T y / lambda, Sigma = W^-1.
inline InformationForm information_form_posterior(const Matrix& K, double lambda, const Matrix& H, const Vector& y) {
  InformationForm out;
  out.weight = K.inverse() + H.transpose() * H / lambda;
  out.covariance = out.weight.inverse();
  out.mean = out.covariance * H.transpose() * y / lambda;
  return out;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

/// Draw g ~ N(0, K_dc) via the AR(1) recursion behind the DC kernel:
/// x_1 ~ N(0,1), x_{i+1} = rho x_i + sqrt(1 - rho^2) e_i, g(i) = sqrt(c) alpha^(i/2) x_i.
inline Vector sample_dc_prior(Rng& rng, const DcHyperParams& eta, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(n);
  double x = normal(rng);
  for (int i = 1; i <= n; ++i) {
    if (i > 1) x = eta.rho * x + std::sqrt(1.0 - eta.rho * eta.rho) * normal(rng);
    g[i - 1] = std::sqrt(eta.c) * std::pow(eta.alpha, 0.5 * i) * x;
  }
  return g;
}

}  // namespace sysid::oracle
