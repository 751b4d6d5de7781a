#include "sysid/lti.hpp"

#include <cmath>
#include <random>

#include "sysid/random.hpp"

namespace sysid {

RationalModel::RationalModel(Vector b_, Vector f_, int nk_)
    : b(std::move(b_)), f(std::move(f_)), nk(nk_) {
  if (b.size() < 1) throw std::invalid_argument("RationalModel: b needs at least one coefficient");
  if (nk < 0) throw std::invalid_argument("RationalModel: delay nk must be nonnegative");
}

Vector RationalModel::flatten() const {
  Vector theta(num_params());
  theta << b, f;
  return theta;
}

RationalModel RationalModel::unflatten(const Vector& theta, const Orders& orders) {
  if (orders.nb < 0 || orders.nf < 0 || orders.nk < 0) {
    throw std::invalid_argument("unflatten: negative model order");
  }
  if (theta.size() != orders.num_params()) {
    throw std::invalid_argument("unflatten: parameter vector has length " + std::to_string(theta.size()) +
                                ", expected " + std::to_string(orders.num_params()));
  }
  return RationalModel(theta.head(orders.nb + 1), theta.tail(orders.nf), orders.nk);
}

double RationalModel::static_gain() const { return b.sum() / (1.0 + f.sum()); }

bool RationalModel::operator==(const RationalModel& other) const {
  return nk == other.nk && b.size() == other.b.size() && f.size() == other.f.size() && b == other.b &&
         f == other.f;
}

Dataset::Dataset(Vector u_, Vector y_) : u(std::move(u_)), y(std::move(y_)) {
  if (u.size() < 1) throw std::invalid_argument("Dataset: need at least one sample");
  if (u.size() != y.size()) throw std::invalid_argument("Dataset: u and y lengths differ");
}

namespace detail {

bool impulse_response_into(const RationalModel& model, Eigen::Ref<Vector> g, double cap) {
  const Eigen::Index T = g.size();
  const Eigen::Index nb = model.b.size() - 1;
  const Eigen::Index nf = model.f.size();
  for (Eigen::Index k = 0; k < T; ++k) {
    const Eigen::Index m = k - model.nk;
    double acc = (m >= 0 && m <= nb) ? model.b[m] : 0.0;
    const Eigen::Index imax = std::min(nf, k);
    for (Eigen::Index i = 1; i <= imax; ++i) acc -= model.f[i - 1] * g[k - i];
    if (!(std::abs(acc) <= cap)) return false;  // also catches NaN
    g[k] = acc;
  }
  return true;
}

bool jacobian_into(const RationalModel& model, const Vector& g, Eigen::Ref<Matrix> jac, double cap) {
  const Eigen::Index T = g.size();
  const Eigen::Index nb1 = model.b.size();
  const Eigen::Index nf = model.f.size();

  // Impulse response of 1/F; every b-column is a shifted copy of it.
  Vector h(T);
  RationalModel inverse_denominator(Vector::Ones(1), model.f, 0);
  if (!impulse_response_into(inverse_denominator, h, cap)) return false;
  for (Eigen::Index m = 0; m < nb1; ++m) {
    const Eigen::Index shift = model.nk + m;
    for (Eigen::Index k = 0; k < T; ++k) jac(k, m) = k >= shift ? h[k - shift] : 0.0;
  }

  // s(k) + sum_i f_i s(k-i) = -g(k-j)
  for (Eigen::Index j = 1; j <= nf; ++j) {
    auto s = jac.col(nb1 + j - 1);
    for (Eigen::Index k = 0; k < T; ++k) {
      double acc = k >= j ? -g[k - j] : 0.0;
      const Eigen::Index imax = std::min(nf, k);
      for (Eigen::Index i = 1; i <= imax; ++i) acc -= model.f[i - 1] * s[k - i];
      if (!(std::abs(acc) <= cap)) return false;
      s[k] = acc;
    }
  }
  return true;
}

}  // namespace detail

ImpulseResponse impulse_response(const RationalModel& model, int T, double cap) {
  if (T < 1) throw std::invalid_argument("impulse_response: horizon T must be >= 1");
  Vector g(T);
  if (!detail::impulse_response_into(model, g, cap)) {
    throw DivergedResponse("impulse_response: coefficient magnitude exceeded cap");
  }
  return g;
}

Matrix impulse_response_jacobian(const RationalModel& model, int T, double cap) {
  const Vector g = impulse_response(model, T, cap);
  Matrix jac(T, model.num_params());
  if (!detail::jacobian_into(model, g, jac, cap)) {
    throw DivergedResponse("impulse_response_jacobian: sensitivity magnitude exceeded cap");
  }
  return jac;
}

Matrix build_toeplitz(const Vector& u) {
  if (u.size() < 1) throw std::invalid_argument("build_toeplitz: input must be nonempty");
  const Eigen::Index n = u.size();
  Matrix H = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) H.col(j).tail(n - j) = u.head(n - j);
  return H;
}

Vector simulate(const ImpulseResponse& g, const Vector& u, const Vector& noise) {
  const Eigen::Index n = u.size();
  if (g.size() != n) throw std::invalid_argument("simulate: impulse response and input lengths differ");
  if (noise.size() != 0 && noise.size() != n) throw std::invalid_argument("simulate: noise length differs from input");
  Vector y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k <= t; ++k) acc += g[k] * u[t - k];
    y[t] = acc;
  }
  if (noise.size() != 0) y += noise;
  return y;
}

Vector sample_white_noise(int n, double variance, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_white_noise: n must be >= 1");
  if (!(variance >= 0.0)) throw std::invalid_argument("sample_white_noise: variance must be >= 0");
  Rng rng = make_rng({seed});
  return gaussian_vector(rng, n, variance);
}

}  // namespace sysid
