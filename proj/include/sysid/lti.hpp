#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sysid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Impulse-response coefficients g(0), g(1), ..., g(T-1).
using ImpulseResponse = Eigen::VectorXd;

/// Magnitude above which an impulse response is treated as diverged.
inline constexpr double kDivergenceCap = 1e12;

class DivergedResponse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Polynomial orders of an output-error model class.
struct Orders {
  int nb = 0;  // numerator degree, b has nb + 1 coefficients
  int nf = 0;  // number of denominator coefficients f_1..f_nf
  int nk = 0;  // input delay in samples

  int num_params() const { return nb + 1 + nf; }
  bool operator==(const Orders&) const = default;
};

/// G(q) = (b_0 q^-nk + ... + b_nb q^-(nk+nb)) / (1 + f_1 q^-1 + ... + f_nf q^-nf).
///
/// The flat parameter vector is [b_0..b_nb, f_1..f_nf]; the optimizer,
/// the Jacobian columns and the JSON form all use this order.
struct RationalModel {
  Vector b = Vector::Ones(1);
  Vector f = Vector(0);
  int nk = 0;

  RationalModel() = default;
  RationalModel(Vector b_, Vector f_, int nk_);

  Orders orders() const { return {static_cast<int>(b.size()) - 1, static_cast<int>(f.size()), nk}; }
  int num_params() const { return static_cast<int>(b.size() + f.size()); }

  Vector flatten() const;
  static RationalModel unflatten(const Vector& theta, const Orders& orders);

  /// B(1)/F(1).
  double static_gain() const;

  bool operator==(const RationalModel& other) const;
};

/// Input/output records at t = 1..N; u(t) = 0 for t <= 0 is implied.
struct Dataset {
  Vector u;
  Vector y;

  Dataset() = default;
  Dataset(Vector u_, Vector y_);
  int size() const { return static_cast<int>(u.size()); }
};

/// First T coefficients of the impulse response of B/F, by the long-division
/// recursion g(k) + sum_i f_i g(k-i) = b_{k-nk}.
/// Throws DivergedResponse if some |g(k)| exceeds `cap`.
ImpulseResponse impulse_response(const RationalModel& model, int T, double cap = kDivergenceCap);

/// T x num_params matrix of dg(k)/dtheta_p, columns in flat-theta order.
Matrix impulse_response_jacobian(const RationalModel& model, int T, double cap = kDivergenceCap);

namespace detail {
// Non-throwing variants used on optimizer hot paths; return false on divergence.
bool impulse_response_into(const RationalModel& model, Eigen::Ref<Vector> g, double cap);
bool jacobian_into(const RationalModel& model, const Vector& g, Eigen::Ref<Matrix> jac, double cap);
}  // namespace detail

/// N x N lower-triangular Toeplitz matrix with H(i,j) = u(i-j+1) (1-based).
Matrix build_toeplitz(const Vector& u);

/// y = H g + e, computed by direct convolution. `noise` may be empty.
Vector simulate(const ImpulseResponse& g, const Vector& u, const Vector& noise = Vector());

/// n i.i.d. N(0, variance) samples, reproducible for a given seed.
Vector sample_white_noise(int n, double variance, std::uint64_t seed);

}  // namespace sysid
