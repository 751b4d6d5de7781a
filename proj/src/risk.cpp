#include "sysid/risk.hpp"

#include <cmath>
#include <numbers>

#include <omp.h>

#include "sysid/linalg.hpp"

namespace sysid {

RiskSpec::RiskSpec(ImpulseResponse mean_, Matrix weight_, std::optional<Matrix> covariance_)
    : mean(std::move(mean_)), weight(std::move(weight_)), covariance(std::move(covariance_)) {
  if (weight.rows() != mean.size() || weight.cols() != mean.size()) {
    throw std::invalid_argument("RiskSpec: weight dimension must equal mean length");
  }
  if (covariance && (covariance->rows() != mean.size() || covariance->cols() != mean.size())) {
    throw std::invalid_argument("RiskSpec: covariance dimension must equal mean length");
  }
}

RiskSpec RiskSpec::from_posterior(const PosteriorSummary& summary) {
  RiskSpec spec(summary.mean, summary.weight, summary.covariance);
  spec.factor = summary.factor;
  spec.rank_deficient = summary.rank_deficient;
  return spec;
}

std::optional<double> RiskSpec::constant() const {
  if (!covariance) return std::nullopt;
  return 0.5 * (weight.cwiseProduct(*covariance)).sum();
}

namespace {

// Residual, gradient and Gauss-Newton curvature of the weighted risk for a
// fixed spec and model class. Buffers are reused across evaluations.
class RiskEvaluator {
 public:
  RiskEvaluator(const RiskSpec& spec, const Orders& orders)
      : spec_(spec), orders_(orders), g_(spec.horizon()), jac_(spec.horizon(), orders.num_params()) {}

  double value(const Vector& theta) {
    const RationalModel model = RationalModel::unflatten(theta, orders_);
    if (!detail::impulse_response_into(model, g_, kDivergenceCap)) return kDivergedObjective;
    return objective_at(g_);
  }

  // Returns false if the model diverges.
  bool linearize(const Vector& theta, double& f, Vector& grad, Matrix& curvature) {
    const RationalModel model = RationalModel::unflatten(theta, orders_);
    if (!detail::impulse_response_into(model, g_, kDivergenceCap)) return false;
    if (!detail::jacobian_into(model, g_, jac_, kDivergenceCap)) return false;
    if (spec_.factor) {
      const Matrix& F = spec_.factor->factor;
      const Vector e = F * g_ - spec_.factor->target;
      const Matrix fj = F * jac_;
      f = 0.5 * e.squaredNorm();
      grad.noalias() = fj.transpose() * e;
      curvature.noalias() = fj.transpose() * fj;
    } else {
      const Vector r = g_ - spec_.mean;
      const Vector wr = spec_.weight * r;
      const Matrix wj = spec_.weight * jac_;
      f = 0.5 * r.dot(wr);
      grad.noalias() = jac_.transpose() * wr;
      curvature.noalias() = jac_.transpose() * wj;
    }
    return std::isfinite(f) && grad.allFinite() && curvature.allFinite();
  }

  double objective_at(const Vector& g) const {
    if (spec_.factor) return 0.5 * (spec_.factor->factor * g - spec_.factor->target).squaredNorm();
    const Vector r = g - spec_.mean;
    return 0.5 * r.dot(spec_.weight * r);
  }

 private:
  const RiskSpec& spec_;
  Orders orders_;
  Vector g_;
  Matrix jac_;
};

void check_horizon(const RiskSpec& spec) {
  if (spec.horizon() < 1) throw std::invalid_argument("risk: empty spec");
  if (spec.weight.rows() != spec.horizon()) throw std::invalid_argument("risk: weight dimension must equal mean length");
}

StartReport descend(const RiskSpec& spec, const Orders& orders, const RationalModel& init, int index,
                    bool user_init, const RiskOptions& opts) {
  StartReport rep;
  rep.index = index;
  rep.user_init = user_init;
  rep.init = init;
  rep.result = init;

  RiskEvaluator eval(spec, orders);
  const Eigen::Index p = orders.num_params();
  Vector theta = init.flatten();
  double f = 0.0;
  Vector grad(p);
  Matrix curvature(p, p);
  if (!eval.linearize(theta, f, grad, curvature)) {
    rep.reason = StopReason::NonFinite;
    rep.objective = kDivergedObjective;
    return rep;
  }
  if (opts.record_trace) rep.trace.push_back(f);

  double damping = 1e-10;
  int slow_steps = 0;
  rep.reason = StopReason::MaxIterations;
  for (rep.iterations = 0; rep.iterations < opts.max_iterations; ++rep.iterations) {
    if (grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance * (1.0 + std::abs(f))) {
      rep.reason = StopReason::Gradient;
      break;
    }

    const double top = std::max(curvature.diagonal().maxCoeff(), 1e-300);
    const Vector scale = curvature.diagonal().cwiseMax(1e-12 * top);
    bool accepted = false;
    Vector theta_new(p);
    double f_new = f;
    while (!accepted && damping <= 1e10) {
      Matrix damped = curvature;
      damped.diagonal() += damping * scale;
      const Vector dir = damped.ldlt().solve(-grad);
      const double slope = grad.dot(dir);
      if (dir.allFinite() && slope < 0.0) {
        double step = 1.0;
        for (int k = 0; k < opts.max_backtracks; ++k, step *= opts.backtrack) {
          theta_new = theta + step * dir;
          f_new = eval.value(theta_new);
          if (f_new <= f + opts.armijo * step * slope) {
            accepted = true;
            break;
          }
        }
      }
      if (!accepted) damping *= 100.0;
    }
    if (!accepted) {
      rep.reason = StopReason::Stalled;
      break;
    }
    damping = std::max(damping * 0.1, 1e-12);

    const double decrease = f - f_new;
    theta = theta_new;
    if (!eval.linearize(theta, f, grad, curvature)) {
      // Accepted points have finite objective, so this is a Jacobian overflow.
      rep.reason = StopReason::Stalled;
      f = f_new;
      ++rep.iterations;
      break;
    }
    if (opts.record_trace) rep.trace.push_back(f);
    slow_steps = decrease <= 1e-14 * std::abs(f) ? slow_steps + 1 : 0;
    if (slow_steps >= 5) {
      rep.reason = StopReason::Stalled;
      ++rep.iterations;
      break;
    }
  }

  rep.result = RationalModel::unflatten(theta, orders);
  rep.objective = risk_value(rep.result, spec);
  return rep;
}

}  // namespace

double risk_value(const RationalModel& model, const RiskSpec& spec) {
  check_horizon(spec);
  Vector g(spec.horizon());
  if (!detail::impulse_response_into(model, g, kDivergenceCap)) return kDivergedObjective;
  return RiskEvaluator(spec, model.orders()).objective_at(g);
}

Vector risk_gradient(const RationalModel& model, const RiskSpec& spec) {
  check_horizon(spec);
  RiskEvaluator eval(spec, model.orders());
  double f = 0.0;
  Vector grad(model.num_params());
  Matrix curvature(model.num_params(), model.num_params());
  if (!eval.linearize(model.flatten(), f, grad, curvature)) {
    throw DivergedResponse("risk_gradient: model impulse response diverged");
  }
  return grad;
}

RationalModel random_stable_start(const RiskSpec& spec, const Orders& orders, Rng& rng) {
  std::uniform_real_distribution<double> radius(0.0, 0.95);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);

  Vector poly = Vector::Ones(1);
  auto multiply = [&poly](const Vector& factor) {
    Vector out = Vector::Zero(poly.size() + factor.size() - 1);
    for (Eigen::Index i = 0; i < poly.size(); ++i) out.segment(i, factor.size()) += poly[i] * factor;
    poly = out;
  };
  for (int k = 0; k < orders.nf / 2; ++k) {
    const double r = radius(rng);
    const double phi = angle(rng);
    multiply(Vector{{1.0, -2.0 * r * std::cos(phi), r * r}});
  }
  if (orders.nf % 2 == 1) {
    const double r = radius(rng);
    const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    multiply(Vector{{1.0, -sign * r}});
  }
  RationalModel model(Vector::Zero(orders.nb + 1), poly.tail(orders.nf), orders.nk);

  // Numerator: the risk is quadratic in b for a fixed denominator.
  const Eigen::Index n = spec.horizon();
  Matrix phi(n, orders.num_params());
  Vector g(n);
  if (detail::impulse_response_into(model, g, kDivergenceCap) && detail::jacobian_into(model, g, phi, kDivergenceCap)) {
    const Matrix basis = phi.leftCols(orders.nb + 1);
    Vector b;
    if (spec.factor) {
      b = (spec.factor->factor * basis).completeOrthogonalDecomposition().solve(spec.factor->target);
    } else {
      const Matrix wb = spec.weight * basis;
      b = (basis.transpose() * wb).completeOrthogonalDecomposition().solve(wb.transpose() * spec.mean);
    }
    if (b.allFinite()) model.b = b;
  }
  if (!model.b.allFinite() || model.b.isZero(0.0)) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = spec.mean.norm() / std::sqrt(static_cast<double>(n));
    for (Eigen::Index i = 0; i < model.b.size(); ++i) model.b[i] = scale * normal(rng);
  }
  return model;
}

Decision minimize_risk(const RiskSpec& spec, const Orders& orders, const std::optional<RationalModel>& init,
                       int restarts, std::uint64_t seed, const RiskOptions& opts, Exec exec) {
  check_horizon(spec);
  if (orders.nb < 0 || orders.nf < 0 || orders.nk < 0) throw std::invalid_argument("minimize_risk: negative model order");
  if (restarts < 0) throw std::invalid_argument("minimize_risk: restarts must be >= 0");
  if (init && !(init->orders() == orders)) throw std::invalid_argument("minimize_risk: init does not match model orders");

  const int offset = init ? 1 : 0;
  const int total = offset + restarts;
  if (total == 0) throw std::invalid_argument("minimize_risk: need an init or at least one restart");

  std::vector<RationalModel> starts(total);
  if (init) starts[0] = *init;
  for (int i = offset; i < total; ++i) {
    Rng rng = make_rng({seed, static_cast<std::uint64_t>(i), 0x7269736bULL});
    starts[i] = random_stable_start(spec, orders, rng);
  }

  Decision out;
  out.starts.resize(total);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < total; ++i) out.starts[i] = descend(spec, orders, starts[i], i, i < offset, opts);
  } else {
    for (int i = 0; i < total; ++i) out.starts[i] = descend(spec, orders, starts[i], i, i < offset, opts);
  }

  int best = -1;
  for (int i = 0; i < total; ++i) {
    const StartReport& s = out.starts[i];
    if (s.diverged() || !std::isfinite(s.objective)) continue;
    if (best < 0 || s.objective < out.starts[best].objective) best = i;
  }
  if (best < 0) throw OptimizationFailure("minimize_risk: every start diverged");

  out.best_start = best;
  out.model = out.starts[best].result;
  out.objective = out.starts[best].objective;
  out.constant = spec.constant();
  out.rank_deficient = spec.rank_deficient;
  return out;
}

double pem_prediction_error(const RationalModel& model, const Dataset& data) {
  const ImpulseResponse g = impulse_response(model, data.size());
  return 0.5 * (data.y - simulate(g, data.u)).squaredNorm();
}

RiskCheck monte_carlo_risk_check(const RiskSpec& spec, const RationalModel& model, int samples, std::uint64_t seed) {
  check_horizon(spec);
  if (!spec.covariance) throw std::invalid_argument("monte_carlo_risk_check: spec has no covariance");
  if (samples < 1) throw std::invalid_argument("monte_carlo_risk_check: samples must be >= 1");
  const Eigen::Index n = spec.horizon();
  const Matrix root = psd_sqrt(*spec.covariance);
  const ImpulseResponse g_model = impulse_response(model, static_cast<int>(n));

  auto loss = [&](const Vector& g) {
    const Vector r = g - g_model;
    return 0.5 * r.dot(spec.weight * r);
  };

  Rng rng = make_rng({seed, 0x6d63ULL});
  double mean = 0.0;
  for (int k = 1; k <= samples; ++k) {
    const Vector z = gaussian_vector(rng, n, 1.0);
    mean += (loss(spec.mean + root * z) - mean) / k;
  }
  return {mean, *spec.constant() + loss(spec.mean)};
}

}  // namespace sysid
