#include "sysid/optim.hpp"

#include <cmath>

namespace sysid {

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Gradient: return "converged";
    case StopReason::Stalled: return "stalled";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::NonFinite: return "non_finite";
  }
  return "unknown";
}

MinimizeResult minimize_bfgs(const Objective& fn, Eigen::VectorXd x0, const MinimizeOptions& opts) {
  using Eigen::VectorXd;
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = std::move(x0);
  res.gradient = VectorXd::Zero(n);
  res.value = fn(res.x, &res.gradient);
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    res.reason = StopReason::NonFinite;
    return res;
  }
  if (opts.record_trace) res.trace.push_back(res.value);

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  bool identity_hessian = true;
  VectorXd x_new(n), g_new(n);

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    if (res.gradient.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance * (1.0 + std::abs(res.value))) {
      res.reason = StopReason::Gradient;
      return res;
    }

    VectorXd dir = -inv_hessian * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      identity_hessian = true;
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    if (identity_hessian) {
      // Unit steps along a raw gradient can be wildly off scale.
      const double len = dir.lpNorm<Eigen::Infinity>();
      if (len > 1.0) {
        dir /= len;
        slope /= len;
      }
    }

    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < opts.max_backtracks; ++k, step *= opts.backtrack) {
      x_new = res.x + step * dir;
      f_new = fn(x_new, &g_new);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= res.value + opts.armijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!identity_hessian) {
        inv_hessian.setIdentity();
        identity_hessian = true;
        continue;
      }
      res.reason = StopReason::Stalled;
      return res;
    }

    const VectorXd s = x_new - res.x;
    const VectorXd yv = g_new - res.gradient;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (identity_hessian) inv_hessian *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const VectorXd hy = inv_hessian * yv;
      const double yhy = yv.dot(hy);
      inv_hessian += (rho * rho * yhy + rho) * s * s.transpose() - rho * (hy * s.transpose() + s * hy.transpose());
      identity_hessian = false;
    }

    const double previous = res.value;
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;
    if (opts.record_trace) res.trace.push_back(res.value);
    if (previous - res.value <= 1e-15 * (1.0 + std::abs(res.value)) && s.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + res.x.lpNorm<Eigen::Infinity>())) {
      res.reason = StopReason::Stalled;
      ++res.iterations;
      return res;
    }
  }
  res.reason = StopReason::MaxIterations;
  return res;
}

}  // namespace sysid
