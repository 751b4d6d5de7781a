#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sysid {

enum class StopReason {
  Gradient,       // ||grad||_inf <= tol * (1 + |f|)
  Stalled,        // no Armijo decrease possible at working precision
  MaxIterations,
  NonFinite,      // objective undefined at the starting point
};

std::string_view to_string(StopReason r);

struct MinimizeOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  bool record_trace = false;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  StopReason reason = StopReason::MaxIterations;
  std::vector<double> trace;  // accepted objective values, if requested
};

/// Objective returning f(x) and, when `grad` is non-null, writing the gradient.
/// A non-finite return marks x as infeasible; the line search backs off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// BFGS with inverse-Hessian updates and Armijo backtracking.
MinimizeResult minimize_bfgs(const Objective& fn, Eigen::VectorXd x0, const MinimizeOptions& opts = {});

}  // namespace sysid
