#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sysid/lti.hpp"
#include "sysid/optim.hpp"
#include "sysid/parallel.hpp"
#include "sysid/posterior.hpp"
#include "sysid/random.hpp"

namespace sysid {

/// Objective reported for a model whose impulse response diverged.
inline constexpr double kDivergedObjective = 1e30;

class OptimizationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// R(theta) = 1/2 tr(W Sigma) + 1/2 ||g_bar - g_theta||^2_W. Only the second
/// term depends on theta; the first is reported through constant().
struct RiskSpec {
  ImpulseResponse mean;
  Matrix weight;
  std::optional<Matrix> covariance;
  std::optional<WeightFactor> factor;
  bool rank_deficient = false;

  RiskSpec() = default;
  RiskSpec(ImpulseResponse mean_, Matrix weight_, std::optional<Matrix> covariance_ = std::nullopt);
  static RiskSpec from_posterior(const PosteriorSummary& summary);

  Eigen::Index horizon() const { return mean.size(); }
  std::optional<double> constant() const;
};

/// 1/2 (g_bar - g_theta)^T W (g_bar - g_theta) over the spec's horizon;
/// kDivergedObjective if the model's impulse response blows up.
double risk_value(const RationalModel& model, const RiskSpec& spec);

/// J^T W (g_theta - g_bar) in flat-theta order. Throws DivergedResponse.
Vector risk_gradient(const RationalModel& model, const RiskSpec& spec);

struct RiskOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;  // on ||grad||_inf / (1 + |f|)
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
  bool record_trace = false;
};

struct StartReport {
  int index = 0;
  bool user_init = false;
  RationalModel init;
  RationalModel result;
  double objective = kDivergedObjective;
  int iterations = 0;
  StopReason reason = StopReason::NonFinite;
  std::vector<double> trace;  // accepted objectives, if requested

  bool diverged() const { return !(objective < kDivergedObjective); }
};

struct Decision {
  RationalModel model;
  double objective = 0.0;            // risk_value(model, spec)
  std::optional<double> constant;    // 1/2 tr(W Sigma) when Sigma is known
  bool rank_deficient = false;
  int best_start = 0;
  std::vector<StartReport> starts;
};

/// Random stable starting model: conjugate pole pairs (plus one real pole for
/// odd nf) with radii in (0, 0.95), and the numerator that minimizes the risk
/// for that denominator.
RationalModel random_stable_start(const RiskSpec& spec, const Orders& orders, Rng& rng);

/// theta_hat = argmin R(theta). Each start runs a damped Gauss-Newton
/// quasi-Newton iteration with Armijo backtracking; the lowest objective wins
/// with ties going to the lowest start index. Starts are `init` (if given)
/// followed by `restarts` random stable models drawn from (seed, start index).
/// Throws OptimizationFailure if every start diverged.
Decision minimize_risk(const RiskSpec& spec, const Orders& orders, const std::optional<RationalModel>& init,
                       int restarts, std::uint64_t seed, const RiskOptions& opts = {},
                       Exec exec = Exec::Parallel);

/// 1/2 ||y - H g_theta||^2, the classical prediction-error criterion.
double pem_prediction_error(const RationalModel& model, const Dataset& data);

struct RiskCheck {
  double empirical = 0.0;
  double analytic = 0.0;
};

/// Average of the loss 1/2 ||g - g_theta||^2_W over g ~ N(g_bar, Sigma)
/// next to the closed form 1/2 tr(W Sigma) + 1/2 ||g_bar - g_theta||^2_W.
RiskCheck monte_carlo_risk_check(const RiskSpec& spec, const RationalModel& model, int samples,
                                 std::uint64_t seed);

}  // namespace sysid
