#include "sysid/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

#include "sysid/random.hpp"

namespace sysid {

namespace {
// Upper clamp for the error of a model whose response overflows past the
// data horizon; about log10 of the largest double.
constexpr double kErrorCeiling = 300.0;

std::uint64_t derived_seed(std::uint64_t seed, int index, std::uint64_t tag) {
  Rng rng = make_rng({seed, static_cast<std::uint64_t>(index), tag});
  return rng();
}
}  // namespace

std::string_view to_string(Method m) { return m == Method::Pem ? "pem" : "brm"; }

Method parse_method(std::string_view s) {
  if (s == "pem" || s == "PEM") return Method::Pem;
  if (s == "brm" || s == "BRM") return Method::Brm;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected pem or brm)");
}

std::string_view to_string(SuiteKind k) { return k == SuiteKind::VaryN ? "vary_N" : "vary_nf"; }

SuiteKind parse_suite_kind(std::string_view s) {
  if (s == "vary_N" || s == "vary_n") return SuiteKind::VaryN;
  if (s == "vary_nf") return SuiteKind::VaryNf;
  throw std::invalid_argument("unknown suite kind '" + std::string(s) + "' (expected vary_N or vary_nf)");
}

RationalModel benchmark_system() {
  return RationalModel(Vector{{0.41}}, Vector{{-1.82, 2.04, -1.27, 0.46}}, 0);
}

RationalModel example_system() {
  // (1 - p z^-1)(1 - conj(p) z^-1) with p = 0.64 + 0.48i; b0 = 2 F(1).
  const double f1 = -2.0 * 0.64;
  const double f2 = 0.64 * 0.64 + 0.48 * 0.48;
  return RationalModel(Vector{{2.0 * (1.0 + f1 + f2)}}, Vector{{f1, f2}}, 1);
}

void ExperimentConfig::validate() const {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (!(input_variance >= 0.0)) throw std::invalid_argument("input_variance must be >= 0");
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise_variance must be >= 0");
  if (orders.nb < 0 || orders.nf < 0 || orders.nk < 0) throw std::invalid_argument("orders must be nonnegative");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (restarts < 0) throw std::invalid_argument("restarts must be >= 0");
  if (tuner.restarts < 0) throw std::invalid_argument("tuner.restarts must be >= 0");
  if (tuner.max_iterations < 0 || risk.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (method == Method::Brm) kernel_init.validate();
}

double normalized_error(const ImpulseResponse& g_true, const ImpulseResponse& g_hat) {
  if (g_true.size() != g_hat.size()) throw std::invalid_argument("normalized_error: length mismatch");
  const double denom = g_true.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("normalized_error: true impulse response has zero norm");
  const double ratio = (g_true - g_hat).squaredNorm() / denom;
  if (std::isnan(ratio)) return kErrorCeiling;
  if (ratio <= 0.0) return kErrorFloor;
  return std::clamp(std::log10(ratio), kErrorFloor, kErrorCeiling);
}

IdentificationResult identify(const Dataset& data, Method method, const Orders& orders,
                              const DcHyperParams& kernel_init, const TunerOptions& tuner, int restarts,
                              std::uint64_t seed, const RiskOptions& risk, Exec exec) {
  const Matrix H = build_toeplitz(data.u);
  IdentificationResult out;
  if (method == Method::Pem) {
    out.posterior = ls_summary(H, data.y);
  } else {
    TunerOptions topts = tuner;
    topts.seed = derived_seed(seed, 0, 0x74756e65ULL);
    out.tuning = tune_hyperparameters(H, data.y, kernel_init, topts, exec);
    const KernelMatrix K = dc_kernel(out.tuning->params, data.size());
    out.posterior = gaussian_posterior(K, out.tuning->params.lambda, H, data.y);
  }
  const RiskSpec spec = RiskSpec::from_posterior(out.posterior);
  out.decision = minimize_risk(spec, orders, std::nullopt, restarts, derived_seed(seed, 0, 0x6d696e72ULL), risk, exec);
  return out;
}

Dataset replication_dataset(const ExperimentConfig& config, int index) {
  Rng rng = make_rng({config.seed, static_cast<std::uint64_t>(index)});
  Vector u = gaussian_vector(rng, config.N, config.input_variance);
  const Vector e = gaussian_vector(rng, config.N, config.noise_variance);
  const ImpulseResponse g = impulse_response(config.system, config.N);
  Vector y = simulate(g, u, e);
  return Dataset(std::move(u), std::move(y));
}

ReplicationResult run_single(const ExperimentConfig& config, int index) {
  ReplicationResult rec;
  rec.index = index;
  try {
    const Dataset data = replication_dataset(config, index);
    DcHyperParams init = config.kernel_init;
    if (config.method == Method::Brm && config.kernel_init_lambda_from_data) {
      const double guess = 0.5 * data.y.squaredNorm() / data.size();
      init.lambda = guess > 0.0 ? guess : 1.0;
    }
    const IdentificationResult id =
        identify(data, config.method, config.orders, init, config.tuner, config.restarts,
                 derived_seed(config.seed, index, 0x6964ULL), config.risk, Exec::Serial);

    const ImpulseResponse g_true = impulse_response(config.system, config.horizon);
    ImpulseResponse g_hat(config.horizon);
    detail::impulse_response_into(id.decision.model, g_hat, std::numeric_limits<double>::infinity());
    rec.error = normalized_error(g_true, g_hat);
    rec.ok = true;
    rec.status = "ok";
  } catch (const std::exception& ex) {
    rec.ok = false;
    rec.error = std::numeric_limits<double>::quiet_NaN();
    rec.status = ex.what();
  }
  return rec;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BoxSummary summarize(const std::vector<double>& values) {
  BoxSummary s;
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan, nan};
  }
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

double ErrorDistribution::fraction_above(double threshold) const {
  if (errors.empty()) return 0.0;
  const auto count = std::count_if(errors.begin(), errors.end(), [&](double e) { return e > threshold; });
  return static_cast<double>(count) / static_cast<double>(errors.size());
}

ErrorDistribution aggregate(std::vector<ReplicationResult> records) {
  ErrorDistribution d;
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  for (const ReplicationResult& r : records) {
    if (r.ok) d.errors.push_back(r.error);
    else ++d.failures;
  }
  d.summary = summarize(d.errors);
  d.records = std::move(records);
  return d;
}

ErrorDistribution run_monte_carlo(const ExperimentConfig& config, Exec exec) {
  config.validate();
  std::vector<ReplicationResult> records(config.replications);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < config.replications; ++i) records[i] = run_single(config, i);
  } else {
    for (int i = 0; i < config.replications; ++i) records[i] = run_single(config, i);
  }
  return aggregate(std::move(records));
}

std::vector<ExperimentConfig> suite_configs(SuiteKind kind, const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  auto add_both = [&](ExperimentConfig c) {
    c.method = Method::Pem;
    out.push_back(c);
    c.method = Method::Brm;
    out.push_back(c);
  };
  if (kind == SuiteKind::VaryN) {
    for (int n : {30, 60, 120}) {
      ExperimentConfig c = base;
      c.N = n;
      add_both(c);
    }
  } else {
    for (int nf : {2, 4, 8}) {
      ExperimentConfig c = base;
      c.N = 60;
      c.orders.nf = nf;
      add_both(c);
    }
  }
  return out;
}

std::vector<BenchmarkCell> benchmark_suite(SuiteKind kind, const ExperimentConfig& base, Exec exec) {
  std::vector<BenchmarkCell> cells;
  for (const ExperimentConfig& c : suite_configs(kind, base)) {
    cells.push_back({c.method, c.N, c.orders.nf, run_monte_carlo(c, exec)});
  }
  return cells;
}

}  // namespace sysid
