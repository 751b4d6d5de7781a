#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sysid/kernel.hpp"
#include "sysid/lti.hpp"
#include "sysid/parallel.hpp"
#include "sysid/risk.hpp"

namespace sysid {

enum class Method { Pem, Brm };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// Lower bound applied to log10 normalized errors.
inline constexpr double kErrorFloor = -16.0;

/// The fourth-order benchmark system 0.41 / (1 - 1.82 q^-1 + 2.04 q^-2 - 1.27 q^-3 + 0.46 q^-4).
RationalModel benchmark_system();

/// Second-order example: poles 0.64 +- 0.48i, static gain 2, one-sample delay.
RationalModel example_system();

struct ExperimentConfig {
  RationalModel system = benchmark_system();
  int N = 60;
  double input_variance = 1.0;
  double noise_variance = 2.0;
  Orders orders{0, 4, 0};
  Method method = Method::Brm;
  int replications = 100;
  std::uint64_t seed = 1;
  int horizon = 100;  // metric horizon T
  int restarts = 10;  // random starts of the risk minimizer
  DcHyperParams kernel_init{100.0, 0.8, 0.7, 1.0};
  bool kernel_init_lambda_from_data = true;  // replace kernel_init.lambda by var(y)/2
  TunerOptions tuner{};
  RiskOptions risk{};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// log10(||g_true - g_hat||^2 / ||g_true||^2), floored at kErrorFloor.
double normalized_error(const ImpulseResponse& g_true, const ImpulseResponse& g_hat);

struct IdentificationResult {
  Decision decision;
  PosteriorSummary posterior;
  std::optional<TuneResult> tuning;  // BRM only
};

/// One pass of the identification pipeline on a dataset: build H, tune the
/// kernel (BRM), form g_bar and W, minimize the risk.
IdentificationResult identify(const Dataset& data, Method method, const Orders& orders,
                              const DcHyperParams& kernel_init, const TunerOptions& tuner, int restarts,
                              std::uint64_t seed, const RiskOptions& risk = {}, Exec exec = Exec::Serial);

/// Dataset used by replication `index`: white input and noise drawn from the
/// (seed, index) substream, which does not depend on the method.
Dataset replication_dataset(const ExperimentConfig& config, int index);

struct ReplicationResult {
  int index = 0;
  double error = 0.0;
  bool ok = false;
  std::string status;  // "ok" or a failure description
};

ReplicationResult run_single(const ExperimentConfig& config, int index);

/// min, q1, median, q3, max with linear interpolation between order
/// statistics, q = x[(n-1)p] (inclusive rule), plus the mean.
struct BoxSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
  double iqr() const { return q3 - q1; }
};

double quantile(std::vector<double> values, double p);
BoxSummary summarize(const std::vector<double>& values);

struct ErrorDistribution {
  std::vector<double> errors;  // successful replications, in index order
  BoxSummary summary;
  int failures = 0;
  std::vector<ReplicationResult> records;  // every replication

  double fraction_above(double threshold) const;
};

ErrorDistribution aggregate(std::vector<ReplicationResult> records);

/// Replications are independent; the parallel path is bit-identical to the
/// serial one since every replication draws from its own substream.
ErrorDistribution run_monte_carlo(const ExperimentConfig& config, Exec exec = Exec::Parallel);

enum class SuiteKind { VaryN, VaryNf };

std::string_view to_string(SuiteKind k);
SuiteKind parse_suite_kind(std::string_view s);

struct BenchmarkCell {
  Method method = Method::Pem;
  int N = 0;
  int nf = 0;
  ErrorDistribution distribution;
};

/// VaryN: N in {30, 60, 120} with the base orders. VaryNf: nf in {2, 4, 8}
/// at N = 60. Both methods per setting, PEM first.
std::vector<ExperimentConfig> suite_configs(SuiteKind kind, const ExperimentConfig& base);
std::vector<BenchmarkCell> benchmark_suite(SuiteKind kind, const ExperimentConfig& base, Exec exec = Exec::Parallel);

}  // namespace sysid
