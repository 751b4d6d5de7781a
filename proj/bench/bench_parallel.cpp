// Serial reference vs OpenMP paths for the two data-parallel loops.

#include <benchmark/benchmark.h>

#include "sysid/experiment.hpp"
#include "sysid/risk.hpp"

using namespace sysid;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_MonteCarlo(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.N = 30;
  cfg.replications = 16;
  cfg.method = state.range(1) == 0 ? Method::Pem : Method::Brm;
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(cfg, exec_of(state)).summary.median);
  state.SetLabel(std::string(exec_of(state) == Exec::Serial ? "serial" : "parallel") + "/" +
                 std::string(to_string(cfg.method)));
}

void BM_MinimizeRisk(benchmark::State& state) {
  ExperimentConfig cfg;
  const Dataset data = replication_dataset(cfg, 0);
  const PosteriorSummary ls = ls_summary(build_toeplitz(data.u), data.y);
  const RiskSpec spec = RiskSpec::from_posterior(ls);
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_risk(spec, {0, 4, 0}, std::nullopt, 16, 1, {}, exec_of(state)).objective);
  }
  state.SetLabel(exec_of(state) == Exec::Serial ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_MonteCarlo)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinimizeRisk)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
