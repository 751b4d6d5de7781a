#include <gtest/gtest.h>

#include "sysid/experiment.hpp"

using namespace sysid;

TEST(NormalizedError, EdgeCases) {
  const Vector g{{1.0, 0.5, 0.25}};
  EXPECT_EQ(normalized_error(g, g), kErrorFloor);
  EXPECT_EQ(normalized_error(g, Vector::Zero(3)), 0.0);
  EXPECT_EQ(normalized_error(Vector{{1.0, 0.0}}, Vector{{2.0, 0.0}}), 0.0);
  EXPECT_NEAR(normalized_error(Vector{{1.0, 0.0}}, Vector{{1.1, 0.0}}), -2.0, 1e-12);
  EXPECT_THROW(normalized_error(g, Vector::Zero(2)), std::invalid_argument);
  EXPECT_THROW(normalized_error(Vector::Zero(2), Vector::Zero(2)), std::invalid_argument);
}

TEST(BenchmarkSystem, UnitStaticGain) {
  EXPECT_NEAR(impulse_response(benchmark_system(), 2000).sum(), 1.0, 1e-6);
}

TEST(Summary, InclusiveQuantiles) {
  const BoxSummary s = summarize({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.iqr(), 1.5);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(Summary, FractionAbove) {
  ErrorDistribution d = aggregate({{0, -1.0, true, "ok"}, {1, 0.5, true, "ok"}, {2, 0.0, false, "failed"}, {3, 2.0, true, "ok"}});
  EXPECT_EQ(d.failures, 1);
  EXPECT_EQ(d.errors.size(), 3u);
  EXPECT_DOUBLE_EQ(d.fraction_above(0.0), 2.0 / 3.0);
}

TEST(RunSingle, DeterministicPerIndex) {
  ExperimentConfig cfg;
  cfg.N = 30;
  cfg.method = Method::Pem;
  const ReplicationResult a = run_single(cfg, 3);
  const ReplicationResult b = run_single(cfg, 3);
  EXPECT_TRUE(a.ok);
  EXPECT_EQ(a.error, b.error);
  EXPECT_NE(a.error, run_single(cfg, 4).error);
}

TEST(RunSingle, DatasetDoesNotDependOnMethod) {
  ExperimentConfig pem, brm;
  pem.method = Method::Pem;
  brm.method = Method::Brm;
  const Dataset a = replication_dataset(pem, 5), b = replication_dataset(brm, 5);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.y, b.y);
}

TEST(RunSingle, NoiseFreePemIsExact) {
  ExperimentConfig cfg;
  cfg.method = Method::Pem;
  cfg.noise_variance = 0.0;
  for (int i = 0; i < 3; ++i) {
    const ReplicationResult r = run_single(cfg, i);
    EXPECT_TRUE(r.ok) << r.status;
    EXPECT_LE(r.error, -8.0);
  }
}

TEST(RunSingle, BrmSmoke) {
  ExperimentConfig cfg;
  cfg.N = 30;
  const ReplicationResult r = run_single(cfg, 0);
  EXPECT_TRUE(r.ok) << r.status;
  EXPECT_TRUE(std::isfinite(r.error));
  EXPECT_LT(r.error, 0.0);
}

TEST(MonteCarlo, SingleReplication) {
  ExperimentConfig cfg;
  cfg.replications = 1;
  cfg.method = Method::Pem;
  const ErrorDistribution d = run_monte_carlo(cfg, Exec::Serial);
  ASSERT_EQ(d.errors.size(), 1u);
  EXPECT_EQ(d.summary.min, d.errors[0]);
  EXPECT_EQ(d.summary.median, d.errors[0]);
  EXPECT_EQ(d.summary.max, d.errors[0]);
}

TEST(MonteCarlo, SerialEqualsParallel) {
  ExperimentConfig cfg;
  cfg.N = 30;
  cfg.replications = 4;
  cfg.restarts = 3;
  const ErrorDistribution a = run_monte_carlo(cfg, Exec::Serial);
  const ErrorDistribution b = run_monte_carlo(cfg, Exec::Parallel);
  EXPECT_EQ(a.errors, b.errors);
}

TEST(Suite, ConfigShapes) {
  const ExperimentConfig base;
  const auto vary_n = suite_configs(SuiteKind::VaryN, base);
  ASSERT_EQ(vary_n.size(), 6u);
  const int ns[] = {30, 30, 60, 60, 120, 120};
  for (std::size_t i = 0; i < vary_n.size(); ++i) {
    EXPECT_EQ(vary_n[i].N, ns[i]);
    EXPECT_EQ(vary_n[i].method, i % 2 == 0 ? Method::Pem : Method::Brm);
  }
  const auto vary_nf = suite_configs(SuiteKind::VaryNf, base);
  ASSERT_EQ(vary_nf.size(), 6u);
  const int nfs[] = {2, 2, 4, 4, 8, 8};
  for (std::size_t i = 0; i < vary_nf.size(); ++i) {
    EXPECT_EQ(vary_nf[i].orders.nf, nfs[i]);
    EXPECT_EQ(vary_nf[i].N, 60);
  }
  EXPECT_EQ(parse_suite_kind("vary_N"), SuiteKind::VaryN);
  EXPECT_EQ(parse_suite_kind("vary_nf"), SuiteKind::VaryNf);
  EXPECT_THROW(parse_suite_kind("vary_x"), std::invalid_argument);
  EXPECT_EQ(parse_method("pem"), Method::Pem);
  EXPECT_THROW(parse_method("ml"), std::invalid_argument);
}

TEST(Config, ValidationNamesField) {
  ExperimentConfig cfg;
  cfg.N = 0;
  try {
    cfg.validate();
    FAIL() << "expected throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("N"), std::string::npos);
  }
}
