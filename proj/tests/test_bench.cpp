#include <gtest/gtest.h>

#include <cmath>

#include "proxnet/bench.hpp"

using namespace proxnet;

namespace {

RegressionConfig small_config() {
  RegressionConfig c;
  c.d = 10;
  c.samples_per_agent = 300;
  c.validation_samples = 20000;
  return c;
}

}  // namespace

TEST(Regression, ConstraintCountsAndShape) {
  RegressionConfig c = small_config();
  c.samples_per_agent = 40;
  const auto inst = build_regression_problem(c);
  ASSERT_EQ(inst.problem.agents.size(), 6u);
  EXPECT_EQ(inst.problem.dimension, 11u);
  for (const auto& a : inst.problem.agents) {
    const FlatSet f = flatten(a.constraint);
    EXPECT_EQ(f.halfspaces.size(), 80u);
    EXPECT_TRUE(f.balls.empty());
    ASSERT_TRUE(f.box.has_value());
    EXPECT_EQ(f.box->upper[0], 1000.0);
  }
  EXPECT_TRUE(validate_problem(inst.problem).empty());
}

TEST(Regression, ZeroCoefficientsForceWorstCaseResidual) {
  RegressionConfig c = small_config();
  c.samples_per_agent = 25;
  const auto inst = build_regression_problem(c);
  for (std::size_t i = 0; i < c.m; ++i) {
    double worst = 0.0;
    for (const auto& d : inst.scenarios[i]) worst = std::max(worst, std::abs(inst.signals[i](d[0])));
    const FlatSet f = flatten(inst.problem.agents[i].constraint);
    Vector x(c.d + 1, 0.0);
    x[c.d] = worst;
    EXPECT_LE(max_violation(f, x), 1e-12);
    x[c.d] = worst - 1e-6;
    EXPECT_GT(max_violation(f, x), 0.0);
  }
}

TEST(Regression, MemberMatchesSetAndSignalsAreBounded) {
  const RegressionConfig c = small_config();
  const auto inst = build_regression_problem(c);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    Vector x(c.d + 1);
    for (double& v : x) v = u(rng);
    x[c.d] = 3.0 * std::abs(u(rng)) + 1.0;
    const Vector delta = inst.family.sample(rng);
    const std::size_t i = static_cast<std::size_t>(t) % c.m;
    EXPECT_EQ(inst.family.member(i, delta, x, 0.0), contains(inst.family.set(i, delta), x, 0.0));
    EXPECT_LE(std::abs(inst.signals[i](delta[0])), static_cast<double>(c.signal_components));
  }
}

TEST(Regression, DeterministicInstance) {
  const auto a = build_regression_problem(small_config());
  const auto b = build_regression_problem(small_config());
  EXPECT_EQ(a.problem, b.problem);
  RegressionConfig other = small_config();
  other.seeds.scenario = 99;
  EXPECT_FALSE(build_regression_problem(other).problem == a.problem);
}

TEST(Regression, ReducedRun) {
  RunConfig rc;
  rc.iterate_tolerance = 3e-4;
  rc.max_iterations = 500;
  rc.inner_tolerance = 1e-9;
  rc.trace = TraceLevel::none;
  BenchmarkOptions opt;
  opt.oracle = true;
  opt.workers = 2;
  const auto s = run_benchmark(small_config(), rc, opt);
  EXPECT_TRUE(s.converged);
  EXPECT_LT(s.consensus_residual, 1e-3);
  ASSERT_TRUE(s.oracle_gap.has_value());
  EXPECT_LT(*s.oracle_gap, 0.01);
  EXPECT_LE(s.max_own_violation, 1e-6);
  EXPECT_EQ(s.violation.samples, 20000u);
  EXPECT_LE(s.violation.rate, s.tight.value);
  EXPECT_LE(s.tight.value, s.naive.value);
  EXPECT_EQ(s.worst_case_error.size(), 6u);
  for (double t : s.worst_case_error) EXPECT_GT(t, 0.0);
}

TEST(Regression, ConfigChecks) {
  RegressionConfig c = small_config();
  c.d = 0;
  EXPECT_THROW(build_regression_problem(c), InvalidArgument);
  c = small_config();
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = small_config();
  c.m = 5;  // ring of pairs needs an even count
  RunConfig rc;
  rc.max_iterations = 2;
  EXPECT_THROW(run_benchmark(c, rc), InvalidArgument);
}
