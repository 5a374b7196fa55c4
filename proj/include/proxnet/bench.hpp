#pragma once

// Multi-agent L1-regularized min-max regression on cosine features:
//
//   min  t + lambda ||x||_1    s.t.  |sum_l x_l cos(l delta) - s_i(delta)| <= t
//
// with x = (x_1..x_d, t), one signal s_i per agent built from randomly
// shifted cosines, and delta ~ U[-pi, pi].

#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "proxnet/consensus.hpp"
#include "proxnet/network.hpp"
#include "proxnet/scenario.hpp"

namespace proxnet {

struct BenchSeeds {
  std::uint64_t signal = 1;
  std::uint64_t scenario = 2;
  std::uint64_t validation = 3;
  friend bool operator==(const BenchSeeds&, const BenchSeeds&) = default;
};

struct RegressionConfig {
  std::size_t m = 6;
  std::size_t d = 50;  // cosine terms; n = d + 1
  double lambda = 0.001;
  std::uint64_t samples_per_agent = 4500;
  double box_half_width = 1000.0;
  std::size_t signal_components = 10;
  BenchSeeds seeds;
  std::uint64_t validation_samples = 80000;
  double beta = 1e-5;
  double alpha = 0.05;  // c(k) = alpha / (k + 1)

  void validate() const {
    if (m == 0 || d == 0 || samples_per_agent == 0 || signal_components == 0) {
      throw InvalidArgument("regression config: counts must be positive");
    }
    if (!(lambda >= 0.0) || !(box_half_width > 0.0) || !(alpha > 0.0)) {
      throw InvalidArgument("regression config: lambda >= 0, box width and alpha > 0 required");
    }
  }
  friend bool operator==(const RegressionConfig&, const RegressionConfig&) = default;
};

/// s_i(delta) = sum_p cos(p delta + phase[p-1]).
struct CosineSignal {
  std::vector<double> phase;
  double operator()(double delta) const {
    double s = 0.0;
    for (std::size_t p = 0; p < phase.size(); ++p) {
      s += std::cos(static_cast<double>(p + 1) * delta + phase[p]);
    }
    return s;
  }
};

struct RegressionInstance {
  ProblemSpec problem;  // scenario program, ready to run
  UncertainConstraintFamily family;
  ScenarioSets scenarios;
  std::vector<CosineSignal> signals;
};

namespace detail {

inline Vector cosine_features(std::size_t d, double delta) {
  Vector a(d);
  for (std::size_t l = 0; l < d; ++l) a[l] = std::cos(static_cast<double>(l + 1) * delta);
  return a;
}

}  // namespace detail

inline std::vector<CosineSignal> make_signals(const RegressionConfig& cfg) {
  std::mt19937_64 rng(cfg.seeds.signal);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<CosineSignal> out(cfg.m);
  for (auto& s : out) {
    s.phase.resize(cfg.signal_components);
    for (double& v : s.phase) v = phase(rng);
  }
  return out;
}

/// Uncertain family of the regression: for each delta, two halfspaces
///   (a, -1).x <= s_i(delta)   and   (-a, -1).x <= -s_i(delta).
inline UncertainConstraintFamily regression_family(const RegressionConfig& cfg,
                                                   std::vector<CosineSignal> signals) {
  UncertainConstraintFamily fam;
  fam.agents = cfg.m;
  const std::size_t d = cfg.d;
  fam.dimension = d + 1;
  fam.sample = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    return Vector{u(rng)};
  };
  fam.set = [d, signals](std::size_t i, const Vector& delta) {
    const double s = signals[i](delta[0]);
    Vector up = detail::cosine_features(d, delta[0]);
    Vector dn(d + 1);
    up.push_back(-1.0);
    for (std::size_t l = 0; l < d; ++l) dn[l] = -up[l];
    dn[d] = -1.0;
    return ConvexSet::intersection(
        {ConvexSet::halfspace(std::move(up), s), ConvexSet::halfspace(std::move(dn), -s)});
  };
  fam.member = [d, signals](std::size_t i, const Vector& delta, std::span<const double> x,
                            double tol) {
    double r = -signals[i](delta[0]);
    for (std::size_t l = 0; l < d; ++l) r += x[l] * std::cos(static_cast<double>(l + 1) * delta[0]);
    return std::abs(r) <= x[d] + tol;
  };
  return fam;
}

/// Objective (1/m)(t + lambda ||x||_1), box X, and the sampled constraints.
/// The interior ball sits at (0, ..., 0, P + 1) where P bounds |s_i|.
inline RegressionInstance build_regression_problem(const RegressionConfig& cfg) {
  cfg.validate();
  RegressionInstance inst;
  inst.signals = make_signals(cfg);
  inst.family = regression_family(cfg, inst.signals);
  const std::size_t n = cfg.d + 1;
  const double inv_m = 1.0 / static_cast<double>(cfg.m);

  ProblemSpec base;
  base.dimension = n;
  Vector g(n, 0.0);
  g[cfg.d] = inv_m;
  const ObjectiveTerm f = ObjectiveTerm::sum(
      {ObjectiveTerm::linear(g), ObjectiveTerm::l1(n, cfg.lambda * inv_m)});
  for (std::size_t i = 0; i < cfg.m; ++i) {
    AgentSpec a;
    a.objective = f;
    a.constraint = ConvexSet::cube(n, cfg.box_half_width);
    base.agents.push_back(std::move(a));
  }
  Vector center(n, 0.0);
  center[cfg.d] = static_cast<double>(cfg.signal_components) + 1.0;
  base.interior = InteriorPoint{center, 0.9 / std::sqrt(static_cast<double>(n))};

  inst.scenarios = draw_scenarios(
      inst.family, std::vector<std::uint64_t>(cfg.m, cfg.samples_per_agent), cfg.seeds.scenario);
  inst.problem = build_scenario_program(base, inst.family, inst.scenarios);
  return inst;
}

struct BenchmarkSummary {
  std::vector<double> worst_case_error;  // t component of each agent's iterate
  double consensus_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  EpsilonReport naive;
  EpsilonReport tight;
  ViolationEstimate violation;  // at the network average
  std::optional<double> oracle_objective;
  std::optional<double> oracle_gap;  // relative, at the network average
  double objective_at_v = 0.0;
  double max_own_violation = 0.0;  // worst agent iterate vs its own scenarios
  Vector v;
  RunResult run;
};

struct BenchmarkOptions {
  bool oracle = false;
  bool violation = true;
  std::size_t workers = 1;
};

inline BenchmarkSummary run_benchmark(const RegressionConfig& cfg, const RunConfig& runcfg,
                                      const BenchmarkOptions& opt = {}) {
  const RegressionInstance inst = build_regression_problem(cfg);
  const NetworkSchedule sched = make_ring_alternating_pairs(cfg.m);
  const StepSchedule steps = StepSchedule::harmonic(cfg.alpha);

  BenchmarkSummary out;
  out.run = run(inst.problem, sched, steps, runcfg);
  const RunResult& r = out.run;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.consensus_residual = r.consensus_residual;
  out.v = r.v;
  out.objective_at_v = r.objective_at_v;
  for (const auto& x : r.x) out.worst_case_error.push_back(x[cfg.d]);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    out.max_own_violation =
        std::max(out.max_own_violation, max_violation(flatten(inst.problem.agents[i].constraint),
                                                      r.x[i]));
  }

  const ScenarioConfig sc = ScenarioConfig::uniform(cfg.m, cfg.samples_per_agent, cfg.beta, cfg.d);
  out.naive = epsilon_naive(sc);
  out.tight = epsilon_tight(sc);
  if (opt.violation && cfg.validation_samples > 0) {
    out.violation = estimate_violation(r.v, inst.family, cfg.validation_samples,
                                       cfg.seeds.validation, opt.workers);
  }
  if (opt.oracle) {
    const Vector xs = centralized_solve(inst.problem, 1e-9);
    const double fs = objective_at_shared(inst.problem, xs, r.x);
    out.oracle_objective = fs;
    out.oracle_gap = std::abs(out.objective_at_v - fs) / std::max(std::abs(fs), 1e-12);
  }
  return out;
}

}  // namespace proxnet
