// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "proxnet/proxnet.hpp"

using namespace proxnet;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// shared instances

ProblemSpec two_agent_problem() {
  ProblemSpec p;
  p.dimension = 1;
  AgentSpec a, b;
  a.objective = ObjectiveTerm::quadratic_diagonal({2.0}, {-2.0}, 1.0);  // (x-1)^2
  a.constraint = ConvexSet::box({0.0}, {2.0});
  b.objective = ObjectiveTerm::l1(1, 1.0);
  b.constraint = ConvexSet::box({0.5}, {3.0});
  p.agents = {a, b};
  p.interior = InteriorPoint{{1.25}, 0.5};
  return p;
}

ProblemSpec random_polyhedral(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ProblemSpec p;
  p.dimension = n;
  const double r0 = 0.3;  // every X_i contains the ball B(0, r0)
  for (std::size_t i = 0; i < m; ++i) {
    Vector h(n), g(n), normal(n);
    for (std::size_t j = 0; j < n; ++j) h[j] = std::abs(u(rng)), g[j] = 2.0 * u(rng), normal[j] = u(rng);
    AgentSpec a;
    a.objective = ObjectiveTerm::sum(
        {ObjectiveTerm::quadratic_diagonal(h, g), ObjectiveTerm::l1(n, 0.5 * std::abs(u(rng)))});
    a.constraint = ConvexSet::intersection(
        {ConvexSet::cube(n, 1.0), ConvexSet::halfspace(normal, norm(normal) * (r0 + 0.5 * std::abs(u(rng))))});
    p.agents.push_back(std::move(a));
  }
  p.interior = InteriorPoint{Vector(n, 0.0), r0};
  return p;
}

NetworkSchedule network_for(std::size_t m) {
  return m % 2 == 0 && m >= 4 ? make_ring_alternating_pairs(m) : make_complete_uniform(m);
}

double sum_objective(const ProblemSpec& p, const Vector& x) {
  double s = 0.0;
  for (const auto& a : p.agents) s += evaluate(a.objective, x);
  return s;
}

struct OracleRun {
  ProblemSpec problem;
  RunResult result;
  Vector x_star;
  double tol = 0.0;
};

// Runs shared by criteria 3, 4, 5; computed once.
std::vector<OracleRun>& oracle_runs() {
  static std::vector<OracleRun> runs = [] {
    std::vector<OracleRun> out;
    RunConfig rc;
    rc.diagnostics = true;
    rc.max_iterations = 5000;
    rc.iterate_tolerance = 1e-7;
    rc.inner_tolerance = 1e-12;
    {
      OracleRun o;
      o.problem = two_agent_problem();
      o.tol = rc.iterate_tolerance;
      o.result = run(o.problem, make_complete_uniform(2), StepSchedule::harmonic(1.0), rc);
      o.x_star = centralized_solve(o.problem, 1e-12);
      out.push_back(std::move(o));
    }
    std::mt19937_64 rng(20240611);
    // default window is 1 on two-agent complete graphs; a single stalled
    // step at c = 1 would end those runs
    rc.termination_window = 20;
    rc.iterate_tolerance = 1e-6;
    rc.max_iterations = 20000;
    for (int t = 0; t < 20; ++t) {
      const std::size_t n = 1 + static_cast<std::size_t>(t) % 3;
      const std::size_t m = 2 + static_cast<std::size_t>(t) % 3;
      OracleRun o;
      o.problem = random_polyhedral(rng, n, m);
      o.tol = rc.iterate_tolerance;
      o.result = run(o.problem, network_for(m), StepSchedule::harmonic(1.0), rc);
      o.x_star = centralized_solve(o.problem, 1e-12);
      out.push_back(std::move(o));
    }
    return out;
  }();
  return runs;
}

// ---------------------------------------------------------------------------
// criteria

Outcome criterion1() {
  const auto t0 = Clock::now();
  const ScenarioConfig sc = ScenarioConfig::uniform(6, 4500, 1e-5, 50);
  const double naive = epsilon_naive(sc).value;
  const double tight = epsilon_tight(sc).value;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  Outcome o;
  o.pass = std::abs(naive - 0.37) <= 0.005 && std::abs(tight - 0.097) <= 0.005 && secs < 1.0;
  o.detail = "naive " + fmt("%.5f", naive) + ", tight " + fmt("%.5f", tight);
  return o;
}

Outcome criterion2() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> m_dist(1, 4), d_dist(0, 10), n_dist(1, 500);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    ScenarioConfig c;
    c.d = static_cast<std::uint64_t>(d_dist(rng));
    const std::size_t m = static_cast<std::size_t>(m_dist(rng));
    std::vector<double> w(m);
    double total = 0.0;
    for (auto& x : w) total += (x = u(rng));
    const double beta = std::pow(10.0, -1.0 - 7.0 * u(rng));
    for (std::size_t i = 0; i < m; ++i) {
      c.samples.push_back(static_cast<std::uint64_t>(n_dist(rng)));
      c.betas.push_back(beta * w[i] / total);
    }
    double best = 0.0;
    std::function<void(std::size_t, std::uint64_t, double)> rec = [&](std::size_t i, std::uint64_t left,
                                                                      double acc) {
      if (i == m) {
        best = std::max(best, acc);
        return;
      }
      for (std::uint64_t k = 0; k <= left; ++k) {
        rec(i + 1, left - k, acc + epsilon_i_k(c.samples[i], c.betas[i], c.d, k).value);
      }
    };
    rec(0, c.d, 0.0);
    if (std::abs(epsilon_tight(c).value - std::min(best, 1.0)) > 1e-14) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000"};
}

Outcome criterion3() {
  const auto& runs = oracle_runs();
  const OracleRun& two = runs.front();
  // grid oracle for the two-agent instance on the common interval [0.5, 2]
  double grid_x = 0.0, grid_v = 1e300;
  for (int g = 0; g <= 150000; ++g) {
    const double x = 0.5 + 1e-5 * g;
    const double v = sum_objective(two.problem, Vector{x});
    if (v < grid_v) grid_v = v, grid_x = x;
  }
  double worst_agent = 0.0;
  for (const auto& x : two.result.x) worst_agent = std::max(worst_agent, std::abs(x[0] - grid_x));
  bool ok = two.result.converged && two.result.iterations <= 5000 && worst_agent <= 1e-3;

  double worst_gap = 0.0;
  std::size_t unconverged = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const auto& o = runs[r];
    if (!o.result.converged) ++unconverged;
    const double fs = sum_objective(o.problem, o.x_star);
    const double fv = sum_objective(o.problem, *o.result.v_bar);
    worst_gap = std::max(worst_gap, std::abs(fv - fs) / std::max(std::abs(fs), 1.0));
  }
  ok = ok && worst_gap < 0.01;
  return {ok, "two-agent: grid x* " + fmt("%.5f", grid_x) + ", max |x_i - x*| " + fmt("%.2e", worst_agent) +
                  " after " + std::to_string(two.result.iterations) + " iterations; random: max gap " +
                  fmt("%.2e", worst_gap) + ", " + std::to_string(unconverged) + " of 20 stopped at the iteration cap"};
}

struct PropertyCheck {
  double residual_ratio = 0.0;  // residual / tolerance
  double tail = 0.0;            // share of sum ||e||^2 added in the last 20%
};

PropertyCheck properties(const RunResult& r, double tol) {
  PropertyCheck p;
  p.residual_ratio = r.consensus_residual / tol;
  const auto& rec = r.trace.records;
  if (rec.size() >= 2) {
    const double total = rec[rec.size() - 2].cumulative_error_sq;
    const std::size_t cut = (rec.size() - 1) * 4 / 5;
    const double before = cut == 0 ? 0.0 : rec[cut - 1].cumulative_error_sq;
    p.tail = total > 0.0 ? (total - before) / total : 0.0;
  }
  return p;
}

Outcome criterion4(const BenchmarkSummary& bench, double bench_tol) {
  double worst_ratio = 0.0, worst_tail = 0.0;
  std::size_t checked = 0, failing = 0;
  auto add = [&](const RunResult& r, double tol) {
    if (!r.converged) return;
    ++checked;
    const auto p = properties(r, tol);
    worst_ratio = std::max(worst_ratio, p.residual_ratio);
    worst_tail = std::max(worst_tail, p.tail);
    if (p.residual_ratio >= 10.0 || p.tail >= 0.01) ++failing;
  };
  for (const auto& o : oracle_runs()) add(o.result, o.tol);
  add(bench.run, bench_tol);
  return {failing == 0 && checked > 0,
          std::to_string(failing) + " of " + std::to_string(checked) +
              " converged runs fail; worst residual/tol " + fmt("%.3g", worst_ratio) +
              ", worst tail share " + fmt("%.3g", worst_tail)};
}

Outcome criterion5() {
  double worst = -1e300;
  std::size_t checks = 0;
  for (const auto& o : oracle_runs()) {
    const double L = lipschitz_bound(o.problem);
    const auto& rec = o.result.trace.records;
    for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
      worst = std::max(worst, descent_inequality_check(o.problem, o.result.trace, k, o.x_star, L));
      ++checks;
    }
  }
  return {worst <= 1e-6, "max LHS-RHS " + fmt("%.3g", worst) + " over " + std::to_string(checks) + " steps"};
}

WeightMatrix random_pairing(std::mt19937_64& rng, std::size_t m, double w) {
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  WeightMatrix a = WeightMatrix::identity(m);
  for (std::size_t p = 0; p + 1 < m; p += 2) {
    const std::size_t i = perm[p], j = perm[p + 1];
    a(i, i) = a(j, j) = 1.0 - w;
    a(i, j) = a(j, i) = w;
  }
  return a;
}

Outcome criterion6() {
  std::vector<NetworkSchedule> schedules{make_ring_alternating_pairs(6)};
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> m_dist(2, 5), period_dist(1, 3);
  std::uniform_real_distribution<double> w_dist(0.3, 0.5);
  while (schedules.size() < 11) {
    const std::size_t m = static_cast<std::size_t>(m_dist(rng));
    const std::size_t period = static_cast<std::size_t>(period_dist(rng));
    std::vector<WeightMatrix> mats;
    for (std::size_t t = 0; t < period; ++t) mats.push_back(random_pairing(rng, m, w_dist(rng)));
    auto s = make_explicit_periodic(mats, std::nullopt, period);
    if (validate_connectivity(s, 8 * period).ok()) schedules.push_back(std::move(s));
  }
  std::size_t violations = 0, checks = 0;
  double worst = 0.0;  // max deviation / bound
  for (const auto& s : schedules) {
    const auto b = contraction_bound(s.agents(), s.eta(), s.T());
    for (std::size_t st = 0; st < 2 * s.period().value_or(1); ++st) {
      WeightMatrix phi = s(st);
      for (std::size_t k = st; k <= st + 50; ++k) {
        if (k > st) phi = s(k) * phi;
        const double dev = phi_deviation(phi), bound = b.at(k - st);
        worst = std::max(worst, dev / bound);
        if (dev > bound + 1e-12) ++violations;
        ++checks;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) +
                               " (k, s) pairs over " + std::to_string(schedules.size()) +
                               " schedules; max deviation/bound " + fmt("%.3g", worst)};
}

RegressionConfig reduced_bench() {
  RegressionConfig c;
  c.d = 10;
  c.samples_per_agent = 300;
  c.validation_samples = 20000;
  return c;
}

RunConfig reduced_run() {
  RunConfig rc;
  rc.iterate_tolerance = 3e-4;
  rc.max_iterations = 500;
  rc.inner_tolerance = 1e-9;
  return rc;
}

Outcome criterion7(const BenchmarkSummary& s) {
  // per-agent objective gap to the centralized value, sampled along the trace
  const auto inst = build_regression_problem(reduced_bench());
  const double fs = *s.oracle_objective;
  std::string path;
  for (std::size_t k : {0u, 50u, 100u, 200u, 300u}) {
    if (k >= s.run.trace.records.size()) break;
    const auto& rec = s.run.trace.records[k];
    path += " " + fmt("%.3g", std::abs(objective_at_shared(inst.problem, rec.v, rec.x) - fs) /
                                  std::abs(fs));
  }
  const bool ok = s.converged && s.iterations <= 500 && s.consensus_residual < 1e-3 &&
                  s.violation.rate <= s.tight.value;
  return {ok, std::to_string(s.iterations) + " iterations, residual " + fmt("%.2e", s.consensus_residual) +
                  ", violation " + fmt("%.5f", s.violation.rate) + " <= tight " + fmt("%.4f", s.tight.value) +
                  ", oracle gap " + fmt("%.2e", *s.oracle_gap) + "; gap at k=0,50,100,200,300:" + path};
}

Outcome criterion8() {
  // two-agent run summary and reduced bench summary, three repeats at
  // parallelism 1, 2 and 4
  ExperimentConfig run_cfg;
  run_cfg.problem = two_agent_problem();
  run_cfg.network.kind = "complete_uniform";
  run_cfg.network.m = 2;
  run_cfg.run.iterate_tolerance = 1e-7;
  run_cfg.run.inner_tolerance = 1e-12;
  ExperimentConfig bench_cfg;
  bench_cfg.benchmark = reduced_bench();
  bench_cfg.network.kind = "ring_alternating_pairs";
  bench_cfg.network.m = 6;
  bench_cfg.run = reduced_run();

  std::string first_run, first_bench;
  std::size_t differ = 0;
  for (int rep = 0; rep < 3; ++rep) {
    for (std::size_t w : {1u, 2u, 4u}) {
      run_cfg.run.parallelism = w;
      const auto r = run(*run_cfg.problem, make_schedule(run_cfg.network), run_cfg.steps, run_cfg.run);
      const std::string a = run_summary(run_cfg, r).dump(2);
      bench_cfg.run.parallelism = w;
      BenchmarkOptions opt;
      opt.workers = w;
      const auto b = run_benchmark(*bench_cfg.benchmark, bench_cfg.run, opt);
      const std::string bs = bench_summary(bench_cfg, b).dump(2);
      if (first_run.empty()) first_run = a, first_bench = bs;
      if (a != first_run) ++differ;
      if (bs != first_bench) ++differ;
    }
  }
  return {differ == 0, std::to_string(differ) + " differing summaries out of 18"};
}

Outcome criterion9() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_small = 0.0, worst_big = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t) % 3;
    Vector h(n), g(n), a(n), lo(n), hi(n), center(n);
    for (std::size_t j = 0; j < n; ++j) {
      h[j] = 0.2 + std::abs(u(rng));
      g[j] = 2.0 * u(rng);
      a[j] = u(rng);
      lo[j] = -1.0 + 0.5 * u(rng);
      hi[j] = lo[j] + 0.5 + std::abs(u(rng));
      center[j] = 0.5 * u(rng);
    }
    ConvexSet X = ConvexSet::box(lo, hi);
    if (t % 3 == 1) X = ConvexSet::ball(center, 0.5 + std::abs(u(rng)));
    if (t % 3 == 2) X = ConvexSet::halfspace(a, 0.2 * u(rng));
    const ObjectiveTerm f = ObjectiveTerm::sum({ObjectiveTerm::quadratic_diagonal(h, g),
                                                ObjectiveTerm::l1(n, 0.3 * std::abs(u(rng)))});
    Vector z(n);
    for (double& v : z) v = 3.0 * u(rng);
    ProxRequest small{f, X, z, 1e-6, 1e-12};
    worst_small = std::max(worst_small, distance(local_solve(small).minimizer, project(X, z, 1e-12)));
    ProxRequest big{f, X, z, 1e6, 1e-12};
    ProxOptions opt;
    opt.tol = 1e-12;
    const Vector xs = LocalProblem(f, X).argmin(opt);
    worst_big = std::max(worst_big, distance(local_solve(big).minimizer, xs));
  }
  return {worst_small <= 1e-3 && worst_big <= 1e-3,
          "max distance to projection " + fmt("%.2e", worst_small) + ", to constrained minimizer " +
              fmt("%.2e", worst_big)};
}

}  // namespace

int main() {
  std::size_t failed = 0;
  auto report = [&](int id, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %d: %s  %s  (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  BenchmarkSummary bench;
  auto bench_once = [&]() -> const BenchmarkSummary& {
    if (bench.iterations == 0) {
      BenchmarkOptions opt;
      opt.oracle = true;
      opt.workers = 4;
      bench = run_benchmark(reduced_bench(), reduced_run(), opt);
    }
    return bench;
  };

  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, [&] { return criterion4(bench_once(), reduced_run().iterate_tolerance); });
  report(5, criterion5);
  report(6, criterion6);
  report(7, [&] { return criterion7(bench_once()); });
  report(8, criterion8);
  report(9, criterion9);
  std::printf("%zu of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
