// Two agents on the line: f1 = (x-1)^2 on [0,2], f2 = |x| on [0.5,3].
// The pooled minimizer is 0.5.

#include <iostream>

#include "proxnet/proxnet.hpp"

int main() {
  using namespace proxnet;
  ProblemSpec p;
  p.dimension = 1;
  AgentSpec a1;
  a1.objective = ObjectiveTerm::quadratic_diagonal({2.0}, {-2.0}, 1.0);
  a1.constraint = ConvexSet::box({0.0}, {2.0});
  AgentSpec a2;
  a2.objective = ObjectiveTerm::l1(1, 1.0);
  a2.constraint = ConvexSet::box({0.5}, {3.0});
  p.agents = {a1, a2};

  RunConfig cfg;
  cfg.iterate_tolerance = 1e-7;
  cfg.trace = TraceLevel::none;
  const RunResult r = run(p, make_complete_uniform(2), StepSchedule::harmonic(1.0), cfg);

  std::cout << "converged=" << r.converged << " iterations=" << r.iterations << "\n";
  for (std::size_t i = 0; i < r.x.size(); ++i) std::cout << "x" << i + 1 << " = " << r.x[i][0] << "\n";
  std::cout << "centralized = " << centralized_solve(p)[0] << "\n";
  return r.converged ? 0 : 2;
}
