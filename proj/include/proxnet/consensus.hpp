#pragma once

// Distributed proximal minimization driver: mixing, local solves, the
// stop rule on iterate changes, diagnostics and a centralized reference solve.

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "proxnet/model.hpp"
#include "proxnet/network.hpp"
#include "proxnet/prox.hpp"

namespace proxnet {

// ---------------------------------------------------------------------------
// step coefficients

class StepSchedule {
 public:
  enum class Family { harmonic, explicit_values };

  /// c(k) = alpha / (k + 1)
  static StepSchedule harmonic(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw InvalidArgument("harmonic step: alpha must be positive and finite");
    }
    StepSchedule s;
    s.family_ = Family::harmonic;
    s.alpha_ = alpha;
    return s;
  }

  /// A finite list; must be positive and non-increasing.
  static StepSchedule explicit_values(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("explicit step list is empty");
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!(values[k] > 0.0) || !std::isfinite(values[k])) {
        throw InvalidArgument("explicit step " + std::to_string(k) + " is not positive");
      }
      if (k > 0 && values[k] > values[k - 1]) {
        throw InvalidArgument("explicit steps increase at index " + std::to_string(k));
      }
    }
    StepSchedule s;
    s.family_ = Family::explicit_values;
    s.values_ = std::move(values);
    return s;
  }

  double operator()(std::size_t k) const {
    if (family_ == Family::harmonic) return alpha_ / static_cast<double>(k + 1);
    if (k >= values_.size()) {
      throw InvalidArgument("explicit step list exhausted at k=" + std::to_string(k));
    }
    return values_[k];
  }

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& values() const { return values_; }
  /// Number of usable steps (unbounded for harmonic).
  std::optional<std::size_t> length() const {
    if (family_ == Family::harmonic) return std::nullopt;
    return values_.size();
  }

  /// Notes on what could not be verified. Divergence of sum c and
  /// summability of sum c^2 are asymptotic and only hold by construction for
  /// the harmonic family.
  std::vector<std::string> notes() const {
    if (family_ == Family::harmonic) return {};
    return {"explicit step list: sum c = inf and sum c^2 < inf cannot be checked on a finite list"};
  }

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  StepSchedule() = default;
  Family family_ = Family::harmonic;
  double alpha_ = 1.0;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// configuration, trace, result

enum class TraceLevel { none, full };

struct RunConfig {
  std::size_t max_iterations = 5000;
  double iterate_tolerance = 1e-6;
  std::optional<std::size_t> termination_window;  // default T * diameter
  double inner_tolerance = 1e-10;
  std::size_t max_inner_iterations = 20000;
  TraceLevel trace = TraceLevel::full;
  std::size_t parallelism = 1;
  bool allow_invalid = false;
  bool diagnostics = false;  // eps(k), v_bar(k); needs an interior point
  std::size_t connectivity_horizon = 0;  // 0: chosen from T and the period
};

/// State at iteration k plus what the step k -> k+1 produced. The record
/// for the final iterate has empty z and e_norms.
struct IterationRecord {
  std::size_t k = 0;
  double c = 0.0;
  std::vector<Vector> x;      // x_i(k), full agent vectors
  std::vector<Vector> z;      // z_i(k), shared block
  std::vector<double> e_norms;  // ||x_i(k+1) - z_i(k)||
  std::vector<double> change;   // ||x_i(k+1) - x_i(k)||
  Vector v;                   // mean of shared blocks
  double consensus_residual = 0.0;
  std::vector<double> objectives;  // f_i(x_i(k))
  double cumulative_error_sq = 0.0;  // sum_{t <= k+1} sum_i ||e_i(t)||^2
  std::size_t inner_iterations = 0;
  std::optional<double> eps;  // sum_i dist(v, X_i)
  std::optional<Vector> v_bar;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  bool empty() const { return records.empty(); }
};

struct RunResult {
  std::vector<Vector> x;
  bool converged = false;
  std::size_t iterations = 0;
  double consensus_residual = 0.0;
  double objective_at_v = 0.0;
  std::optional<double> objective_at_v_bar;
  Vector v;
  std::optional<Vector> v_bar;
  double cumulative_error_sq = 0.0;
  std::size_t termination_window = 1;
  std::vector<std::string> validation_issues;
  IterationTrace trace;
};

// ---------------------------------------------------------------------------
// building blocks

/// z_i = sum_j A(i,j) x_j on the first `shared` coordinates.
inline std::vector<Vector> mix(const WeightMatrix& a, const std::vector<Vector>& states,
                               std::optional<std::size_t> shared = std::nullopt) {
  const std::size_t m = a.size();
  if (states.size() != m) {
    throw DimensionError("mix: " + std::to_string(states.size()) + " states for " +
                         std::to_string(m) + " agents");
  }
  if (m == 0) return {};
  const std::size_t n = shared.value_or(states.front().size());
  for (const auto& s : states) {
    if (s.size() < n || (!shared && s.size() != n)) throw DimensionError("mix: state dimension");
  }
  std::vector<Vector> z(m, Vector(n, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double w = a(i, j);
      if (w == 0.0) continue;
      for (std::size_t t = 0; t < n; ++t) z[i][t] += w * states[j][t];
    }
  }
  return z;
}

inline Vector shared_mean(const std::vector<Vector>& x, std::size_t n) {
  Vector v(n, 0.0);
  for (const auto& xi : x) {
    for (std::size_t t = 0; t < n; ++t) v[t] += xi[t];
  }
  for (double& t : v) t /= static_cast<double>(x.size());
  return v;
}

inline double consensus_residual(const std::vector<Vector>& x, std::span<const double> v) {
  double r = 0.0;
  for (const auto& xi : x) r = std::max(r, distance(std::span(xi).first(v.size()), v));
  return r;
}

struct FeasibleAverage {
  Vector v_bar;
  double eps = 0.0;
};

/// eps = sum_i dist(v, X_i);  v_bar = (eps * center + rho * v) / (eps + rho).
inline FeasibleAverage feasible_average(std::span<const double> v, const InteriorPoint& ip,
                                        const std::vector<ConvexSet>& sets, double tol = 1e-11) {
  if (!(ip.radius > 0.0)) throw InvalidArgument("feasible_average: radius must be positive");
  if (ip.center.size() != v.size()) throw DimensionError("feasible_average: center dimension");
  FeasibleAverage out;
  for (const auto& s : sets) out.eps += distance(s, v, tol);
  const double den = out.eps + ip.radius;
  out.v_bar.resize(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) {
    out.v_bar[t] = (out.eps * ip.center[t] + ip.radius * v[t]) / den;
  }
  return out;
}

namespace detail {

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// failure in index order is rethrown, so errors do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  auto body = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    body(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
      if (lo < hi) pool.emplace_back(body, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::vector<LocalProblem> compile_agents(const ProblemSpec& p) {
  std::vector<LocalProblem> out;
  out.reserve(p.agents.size());
  for (const auto& a : p.agents) out.emplace_back(a.objective, a.constraint, a.shared_dim());
  return out;
}

}  // namespace detail

/// Default starting points: given initial points, otherwise each agent's
/// local minimizer of f_i over X_i.
inline std::vector<Vector> initial_states(const ProblemSpec& p, const RunConfig& cfg = {}) {
  const auto agents = detail::compile_agents(p);
  std::vector<Vector> x(p.agents.size());
  ProxOptions opt;
  opt.tol = std::max(cfg.inner_tolerance, 1e-12);
  opt.max_inner_iters = cfg.max_inner_iterations;
  detail::parallel_for(x.size(), cfg.parallelism, [&](std::size_t i) {
    try {
      x[i] = p.agents[i].initial ? *p.agents[i].initial : agents[i].argmin(opt);
    } catch (const std::exception& e) {
      throw AgentSolveError(i, 0, std::string("initialization: ") + e.what());
    }
  });
  return x;
}

struct StepOutput {
  std::vector<Vector> x_next;
  std::vector<Vector> z;
  std::vector<double> e_norms;
  std::size_t inner_iterations = 0;
};

/// One synchronous iteration: mix with A(k), then every agent solves its
/// proximal problem with c(k). `duals` (optional) carries per-agent warm
/// starts between iterations.
inline StepOutput step(const ProblemSpec& p, const NetworkSchedule& sched,
                       const StepSchedule& steps, std::size_t k, const std::vector<Vector>& x,
                       const RunConfig& cfg = {}, std::vector<DualState>* duals = nullptr,
                       const std::vector<LocalProblem>* compiled = nullptr) {
  const std::size_t m = p.agents.size();
  if (x.size() != m || sched.agents() != m) throw DimensionError("step: agent count mismatch");
  std::vector<LocalProblem> local;
  if (compiled == nullptr) {
    local = detail::compile_agents(p);
    compiled = &local;
  }
  const double c = steps(k);
  StepOutput out;
  out.z = mix(sched(k), x, p.dimension);
  out.x_next.resize(m);
  out.e_norms.resize(m);
  std::vector<std::size_t> inner(m, 0);
  ProxOptions opt;
  opt.tol = cfg.inner_tolerance;
  opt.max_inner_iters = cfg.max_inner_iterations;
  detail::parallel_for(m, cfg.parallelism, [&](std::size_t i) {
    try {
      const DualState* warm = duals != nullptr ? &(*duals)[i] : nullptr;
      ProxResult r = (*compiled)[i].solve(out.z[i], c, opt, &x[i], warm);
      out.e_norms[i] = distance(std::span(r.minimizer).first(p.dimension), out.z[i]);
      inner[i] = r.inner_iterations;
      out.x_next[i] = std::move(r.minimizer);
      if (duals != nullptr) (*duals)[i] = std::move(r.duals);
    } catch (const std::exception& e) {
      throw AgentSolveError(i, k, e.what());
    }
  });
  out.inner_iterations = std::accumulate(inner.begin(), inner.end(), std::size_t{0});
  return out;
}

/// All checks `run` performs before iterating.
struct RunValidation {
  std::vector<std::string> issues;
  ConnectivityReport connectivity;
  std::vector<std::string> notes;
};

inline RunValidation validate_run(const ProblemSpec& p, const NetworkSchedule& sched,
                                  const StepSchedule& steps, const RunConfig& cfg) {
  RunValidation out;
  out.issues = validate_problem(p);
  if (sched.agents() != p.agents.size()) {
    out.issues.push_back("network has " + std::to_string(sched.agents()) + " agents, problem has " +
                         std::to_string(p.agents.size()));
    return out;
  }
  std::size_t horizon = cfg.connectivity_horizon;
  if (horizon == 0) horizon = std::max<std::size_t>({4 * sched.T(), 2 * sched.period().value_or(1), 8});
  for (std::size_t k = 0; k < horizon; ++k) {
    for (const auto& v : validate_weights(sched(k), sched.eta())) {
      out.issues.push_back("A(" + std::to_string(k) + "): " + v);
    }
  }
  out.connectivity = validate_connectivity(sched, horizon);
  for (const auto& v : out.connectivity.violations) out.issues.push_back(v);
  if (auto len = steps.length(); len && *len < cfg.max_iterations) {
    out.issues.push_back("explicit step list shorter than max_iterations");
  }
  if (!(cfg.iterate_tolerance > 0.0) || !(cfg.inner_tolerance > 0.0)) {
    out.issues.push_back("tolerances must be positive");
  }
  if (cfg.termination_window && *cfg.termination_window == 0) {
    out.issues.push_back("termination window must be at least 1");
  }
  out.notes = steps.notes();
  return out;
}

inline double total_objective(const ProblemSpec& p, const std::vector<Vector>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.agents.size(); ++i) s += evaluate(p.agents[i].objective, x[i]);
  return s;
}

/// sum_i f_i at a common shared point; private blocks are taken from `x`.
inline double objective_at_shared(const ProblemSpec& p, std::span<const double> y,
                                  const std::vector<Vector>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    Vector xi = x[i];
    std::copy(y.begin(), y.end(), xi.begin());
    s += evaluate(p.agents[i].objective, xi);
  }
  return s;
}

/// Algorithm driver. Stops once every agent's iterate change stays within
/// `iterate_tolerance` for `termination_window` consecutive iterations.
inline RunResult run(const ProblemSpec& p, const NetworkSchedule& sched, const StepSchedule& steps,
                     const RunConfig& cfg = {}) {
  const RunValidation val = validate_run(p, sched, steps, cfg);
  if (!val.issues.empty() && !cfg.allow_invalid) {
    throw ValidationError("run refused: " + val.issues.front(), val.issues);
  }
  RunResult res;
  res.validation_issues = val.issues;
  {
    std::size_t w = sched.T() * std::max<std::size_t>(val.connectivity.diameter, 1);
    res.termination_window = cfg.termination_window.value_or(std::max<std::size_t>(w, 1));
  }
  const std::size_t m = p.agents.size();
  const std::size_t n = p.dimension;
  const auto local = detail::compile_agents(p);
  const bool diag = cfg.diagnostics && p.interior.has_value() && !p.has_private_blocks();
  std::vector<ConvexSet> sets;
  for (const auto& a : p.agents) sets.push_back(a.constraint);

  std::vector<Vector> x = initial_states(p, cfg);
  std::vector<DualState> duals(m);
  double cumulative = 0.0;
  std::size_t calm = 0;

  auto snapshot = [&](std::size_t k) {
    IterationRecord r;
    r.k = k;
    r.x = x;
    r.v = shared_mean(x, n);
    r.consensus_residual = consensus_residual(x, r.v);
    r.objectives.resize(m);
    for (std::size_t i = 0; i < m; ++i) r.objectives[i] = evaluate(p.agents[i].objective, x[i]);
    if (diag) {
      FeasibleAverage fa = feasible_average(r.v, *p.interior, sets);
      r.eps = fa.eps;
      r.v_bar = std::move(fa.v_bar);
    }
    r.cumulative_error_sq = cumulative;
    return r;
  };

  std::size_t k = 0;
  for (; k < cfg.max_iterations; ++k) {
    IterationRecord rec = snapshot(k);
    StepOutput s = step(p, sched, steps, k, x, cfg, &duals, &local);
    rec.c = steps(k);
    rec.z = std::move(s.z);
    rec.e_norms = s.e_norms;
    rec.inner_iterations = s.inner_iterations;
    rec.change.resize(m);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      cumulative += s.e_norms[i] * s.e_norms[i];
      rec.change[i] = distance(s.x_next[i], x[i]);
      worst = std::max(worst, rec.change[i]);
    }
    rec.cumulative_error_sq = cumulative;
    if (cfg.trace == TraceLevel::full) res.trace.records.push_back(std::move(rec));
    x = std::move(s.x_next);
    calm = worst <= cfg.iterate_tolerance ? calm + 1 : 0;
    if (calm >= res.termination_window) {
      res.converged = true;
      ++k;
      break;
    }
  }
  IterationRecord last = snapshot(k);
  res.iterations = k;
  res.x = x;
  res.v = last.v;
  res.consensus_residual = last.consensus_residual;
  res.objective_at_v = objective_at_shared(p, last.v, x);
  res.cumulative_error_sq = cumulative;
  if (last.v_bar) {
    res.v_bar = last.v_bar;
    res.objective_at_v_bar = objective_at_shared(p, *last.v_bar, x);
  }
  if (cfg.trace == TraceLevel::full) res.trace.records.push_back(std::move(last));
  return res;
}

// ---------------------------------------------------------------------------
// diagnostics

/// Upper bound on the Lipschitz constant of f over the bounding box of X:
/// max over the box of ||h.x + g|| + ||theta|| + the coupled-gradient bound.
inline double lipschitz_bound(const ObjectiveTerm& f, const ConvexSet& X) {
  const SeparableForm form = separate(f);
  const auto bb = bounding_box(flatten(X));
  if (!bb) throw InvalidArgument("lipschitz_bound: set has no bounding box");
  const std::size_t n = form.dim();
  double smooth_sq = 0.0, theta_sq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = std::abs(form.h[j] * bb->lower[j] + form.g[j]);
    const double b = std::abs(form.h[j] * bb->upper[j] + form.g[j]);
    smooth_sq += std::max(a, b) * std::max(a, b);
    theta_sq += form.theta[j] * form.theta[j];
  }
  double coupled = 0.0;
  for (const auto& c : form.coupled) {
    double lo = -c.b, hi = -c.b;
    for (std::size_t j = 0; j < n; ++j) {
      lo += std::min(c.a[j] * bb->lower[j], c.a[j] * bb->upper[j]);
      hi += std::max(c.a[j] * bb->lower[j], c.a[j] * bb->upper[j]);
    }
    coupled += 2.0 * std::max(std::abs(lo), std::abs(hi)) * norm(c.a);
  }
  return std::sqrt(smooth_sq) + std::sqrt(theta_sq) + coupled;
}

inline double lipschitz_bound(const ProblemSpec& p) {
  double l = 0.0;
  for (const auto& a : p.agents) l = std::max(l, lipschitz_bound(a.objective, a.constraint));
  return l;
}

/// Sampling estimate: max |f(x)-f(y)|/||x-y|| over `pairs` feasible pairs,
/// times `margin`. Cheaper but not guaranteed to bound the true constant.
inline double estimate_lipschitz(const ProblemSpec& p, std::size_t pairs = 1000,
                                 std::uint64_t seed = 11, double margin = 1.1) {
  double best = 0.0;
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& a = p.agents[i];
    const LocalProblem lp(a.objective, a.constraint);
    const auto pts = lp.feasible_probes(2 * pairs, seed + i, Vector(a.dimension(), 0.0));
    for (std::size_t t = 0; t + 1 < pts.size(); t += 2) {
      const double d = distance(pts[t], pts[t + 1]);
      if (d < 1e-12) continue;
      best = std::max(best, std::abs(evaluate(a.objective, pts[t]) -
                                     evaluate(a.objective, pts[t + 1])) / d);
    }
  }
  return margin * best;
}

/// LHS - RHS of the per-iteration descent inequality between records k and
/// k+1 of a diagnostics-enabled trace:
///   2c sum f_i(v_bar(k+1)) + sum ||e_i(k+1)||^2 + sum ||x_i(k+1) - x*||^2
///     <= 2c sum f_i(x*) + sum ||x_i(k) - x*||^2 + 2 L c sum ||x_i(k+1) - v_bar(k+1)||
inline double descent_inequality_check(const ProblemSpec& p, const IterationTrace& trace,
                                      std::size_t k, std::span<const double> x_star,
                                      double lipschitz) {
  if (p.has_private_blocks()) throw InvalidArgument("descent check needs a fully shared problem");
  if (k + 1 >= trace.records.size()) throw InvalidArgument("descent check: k out of range");
  const auto& now = trace.records[k];
  const auto& next = trace.records[k + 1];
  if (!next.v_bar) throw InvalidArgument("descent check: trace has no feasible averages");
  if (x_star.size() != p.dimension) throw DimensionError("descent check: x* dimension");
  const double c = now.c;
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& f = p.agents[i].objective;
    lhs += 2.0 * c * evaluate(f, *next.v_bar) + now.e_norms[i] * now.e_norms[i] +
           norm_sq(next.x[i] - Vector(x_star.begin(), x_star.end()));
    rhs += 2.0 * c * evaluate(f, x_star) +
           norm_sq(now.x[i] - Vector(x_star.begin(), x_star.end())) +
           2.0 * lipschitz * c * distance(next.x[i], *next.v_bar);
  }
  return lhs - rhs;
}

// ---------------------------------------------------------------------------
// centralized reference

/// The pooled problem on one vector: (y, u_1, ..., u_m) when agents have
/// private blocks, y otherwise. Returns objective, constraint, and each
/// agent's index map into the pooled vector.
struct PooledProblem {
  ObjectiveTerm objective = ObjectiveTerm::zero(0);
  ConvexSet constraint = ConvexSet::box({}, {});
  std::vector<std::vector<std::size_t>> index_maps;
  std::size_t dim = 0;
};

inline PooledProblem pool(const ProblemSpec& p) {
  if (p.agents.empty()) throw InvalidArgument("pool: no agents");
  PooledProblem out;
  const std::size_t n = p.dimension;
  std::size_t next = n;
  for (const auto& a : p.agents) {
    if (a.shared_dim() != n) throw DimensionError("pool: agent shared dimension");
    std::vector<std::size_t> map(a.dimension());
    for (std::size_t t = 0; t < n; ++t) map[t] = t;
    for (std::size_t t = n; t < a.dimension(); ++t) map[t] = next++;
    out.index_maps.push_back(std::move(map));
  }
  out.dim = next;
  std::vector<ObjectiveTerm> terms;
  std::vector<ConvexSet> sets;
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    terms.push_back(embed(p.agents[i].objective, out.index_maps[i], out.dim));
    sets.push_back(embed(p.agents[i].constraint, out.index_maps[i], out.dim));
  }
  out.objective = terms.size() == 1 ? terms.front() : ObjectiveTerm::sum(std::move(terms));
  out.constraint = sets.size() == 1 ? sets.front() : ConvexSet::intersection(std::move(sets));
  return out;
}

/// Minimizer of sum_i f_i over the intersection of the X_i, by proximal
/// point iterations on the pooled problem. Returns the full pooled vector.
inline Vector centralized_solve_pooled(const ProblemSpec& p, double tol = 1e-9,
                                       std::size_t max_iters = 100000) {
  const PooledProblem pooled = pool(p);
  const LocalProblem lp(pooled.objective, pooled.constraint);
  ProxOptions opt;
  opt.tol = tol;
  opt.max_inner_iters = max_iters;
  return lp.argmin(opt);
}

/// Shared block of the pooled minimizer.
inline Vector centralized_solve(const ProblemSpec& p, double tol = 1e-9,
                                std::size_t max_iters = 100000) {
  Vector x = centralized_solve_pooled(p, tol, max_iters);
  x.resize(p.dimension);
  return x;
}

}  // namespace proxnet
