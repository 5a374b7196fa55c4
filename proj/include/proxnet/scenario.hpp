#pragma once

// Scenario-approach bounds on the violation probability of a sampled
// program, sample-size inversion, scenario program assembly, and Monte
// Carlo violation estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "proxnet/consensus.hpp"
#include "proxnet/model.hpp"

namespace proxnet {

/// log C(n, k) via log-gamma.
inline double log_binomial(double n, double k) {
  if (k < 0.0 || k > n) throw InvalidArgument("log_binomial: need 0 <= k <= n");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// A probability bound. `trivial` is set when the formula gave no
/// information and the value was clamped to 1 (or 0).
struct Bound {
  double value = 1.0;
  bool trivial = true;
};

namespace detail {

inline void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
}

// 1 - (num / C(n, k))^{1/(n-k)} evaluated as -expm1(log(num / C) / (n - k)).
inline Bound scenario_formula(std::uint64_t n, std::uint64_t k, double log_num) {
  if (n <= k) return {1.0, true};
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  const double e = -std::expm1((log_num - log_binomial(nn, kk)) / (nn - kk));
  if (!(e < 1.0)) return {1.0, true};
  if (e <= 0.0) return {0.0, true};
  return {e, false};
}

}  // namespace detail

/// 1 - (beta / C(N, d))^{1/(N-d)}
inline Bound epsilon_common(std::uint64_t N, std::uint64_t d, double beta) {
  detail::check_beta(beta);
  return detail::scenario_formula(N, d, std::log(beta));
}

/// Root in eps of  sum_{k<d} C(N,k) eps^k (1-eps)^{N-k} = beta.
inline Bound epsilon_common_improved(std::uint64_t N, std::uint64_t d, double beta) {
  detail::check_beta(beta);
  if (d == 0) throw InvalidArgument("improved bound needs d >= 1");
  if (N < d) return {1.0, true};
  const double n = static_cast<double>(N);
  auto tail = [&](double eps) {
    return boost::math::cdf(boost::math::binomial_distribution<double>(n, eps),
                            static_cast<double>(d - 1));
  };
  double lo = 0.0, hi = 1.0;  // tail(lo) > beta > tail(hi)
  for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (tail(mid) > beta ? lo : hi) = mid;
  }
  const double root = std::abs(tail(lo) - beta) < std::abs(tail(hi) - beta) ? lo : hi;
  return {root, false};
}

/// Residual |tail(eps) - beta| of the improved-bound equation.
inline double improved_residual(std::uint64_t N, std::uint64_t d, double beta, double eps) {
  const double t = boost::math::cdf(
      boost::math::binomial_distribution<double>(static_cast<double>(N), eps),
      static_cast<double>(d - 1));
  return std::abs(t - beta);
}

/// 1 - (beta_i / ((d+1) C(N_i, k)))^{1/(N_i-k)}
inline Bound epsilon_i_k(std::uint64_t N_i, double beta_i, std::uint64_t d, std::uint64_t k) {
  detail::check_beta(beta_i);
  if (k > d) throw InvalidArgument("epsilon_i_k: k exceeds d");
  return detail::scenario_formula(N_i, k, std::log(beta_i) - std::log(static_cast<double>(d + 1)));
}

struct ScenarioConfig {
  std::vector<std::uint64_t> samples;  // N_i
  std::vector<double> betas;           // beta_i
  std::uint64_t d = 0;

  std::size_t m() const { return samples.size(); }
  double beta() const {
    double s = 0.0;
    for (double b : betas) s += b;
    return s;
  }
  std::uint64_t total_samples() const {
    std::uint64_t s = 0;
    for (auto n : samples) s += n;
    return s;
  }

  /// Same N for every agent and beta_i = beta / m.
  static ScenarioConfig uniform(std::size_t m, std::uint64_t N, double beta, std::uint64_t d) {
    if (m == 0) throw InvalidArgument("scenario config needs m >= 1");
    detail::check_beta(beta);
    return {std::vector<std::uint64_t>(m, N),
            std::vector<double>(m, beta / static_cast<double>(m)), d};
  }

  void validate() const {
    if (samples.empty()) throw InvalidArgument("scenario config has no agents");
    if (samples.size() != betas.size()) {
      throw DimensionError("scenario config: " + std::to_string(samples.size()) +
                           " sample counts but " + std::to_string(betas.size()) + " betas");
    }
    for (double b : betas) detail::check_beta(b);
    if (beta() >= 1.0) throw InvalidArgument("scenario config: sum of beta_i must be < 1");
    for (auto n : samples) {
      if (n == 0) throw InvalidArgument("scenario config: sample counts must be positive");
    }
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct EpsilonReport {
  std::string method;
  double value = 1.0;
  bool trivial = true;
  std::vector<double> per_agent;
  std::vector<std::uint64_t> allocation;  // d_i at the maximum (tight only)
  ScenarioConfig inputs;
};

/// Sum over agents of 1 - (beta_i / C(N_i, d))^{1/(N_i-d)}.
inline EpsilonReport epsilon_naive(const ScenarioConfig& cfg) {
  cfg.validate();
  EpsilonReport r;
  r.method = "naive";
  r.inputs = cfg;
  double sum = 0.0;
  bool trivial = false;
  for (std::size_t i = 0; i < cfg.m(); ++i) {
    const Bound b = epsilon_common(cfg.samples[i], cfg.d, cfg.betas[i]);
    r.per_agent.push_back(b.value);
    sum += b.value;
    trivial = trivial || b.trivial;
  }
  r.value = std::min(sum, 1.0);
  r.trivial = trivial || sum >= 1.0;
  return r;
}

/// max sum_i eps_i(d_i) over nonnegative integers with sum d_i <= d, solved
/// exactly by a budget DP.
inline EpsilonReport epsilon_tight(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t m = cfg.m();
  const std::size_t D = cfg.d;
  std::vector<std::vector<double>> table(m, std::vector<double>(D + 1));
  bool any_trivial = false;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k <= D; ++k) {
      const Bound b = epsilon_i_k(cfg.samples[i], cfg.betas[i], D, k);
      table[i][k] = b.value;
    }
  }
  // best[i][b]: max over agents i..m-1 using budget at most b
  std::vector<std::vector<double>> best(m + 1, std::vector<double>(D + 1, 0.0));
  std::vector<std::vector<std::size_t>> pick(m, std::vector<std::size_t>(D + 1, 0));
  for (std::size_t i = m; i-- > 0;) {
    for (std::size_t b = 0; b <= D; ++b) {
      double v = -1.0;
      for (std::size_t t = 0; t <= b; ++t) {
        const double cand = table[i][t] + best[i + 1][b - t];
        if (cand > v) {
          v = cand;
          pick[i][b] = t;
        }
      }
      best[i][b] = v;
    }
  }
  EpsilonReport r;
  r.method = "tight";
  r.inputs = cfg;
  std::size_t budget = D;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t t = pick[i][budget];
    r.allocation.push_back(t);
    r.per_agent.push_back(table[i][t]);
    if (table[i][t] >= 1.0) any_trivial = true;
    budget -= t;
  }
  r.value = std::min(best[0][D], 1.0);
  r.trivial = any_trivial || best[0][D] >= 1.0;
  return r;
}

/// Common-resource report on the pooled sample count.
inline EpsilonReport epsilon_common_report(const ScenarioConfig& cfg, bool improved = false) {
  cfg.validate();
  EpsilonReport r;
  r.method = improved ? "common_improved" : "common";
  r.inputs = cfg;
  const Bound b = improved ? epsilon_common_improved(cfg.total_samples(), cfg.d, cfg.beta())
                           : epsilon_common(cfg.total_samples(), cfg.d, cfg.beta());
  r.value = b.value;
  r.trivial = b.trivial;
  return r;
}

// ---------------------------------------------------------------------------
// sample-size inversion

enum class InversionMode { common, tight_uniform };

struct SampleSize {
  std::uint64_t samples = 0;  // N (common) or N_i (tight_uniform)
  double achieved = 1.0;
};

/// Least N with bound(N) <= target, by bisection on a monotone bound.
inline SampleSize invert_sample_size(double target, double beta, std::uint64_t d,
                                     InversionMode mode, std::size_t m = 1,
                                     std::uint64_t cap = 1'000'000'000ULL) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("target epsilon must lie in (0,1)");
  detail::check_beta(beta);
  if (mode == InversionMode::tight_uniform && m == 0) throw InvalidArgument("m must be >= 1");
  auto bound = [&](std::uint64_t N) {
    if (mode == InversionMode::common) return epsilon_common(N, d, beta).value;
    return epsilon_tight(ScenarioConfig::uniform(m, N, beta, d)).value;
  };
  std::uint64_t lo = d;  // bound(lo) = 1 > target
  std::uint64_t hi = std::max<std::uint64_t>(d + 1, 16);
  while (bound(hi) > target) {
    lo = hi;
    if (hi >= cap) {
      throw InvalidArgument("target epsilon not reachable with at most " + std::to_string(cap) +
                            " samples");
    }
    hi = std::min(cap, 2 * hi);
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (bound(mid) > target ? lo : hi) = mid;
  }
  return {hi, bound(hi)};
}

// ---------------------------------------------------------------------------
// uncertain constraints

/// X_i(delta) for each agent, with a sampler for delta. Both callbacks must
/// be pure (the sampler may only touch the rng it is given).
struct UncertainConstraintFamily {
  std::size_t agents = 0;
  std::size_t dimension = 0;
  std::function<Vector(std::mt19937_64&)> sample;
  std::function<ConvexSet(std::size_t agent, const Vector& delta)> set;
  /// Optional fast membership test; defaults to contains(set(i, delta), x, tol).
  std::function<bool(std::size_t agent, const Vector& delta, std::span<const double> x,
                     double tol)>
      member;

  bool contains(std::size_t agent, const Vector& delta, std::span<const double> x,
                double tol) const {
    if (member) return member(agent, delta, x, tol);
    return proxnet::contains(set(agent, delta), x, tol);
  }
};

using ScenarioSets = std::vector<std::vector<Vector>>;  // S_i

/// counts[i] i.i.d. draws for agent i; agent i uses the stream seeded by
/// (seed, i).
inline ScenarioSets draw_scenarios(const UncertainConstraintFamily& fam,
                                   const std::vector<std::uint64_t>& counts, std::uint64_t seed) {
  if (counts.size() != fam.agents) throw DimensionError("draw_scenarios: one count per agent");
  ScenarioSets out(fam.agents);
  for (std::size_t i = 0; i < fam.agents; ++i) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(sq);
    out[i].reserve(counts[i]);
    for (std::uint64_t j = 0; j < counts[i]; ++j) out[i].push_back(fam.sample(rng));
  }
  return out;
}

/// Replaces each agent's constraint by its deterministic set intersected
/// with X_i(delta) for every delta in S_i.
inline ProblemSpec build_scenario_program(const ProblemSpec& base,
                                          const UncertainConstraintFamily& fam,
                                          const ScenarioSets& scenarios) {
  if (scenarios.size() != base.agents.size() || fam.agents != base.agents.size()) {
    throw DimensionError("build_scenario_program: agent count mismatch");
  }
  ProblemSpec out = base;
  for (std::size_t i = 0; i < base.agents.size(); ++i) {
    if (scenarios[i].empty()) continue;
    std::vector<ConvexSet> members{base.agents[i].constraint};
    for (const auto& delta : scenarios[i]) members.push_back(fam.set(i, delta));
    out.agents[i].constraint = ConvexSet::intersection(std::move(members));
  }
  return out;
}

struct ViolationEstimate {
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  double rate = 0.0;
  double lower = 0.0;  // 95% Clopper-Pearson
  double upper = 1.0;
};

inline constexpr std::uint64_t kViolationShard = 4096;

/// Fraction of M fresh delta for which x leaves some X_i(delta). Samples
/// are drawn in fixed shards, each with its own seeded stream, so the count
/// does not depend on how shards are spread over workers.
inline ViolationEstimate estimate_violation(std::span<const double> x,
                                            const UncertainConstraintFamily& fam,
                                            std::uint64_t M, std::uint64_t seed,
                                            std::size_t workers = 1, double tol = 1e-7) {
  if (M == 0) throw InvalidArgument("estimate_violation: M must be >= 1");
  if (x.size() != fam.dimension) throw DimensionError("estimate_violation: point dimension");
  const std::size_t shards = static_cast<std::size_t>((M + kViolationShard - 1) / kViolationShard);
  std::vector<std::uint64_t> hits(shards, 0);
  detail::parallel_for(shards, workers, [&](std::size_t s) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(s), 0x76u};
    std::mt19937_64 rng(sq);
    const std::uint64_t begin = s * kViolationShard;
    const std::uint64_t end = std::min<std::uint64_t>(M, begin + kViolationShard);
    for (std::uint64_t t = begin; t < end; ++t) {
      const Vector delta = fam.sample(rng);
      for (std::size_t i = 0; i < fam.agents; ++i) {
        if (!fam.contains(i, delta, x, tol)) {
          ++hits[s];
          break;
        }
      }
    }
  });
  ViolationEstimate e;
  e.samples = M;
  for (auto h : hits) e.violations += h;
  e.rate = static_cast<double>(e.violations) / static_cast<double>(M);
  using boost::math::binomial_distribution;
  const double n = static_cast<double>(M), k = static_cast<double>(e.violations);
  e.lower = binomial_distribution<double>::find_lower_bound_on_p(n, k, 0.025);
  e.upper = binomial_distribution<double>::find_upper_bound_on_p(n, k, 0.025);
  return e;
}

}  // namespace proxnet
