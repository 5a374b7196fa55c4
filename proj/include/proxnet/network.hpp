#pragma once

// Time-varying communication networks as schedules of doubly stochastic
// weight matrices. Row convention: entry (i, j) is the weight agent i puts on
// agent j's iterate, so the mixing step is z = A x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "proxnet/linalg.hpp"

namespace proxnet {

using WeightMatrix = Matrix;

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kProductTol = 1e-10;

/// Checks nonnegativity, double stochasticity, diagonal >= eta and
/// "positive implies >= eta". Violations are returned, not thrown.
inline std::vector<std::string> validate_weights(const WeightMatrix& a, double eta,
                                                 double tol = kStochasticTol) {
  std::vector<std::string> out;
  const std::size_t m = a.size();
  if (m == 0) {
    out.emplace_back("weight matrix is empty");
    return out;
  }
  if (!(eta > 0.0 && eta < 1.0)) out.emplace_back("eta must lie in (0,1)");
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = a(i, j);
      row += v;
      col += a(j, i);
      if (!std::isfinite(v) || v < 0.0) {
        out.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) +
                      ") is negative or not finite");
      } else if (v > 0.0 && v < eta - tol) {
        out.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) +
                      ") is positive but below eta");
      }
    }
    if (std::abs(row - 1.0) > tol) {
      out.push_back("row " + std::to_string(i) + " sums to " + std::to_string(row) +
                    " (row stochasticity)");
    }
    if (std::abs(col - 1.0) > tol) {
      out.push_back("column " + std::to_string(i) + " sums to " + std::to_string(col) +
                    " (column stochasticity)");
    }
    if (a(i, i) < eta - tol) {
      out.push_back("diagonal entry " + std::to_string(i) + " is below eta");
    }
  }
  return out;
}

enum class ScheduleKind { complete_uniform, ring_alternating_pairs, explicit_periodic };

inline const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::complete_uniform: return "complete_uniform";
    case ScheduleKind::ring_alternating_pairs: return "ring_alternating_pairs";
    case ScheduleKind::explicit_periodic: return "explicit_periodic";
  }
  return "?";
}

/// Map k -> A(k) together with the constants the convergence theory needs.
class NetworkSchedule {
 public:
  using Generator = std::function<WeightMatrix(std::size_t)>;

  NetworkSchedule(std::size_t m, double eta, std::size_t T, std::optional<std::size_t> period,
                  Generator gen, ScheduleKind kind = ScheduleKind::explicit_periodic)
      : m_(m), eta_(eta), T_(T), period_(period), gen_(std::move(gen)), kind_(kind) {}

  WeightMatrix operator()(std::size_t k) const { return gen_(k); }
  std::size_t agents() const { return m_; }
  double eta() const { return eta_; }
  std::size_t T() const { return T_; }
  std::optional<std::size_t> period() const { return period_; }
  ScheduleKind kind() const { return kind_; }

 private:
  std::size_t m_;
  double eta_;
  std::size_t T_;
  std::optional<std::size_t> period_;
  Generator gen_;
  ScheduleKind kind_;
};

/// Constant schedule from a single matrix.
inline NetworkSchedule constant_schedule(WeightMatrix a, double eta) {
  const std::size_t m = a.size();
  return NetworkSchedule(m, eta, 1, 1, [a = std::move(a)](std::size_t) { return a; });
}

inline NetworkSchedule make_complete_uniform(std::size_t m) {
  if (m < 1) throw InvalidArgument("complete_uniform needs m >= 1");
  const double eta = m == 1 ? 0.5 : 1.0 / static_cast<double>(m);
  WeightMatrix a(m, 1.0 / static_cast<double>(m));
  return NetworkSchedule(m, eta, 1, 1, [a](std::size_t) { return a; },
                         ScheduleKind::complete_uniform);
}

/// Agents sit on a ring. Even steps pair (0,1),(2,3),...; odd steps pair
/// (1,2),(3,4),...,(m-1,0). Paired agents average with weights 1/2.
inline NetworkSchedule make_ring_alternating_pairs(std::size_t m) {
  if (m < 2) throw InvalidArgument("ring_alternating_pairs needs m >= 2");
  if (m % 2 != 0) throw InvalidArgument("ring_alternating_pairs needs an even agent count");
  auto gen = [m](std::size_t k) {
    WeightMatrix a(m);
    const std::size_t phase = k % 2;
    for (std::size_t p = 0; p < m / 2; ++p) {
      const std::size_t i = (2 * p + phase) % m;
      const std::size_t j = (i + 1) % m;
      a(i, i) = a(j, j) = 0.5;
      a(i, j) = a(j, i) = 0.5;
    }
    return a;
  };
  return NetworkSchedule(m, 0.5, 2, 2, gen, ScheduleKind::ring_alternating_pairs);
}

/// Cycles through `matrices`. eta defaults to the smallest positive entry
/// (capped at 1/2), T defaults to the period.
inline NetworkSchedule make_explicit_periodic(std::vector<WeightMatrix> matrices,
                                              std::optional<double> eta = std::nullopt,
                                              std::optional<std::size_t> T = std::nullopt) {
  if (matrices.empty()) throw InvalidArgument("explicit schedule needs at least one matrix");
  const std::size_t m = matrices.front().size();
  double e = 0.5;
  for (const auto& a : matrices) {
    if (a.size() != m) throw DimensionError("explicit schedule matrices differ in size");
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (a(i, j) > 0.0) e = std::min(e, a(i, j));
      }
    }
  }
  if (eta) e = *eta;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const auto v = validate_weights(matrices[k], e);
    if (!v.empty()) {
      throw InvalidArgument("explicit schedule matrix " + std::to_string(k) + ": " + v.front());
    }
  }
  const std::size_t period = matrices.size();
  return NetworkSchedule(
      m, e, T.value_or(period), period,
      [mats = std::move(matrices)](std::size_t k) { return mats[k % mats.size()]; },
      ScheduleKind::explicit_periodic);
}

struct ConnectivityReport {
  bool strongly_connected = false;
  std::size_t diameter = 0;
  std::size_t max_recurrence_gap = 0;
  std::size_t recurring_edges = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

namespace detail {

// Longest shortest path over all ordered pairs; nullopt if some pair is
// unreachable. adj[j] lists receivers i of edges (j, i).
inline std::optional<std::size_t> graph_diameter(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t m = adj.size();
  std::size_t diam = 0;
  for (std::size_t s = 0; s < m; ++s) {
    std::vector<std::size_t> dist(m, std::numeric_limits<std::size_t>::max());
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj[u]) {
        if (dist[v] == std::numeric_limits<std::size_t>::max()) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
    for (std::size_t v = 0; v < m; ++v) {
      if (dist[v] == std::numeric_limits<std::size_t>::max()) return std::nullopt;
      diam = std::max(diam, dist[v]);
    }
  }
  return diam;
}

}  // namespace detail

/// Checks the weight conditions on every step of the horizon, builds the set
/// of recurring edges (exact for periodic schedules: edges seen in the last
/// period; otherwise edges seen in the second half of the horizon), tests
/// strong connectivity and measures the longest gap between consecutive
/// activations of each recurring edge.
inline ConnectivityReport validate_connectivity(const NetworkSchedule& s, std::size_t horizon) {
  ConnectivityReport r;
  const std::size_t m = s.agents();
  std::size_t need = s.T();
  if (s.period()) need = std::max(need, 2 * *s.period());
  if (horizon < need) {
    r.violations.push_back("validation horizon " + std::to_string(horizon) +
                           " is shorter than required " + std::to_string(need));
    horizon = need;
  }
  std::vector<std::vector<std::size_t>> seen(m * m);  // activation times per edge
  for (std::size_t k = 0; k < horizon; ++k) {
    const WeightMatrix a = s(k);
    if (a.size() != m) {
      r.violations.push_back("matrix at step " + std::to_string(k) + " has wrong size");
      return r;
    }
    for (const auto& v : validate_weights(a, s.eta())) {
      r.violations.push_back("step " + std::to_string(k) + ": " + v);
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j && a(i, j) > 0.0) seen[j * m + i].push_back(k);  // edge (j, i)
      }
    }
  }
  const std::size_t window_start =
      s.period() ? horizon - *s.period() : horizon / 2;
  std::vector<std::vector<std::size_t>> adj(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto& times = seen[j * m + i];
      if (times.empty() || times.back() < window_start) continue;
      adj[j].push_back(i);
      ++r.recurring_edges;
      std::size_t gap = times.front() + 1;  // first activation counts from k = -1
      for (std::size_t t = 1; t < times.size(); ++t) gap = std::max(gap, times[t] - times[t - 1]);
      gap = std::max(gap, horizon - times.back());
      r.max_recurrence_gap = std::max(r.max_recurrence_gap, gap);
    }
  }
  if (m == 1) {
    r.strongly_connected = true;
    r.diameter = 0;
  } else if (auto d = detail::graph_diameter(adj)) {
    r.strongly_connected = true;
    r.diameter = *d;
  } else {
    r.violations.push_back("recurring graph is not strongly connected");
  }
  if (r.max_recurrence_gap > s.T()) {
    r.violations.push_back("recurring edge gap " + std::to_string(r.max_recurrence_gap) +
                           " exceeds T = " + std::to_string(s.T()));
  }
  return r;
}

/// Ordered product of the weight matrices from step s through step k, in the
/// order they act on the iterates: A(k) A(k-1) ... A(s). Entry (i, j) equals
/// element j of column i of the column-convention product A(s)^T ... A(k)^T.
inline WeightMatrix phi_product(const NetworkSchedule& sched, std::size_t k, std::size_t s) {
  if (k < s) throw InvalidArgument("phi_product requires k >= s");
  WeightMatrix p = sched(s);
  for (std::size_t t = s + 1; t <= k; ++t) p = sched(t) * p;
  return p;
}

struct ContractionBound {
  double lambda;
  double q;
  double at(std::size_t steps) const { return lambda * std::pow(q, static_cast<double>(steps)); }
};

/// lambda = 2 (1 + eta^{-B}) / (1 - eta^B),  q = (1 - eta^B)^{1/B},  B = (m-1) T.
inline ContractionBound contraction_bound(std::size_t m, double eta, std::size_t T) {
  if (m < 2) throw InvalidArgument("contraction_bound needs m >= 2");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("contraction_bound needs eta in (0,1)");
  if (T < 1) throw InvalidArgument("contraction_bound needs T >= 1");
  const double b = static_cast<double>((m - 1) * T);
  const double eb = std::pow(eta, b);
  if (!(eb > 0.0)) throw InvalidArgument("contraction_bound: eta^((m-1)T) underflows");
  const double lambda = 2.0 * (1.0 + 1.0 / eb) / (1.0 - eb);
  const double q = std::exp(std::log1p(-eb) / b);
  if (!(q > 0.0 && q < 1.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("contraction_bound: degenerate constants");
  }
  return {lambda, q};
}

/// max_{i,j} |[Phi(k,s)]_{ij} - 1/m|
inline double phi_deviation(const WeightMatrix& phi) {
  const double inv = 1.0 / static_cast<double>(phi.size());
  double d = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    for (std::size_t j = 0; j < phi.size(); ++j) d = std::max(d, std::abs(phi(i, j) - inv));
  }
  return d;
}

}  // namespace proxnet
