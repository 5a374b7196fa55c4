#pragma once

// Domain model: decision vectors, constraint sets with exact membership and
// projection, objective terms, and the multi-agent problem description.

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "proxnet/dykstra.hpp"
#include "proxnet/qp.hpp"
#include "proxnet/objective.hpp"
#include "proxnet/sets.hpp"

namespace proxnet {

/// Euclidean projection. Exact for primitives and for polyhedra (active-set
/// method); intersections involving balls go through Dykstra until the
/// per-cycle change drops below `tol`.
inline Vector project(const ConvexSet& set, std::span<const double> z, double tol = 1e-10) {
  if (z.size() != set.dimension()) {
    throw DimensionError("project: set has dimension " + std::to_string(set.dimension()) +
                         ", point has " + std::to_string(z.size()));
  }
  const FlatSet flat = flatten(set);
  if (flat.coupling_members() == 0 && !flat.box) return Vector(z.begin(), z.end());
  SeparableProblem p{Vector(z.size(), 1.0), Vector(z.begin(), z.end()), {}};
  DykstraOptions opt;
  opt.tol = tol;
  opt.max_cycles = 200000;
  return separable_solve(flat, p, opt).x;
}

inline Vector project(const FlatSet& flat, std::span<const double> z, double tol = 1e-10) {
  SeparableProblem p{Vector(z.size(), 1.0), Vector(z.begin(), z.end()), {}};
  DykstraOptions opt;
  opt.tol = tol;
  opt.max_cycles = 200000;
  return separable_solve(flat, p, opt).x;
}

inline double distance(const ConvexSet& set, std::span<const double> z, double tol = 1e-10) {
  const Vector p = project(set, z, tol);
  return distance(p, z);
}

/// distance(set, x) <= tol. Primitives are checked exactly; intersections
/// fall back to the member-wise test, which is exact when tol == 0.
inline bool contains(const ConvexSet& set, std::span<const double> x, double tol = 0.0) {
  if (tol < 0.0) throw InvalidArgument("contains: negative tolerance");
  if (x.size() != set.dimension()) throw DimensionError("contains: dimension mismatch");
  const FlatSet flat = flatten(set);
  if (flat.empty_box) return false;
  const double member_violation = max_violation(flat, x);
  if (member_violation > tol) return false;
  if (flat.coupling_members() + (flat.box ? 1 : 0) <= 1 || member_violation == 0.0) return true;
  return distance(set, x, std::max(tol * 1e-3, 1e-14)) <= tol;
}

/// Optional split of an agent's variables into a shared block y (the first
/// `shared_dim` coordinates, exchanged with neighbours) and a private block
/// u_i (the remaining coordinates, never exchanged).
struct PrivateBlock {
  std::size_t shared_dim = 0;
  friend bool operator==(const PrivateBlock&, const PrivateBlock&) = default;
};

struct AgentSpec {
  ObjectiveTerm objective = ObjectiveTerm::zero(0);
  ConvexSet constraint = ConvexSet::box({}, {});
  std::optional<Vector> initial;
  std::optional<PrivateBlock> split;

  std::size_t dimension() const { return objective.dimension(); }
  std::size_t shared_dim() const { return split ? split->shared_dim : dimension(); }
  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// Ball of radius `radius` around `center` contained in every agent set.
struct InteriorPoint {
  Vector center;
  double radius = 0.0;
  friend bool operator==(const InteriorPoint&, const InteriorPoint&) = default;
};

struct ProblemSpec {
  std::size_t dimension = 0;  // shared dimension n
  std::vector<AgentSpec> agents;
  std::optional<InteriorPoint> interior;

  std::size_t agent_count() const { return agents.size(); }
  bool has_private_blocks() const {
    for (const auto& a : agents) {
      if (a.split && a.dimension() != a.split->shared_dim) return true;
    }
    return false;
  }
  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

/// Structural checks on a problem. Returns human-readable issues; empty means
/// valid. The interior ball is probed along `probe_directions` random unit
/// directions.
inline std::vector<std::string> validate_problem(const ProblemSpec& p,
                                                 std::size_t probe_directions = 64,
                                                 std::uint64_t seed = 7) {
  std::vector<std::string> issues;
  if (p.agents.empty()) issues.push_back("problem has no agents");
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    const auto& a = p.agents[i];
    const std::string tag = "agent " + std::to_string(i) + ": ";
    if (a.constraint.dimension() != a.dimension()) {
      issues.push_back(tag + "objective and constraint dimensions differ");
      continue;
    }
    if (a.shared_dim() != p.dimension) {
      issues.push_back(tag + "shared dimension " + std::to_string(a.shared_dim()) +
                       " differs from problem dimension " + std::to_string(p.dimension));
    }
    if (a.split && a.split->shared_dim > a.dimension()) {
      issues.push_back(tag + "shared block larger than the agent's variable");
    }
    if (!a.constraint.structurally_bounded()) {
      issues.push_back(tag + "constraint set has no bounded member (box or ball)");
    }
    if (a.initial) {
      if (a.initial->size() != a.dimension()) {
        issues.push_back(tag + "initial point has wrong dimension");
      } else if (!all_finite(*a.initial)) {
        issues.push_back(tag + "initial point is not finite");
      } else if (!contains(a.constraint, *a.initial, 1e-8)) {
        issues.push_back(tag + "initial point is not in the constraint set");
      }
    }
  }
  if (p.interior && issues.empty()) {
    const auto& ip = *p.interior;
    if (ip.center.size() != p.dimension || !(ip.radius > 0.0)) {
      issues.push_back("interior point has wrong dimension or nonpositive radius");
    } else if (!p.has_private_blocks()) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> nd;
      std::vector<Vector> probes{ip.center};
      for (std::size_t d = 0; d < probe_directions; ++d) {
        Vector u(p.dimension);
        for (double& v : u) v = nd(rng);
        const double s = ip.radius / norm(u);
        probes.push_back(ip.center + s * u);
      }
      for (std::size_t i = 0; i < p.agents.size(); ++i) {
        for (const auto& q : probes) {
          if (!contains(p.agents[i].constraint, q, 1e-9)) {
            issues.push_back("interior ball is not inside agent " + std::to_string(i) +
                             "'s constraint set");
            break;
          }
        }
      }
    }
  }
  return issues;
}

}  // namespace proxnet
