#pragma once

// Dykstra-type splitting for
//
//     minimize  0.5 * sum_j W_j (x_j - w_j)^2 + sum_j theta_j |x_j|
//     subject to x in box ∩ halfspaces ∩ balls
//
// with a positive diagonal metric W. Each member (the separable L1+box
// block, every halfspace, every ball) is visited cyclically with its own
// correction term; this is block coordinate ascent on the dual, so any dual
// point is a valid warm start. Duals are stored in gradient space
// (u_j = W * correction_j) so they stay meaningful when W changes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "proxnet/sets.hpp"

namespace proxnet {

struct SeparableProblem {
  Vector weight;  // W, strictly positive
  Vector center;  // w
  Vector theta;   // L1 weights, may be empty for none
};

struct DualState {
  Vector separable;
  std::vector<double> halfspace;  // multipliers, u_k = mu_k * a_k
  std::vector<Vector> ball;

  bool matches(const FlatSet& f) const {
    return separable.size() == f.dim && halfspace.size() == f.halfspaces.size() &&
           ball.size() == f.balls.size();
  }
};

struct DykstraOptions {
  double tol = 1e-8;
  std::size_t max_cycles = 20000;
  // Every `stall_window` cycles the constraint violation must shrink by at
  // least `stall_ratio`, or the intersection is declared empty.
  std::size_t stall_window = 500;
  double stall_ratio = 0.999;
};

struct DykstraResult {
  Vector x;
  std::size_t cycles = 0;
  double last_change = 0.0;  // iterate plus correction movement, last cycle
  double violation = 0.0;
  DualState duals;
};

namespace detail {

inline double soft(double y, double t) {
  if (y > t) return y - t;
  if (y < -t) return y + t;
  return 0.0;
}

// argmin_x 0.5 sum W_k (x_k - y_k)^2  s.t. ||x - c|| <= r, on the ball's coords.
inline void weighted_ball_projection(const Ball& b, std::span<const double> weight,
                                     std::span<double> y) {
  const std::size_t k = b.coords.size();
  double dn = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = y[b.coords[i]] - b.center[i];
    dn += d * d;
  }
  dn = std::sqrt(dn);
  if (dn <= b.radius) return;
  if (b.radius == 0.0) {
    for (std::size_t i = 0; i < k; ++i) y[b.coords[i]] = b.center[i];
    return;
  }
  double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
  for (std::size_t c : b.coords) {
    wmin = std::min(wmin, weight[c]);
    wmax = std::max(wmax, weight[c]);
  }
  double mu = 0.0;
  if (wmax == wmin) {
    mu = wmax * (dn / b.radius - 1.0);
  } else {
    // phi(mu) = sum (W d / (W + mu))^2 - r^2 is decreasing in mu.
    double lo = 0.0, hi = wmax * dn / b.radius;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double w = weight[b.coords[i]];
        const double t = w * (y[b.coords[i]] - b.center[i]) / (w + mid);
        s += t * t;
      }
      (s > b.radius * b.radius ? lo : hi) = mid;
    }
    mu = hi;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t c = b.coords[i];
    const double w = weight[c];
    y[c] = b.center[i] + w * (y[c] - b.center[i]) / (w + mu);
  }
}

}  // namespace detail

inline DykstraResult dykstra_solve(const FlatSet& set, const SeparableProblem& prob,
                                   const DykstraOptions& opt = {},
                                   const DualState* warm = nullptr) {
  const std::size_t n = set.dim;
  if (prob.weight.size() != n || prob.center.size() != n) {
    throw DimensionError("dykstra: problem dimension does not match the set");
  }
  if (!prob.theta.empty() && prob.theta.size() != n) throw DimensionError("dykstra: theta");
  for (double w : prob.weight) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("dykstra: metric must be positive");
  }
  if (set.empty_box) throw InfeasibleSetError("box members have an empty intersection");

  const Vector& W = prob.weight;
  const bool has_theta =
      !prob.theta.empty() && std::any_of(prob.theta.begin(), prob.theta.end(),
                                         [](double t) { return t > 0.0; });
  const bool has_separable = set.box.has_value() || has_theta;

  DykstraResult res;
  DualState& u = res.duals;
  if (warm != nullptr && warm->matches(set)) {
    u = *warm;
  } else {
    u.separable.assign(n, 0.0);
    u.halfspace.assign(set.halfspaces.size(), 0.0);
    u.ball.assign(set.balls.size(), Vector{});
    for (std::size_t b = 0; b < set.balls.size(); ++b) u.ball[b].assign(n, 0.0);
  }
  if (!has_separable) std::fill(u.separable.begin(), u.separable.end(), 0.0);

  // x = w - W^{-1} sum_j u_j
  Vector x = prob.center;
  for (std::size_t j = 0; j < n; ++j) x[j] -= u.separable[j] / W[j];
  for (std::size_t k = 0; k < set.halfspaces.size(); ++k) {
    if (u.halfspace[k] == 0.0) continue;
    const auto& a = set.halfspaces[k].normal;
    for (std::size_t j = 0; j < n; ++j) x[j] -= u.halfspace[k] * a[j] / W[j];
  }
  for (std::size_t b = 0; b < set.balls.size(); ++b) {
    for (std::size_t j = 0; j < n; ++j) x[j] -= u.ball[b][j] / W[j];
  }

  std::vector<double> metric_norm(set.halfspaces.size()), shift_norm(set.halfspaces.size());
  for (std::size_t k = 0; k < set.halfspaces.size(); ++k) {
    double s = 0.0;
    const auto& a = set.halfspaces[k].normal;
    for (std::size_t j = 0; j < n; ++j) s += a[j] * a[j] / W[j];
    metric_norm[k] = s;
    double t = 0.0;
    for (std::size_t j = 0; j < n; ++j) t += a[j] * a[j] / (W[j] * W[j]);
    shift_norm[k] = t;
  }

  const std::size_t members = (has_separable ? 1 : 0) + set.coupling_members();
  Vector prev = x;
  Vector y(n);
  double stall_reference = std::numeric_limits<double>::infinity();

  for (std::size_t cycle = 1; cycle <= opt.max_cycles; ++cycle) {
    prev = x;
    // x can repeat for a cycle while the corrections still move, so both count
    double dual_sq = 0.0;

    if (has_separable) {
      for (std::size_t j = 0; j < n; ++j) {
        const double yj = x[j] + u.separable[j] / W[j];
        double xj = has_theta ? detail::soft(yj, prob.theta[j] / W[j]) : yj;
        if (set.box) xj = std::clamp(xj, set.box->lower[j], set.box->upper[j]);
        const double un = W[j] * (yj - xj);
        dual_sq += (un - u.separable[j]) * (un - u.separable[j]) / (W[j] * W[j]);
        u.separable[j] = un;
        x[j] = xj;
      }
    }

    for (std::size_t k = 0; k < set.halfspaces.size(); ++k) {
      const auto& h = set.halfspaces[k];
      const double mu = u.halfspace[k];
      const double ay = dot(h.normal, x) + mu * metric_norm[k];
      const double mu_new = ay <= h.offset ? 0.0 : (ay - h.offset) / metric_norm[k];
      const double delta = mu - mu_new;
      if (delta != 0.0) {
        for (std::size_t j = 0; j < n; ++j) x[j] += delta * h.normal[j] / W[j];
        dual_sq += delta * delta * shift_norm[k];
      }
      u.halfspace[k] = mu_new;
    }

    for (std::size_t b = 0; b < set.balls.size(); ++b) {
      for (std::size_t j = 0; j < n; ++j) y[j] = x[j] + u.ball[b][j] / W[j];
      x = y;
      detail::weighted_ball_projection(set.balls[b], W, x);
      for (std::size_t j = 0; j < n; ++j) {
        const double un = W[j] * (y[j] - x[j]);
        dual_sq += (un - u.ball[b][j]) * (un - u.ball[b][j]) / (W[j] * W[j]);
        u.ball[b][j] = un;
      }
    }

    res.cycles = cycle;
    res.last_change = std::sqrt(norm_sq(x - prev) + dual_sq);
    // A single member is solved exactly by one visit.
    if (members <= 1) {
      res.last_change = 0.0;
      res.violation = max_violation(set, x);
      res.x = std::move(x);
      return res;
    }
    if (res.last_change <= opt.tol) {
      res.violation = max_violation(set, x);
      if (res.violation <= opt.tol) {
        res.x = std::move(x);
        return res;
      }
    }
    if (opt.stall_window > 0 && cycle % opt.stall_window == 0) {
      const double v = max_violation(set, x);
      if (v > std::max(1e-6, 1e3 * opt.tol) && v >= opt.stall_ratio * stall_reference) {
        throw InfeasibleSetError("constraint residual stalled at " + std::to_string(v) +
                                 " after " + std::to_string(cycle) +
                                 " cycles; intersection appears empty");
      }
      stall_reference = v;
    }
  }
  res.violation = max_violation(set, x);
  if (res.violation > std::max(1e-6, 1e3 * opt.tol)) {
    throw InfeasibleSetError("constraint residual " + std::to_string(res.violation) +
                             " did not shrink within the cycle limit");
  }
  throw NonConvergenceError("dykstra: cycle limit reached (change " +
                                std::to_string(res.last_change) + ")",
                            x, res.last_change);
}

}  // namespace proxnet
