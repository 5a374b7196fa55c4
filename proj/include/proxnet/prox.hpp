#pragma once

// Local proximal solves:
//
//     x+ = argmin_{x in X} f(x) + 1/(2c) ||z - x_shared||^2
//
// The separable part of f (diagonal quadratic, linear, L1) and the proximal
// penalty are handled exactly inside one metric-weighted solve (active-set for
// polyhedra, Dykstra when balls are present). When f
// has non-separable terms, or some coordinate carries no quadratic weight at
// all (private blocks), an outer proximal-gradient loop linearizes the
// non-separable part and adds a proximal term on the whole vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "proxnet/model.hpp"

namespace proxnet {

/// Componentwise sign(z) * max(|z| - theta, 0).
inline Vector soft_threshold(std::span<const double> z, double theta) {
  if (!(theta >= 0.0)) throw InvalidArgument("soft_threshold: theta must be nonnegative");
  Vector out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = detail::soft(z[j], theta);
  return out;
}

struct ProxOptions {
  double tol = 1e-8;
  std::size_t max_inner_iters = 20000;
  std::size_t certificate_probes = 0;  // 0 disables the variational certificate
  double certificate_tol = 1e-6;
  std::uint64_t seed = 0x5eedULL;
};

struct ProxResult {
  Vector minimizer;
  std::size_t inner_iterations = 0;
  double fixed_point_residual = 0.0;
  double optimality_certificate = 0.0;
  DualState duals;
};

/// One agent's objective and constraint, preprocessed once and reused for
/// every proximal solve. Immutable; solve() is reentrant.
class LocalProblem {
 public:
  LocalProblem(const ObjectiveTerm& f, const ConvexSet& X,
               std::optional<std::size_t> shared_dim = std::nullopt)
      : form_(separate(f)), flat_(flatten(X)), dim_(f.dimension()),
        shared_(shared_dim.value_or(f.dimension())) {
    if (X.dimension() != dim_) {
      throw DimensionError("local problem: objective has dimension " + std::to_string(dim_) +
                           ", constraint has " + std::to_string(X.dimension()));
    }
    if (shared_ > dim_) throw DimensionError("local problem: shared block exceeds dimension");
    if (flat_.empty_box) throw InfeasibleSetError("local constraint boxes do not intersect");
  }

  std::size_t dimension() const { return dim_; }
  std::size_t shared_dim() const { return shared_; }
  const FlatSet& flat() const { return flat_; }
  const SeparableForm& form() const { return form_; }

  double value(std::span<const double> x) const {
    double s = form_.constant + form_.coupled_value(x);
    for (std::size_t j = 0; j < dim_; ++j) {
      s += 0.5 * form_.h[j] * x[j] * x[j] + form_.g[j] * x[j] + form_.theta[j] * std::abs(x[j]);
    }
    return s;
  }

  /// argmin f(x) + 1/(2c) ||anchor - x[0:shared)||^2 over X.
  ProxResult solve(std::span<const double> anchor, double c, const ProxOptions& opt = {},
                   const Vector* start = nullptr, const DualState* warm = nullptr) const {
    if (anchor.size() != shared_) {
      throw DimensionError("local solve: anchor has dimension " + std::to_string(anchor.size()) +
                           ", shared block has " + std::to_string(shared_));
    }
    ProxResult r = solve_impl(anchor, c, shared_, opt, start, warm);
    if (opt.certificate_probes > 0) {
      r.optimality_certificate =
          certificate(r.minimizer, anchor, c, opt.certificate_probes, opt.seed);
    }
    return r;
  }

  /// A minimizer of f over X by proximal-point iterations with a growing
  /// penalty coefficient (1, 2, 4, ... capped at 1e6).
  Vector argmin(const ProxOptions& opt = {}) const {
    Vector x = project(flat_, start_point(), 1e-10);
    DualState duals;
    double c = 1.0;
    for (std::size_t it = 0; it < opt.max_inner_iters; ++it) {
      ProxResult r = solve_impl(x, c, dim_, opt, &x, it == 0 ? nullptr : &duals);
      const double change = distance(r.minimizer, x);
      x = std::move(r.minimizer);
      duals = std::move(r.duals);
      if (change <= opt.tol) return x;
      c = std::min(2.0 * c, 1e6);
    }
    throw NonConvergenceError("local argmin: proximal-point iterations exhausted", x, 0.0);
  }

  /// Largest violation, over `probes` feasible points y, of
  ///   f(x+) - (1/c)(z - x+).x+  <=  f(y) - (1/c)(z - x+).y
  /// (penalty gradient restricted to the shared block). Zero at an exact
  /// minimizer.
  double certificate(std::span<const double> x, std::span<const double> anchor, double c,
                     std::size_t probes, std::uint64_t seed) const {
    auto linearized = [&](std::span<const double> y) {
      double s = value(y);
      for (std::size_t j = 0; j < shared_; ++j) s -= (anchor[j] - x[j]) * y[j] / c;
      return s;
    };
    const double at_x = linearized(x);
    double worst = 0.0;
    for (const Vector& y : feasible_probes(probes, seed, x)) {
      worst = std::max(worst, at_x - linearized(y));
    }
    return worst;
  }

  /// Feasible points: projections of uniform samples from the bounding box
  /// (or from a unit cube around `fallback` when the set is unbounded).
  std::vector<Vector> feasible_probes(std::size_t count, std::uint64_t seed,
                                      std::span<const double> fallback) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto bb = bounding_box(flat_);
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t p = 0; p < count; ++p) {
      Vector y(dim_);
      for (std::size_t j = 0; j < dim_; ++j) {
        const double lo = bb ? bb->lower[j] : fallback[j] - 1.0;
        const double hi = bb ? bb->upper[j] : fallback[j] + 1.0;
        y[j] = lo + (hi - lo) * unif(rng);
      }
      out.push_back(project(flat_, y, 1e-11));
    }
    return out;
  }

 private:
  Vector start_point() const {
    Vector x(dim_, 0.0);
    if (const auto bb = bounding_box(flat_)) {
      for (std::size_t j = 0; j < dim_; ++j) x[j] = 0.5 * (bb->lower[j] + bb->upper[j]);
    }
    return x;
  }

  ProxResult solve_impl(std::span<const double> anchor, double c, std::size_t penalized,
                        const ProxOptions& opt, const Vector* start,
                        const DualState* warm) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("local solve: step must be > 0");
    if (!(opt.tol > 0.0)) throw InvalidArgument("local solve: tolerance must be > 0");
    Vector w_base(dim_), b_base(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
      w_base[j] = form_.h[j] + (j < penalized ? 1.0 / c : 0.0);
      b_base[j] = -form_.g[j] + (j < penalized ? anchor[j] / c : 0.0);
    }
    const bool degenerate_metric =
        std::any_of(w_base.begin(), w_base.end(), [](double w) { return w <= 0.0; });
    DykstraOptions dopt;
    dopt.tol = opt.tol;
    dopt.max_cycles = opt.max_inner_iters;

    ProxResult r;
    if (form_.coupled.empty() && !degenerate_metric) {
      SeparableProblem p{w_base, Vector(dim_), form_.theta};
      for (std::size_t j = 0; j < dim_; ++j) p.center[j] = b_base[j] / w_base[j];
      DykstraResult d = separable_solve(flat_, p, dopt, warm);
      r.minimizer = std::move(d.x);
      r.inner_iterations = d.cycles;
      r.fixed_point_residual = d.last_change;
      r.duals = std::move(d.duals);
      return r;
    }

    // Outer proximal-gradient loop on the coupled part.
    const double lip = form_.coupled_lipschitz();
    const double gamma = lip > 0.0 ? 1.0 / lip : c;
    Vector x;
    if (start != nullptr && start->size() == dim_) {
      x = *start;
    } else {
      Vector guess = start_point();
      std::copy(anchor.begin(), anchor.begin() + static_cast<std::ptrdiff_t>(penalized),
                guess.begin());
      x = project(flat_, guess, 1e-10);
    }
    DualState duals;
    const DualState* warm_ptr = warm;
    dopt.tol = 0.1 * opt.tol;
    SeparableProblem p{Vector(dim_), Vector(dim_), form_.theta};
    Vector grad(dim_);
    for (std::size_t it = 1; it <= opt.max_inner_iters; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      form_.add_coupled_gradient(x, grad);
      for (std::size_t j = 0; j < dim_; ++j) {
        p.weight[j] = w_base[j] + 1.0 / gamma;
        p.center[j] = (b_base[j] - grad[j] + x[j] / gamma) / p.weight[j];
      }
      DykstraResult d = separable_solve(flat_, p, dopt, warm_ptr);
      r.inner_iterations += d.cycles;
      const double change = distance(d.x, x);
      x = std::move(d.x);
      duals = std::move(d.duals);
      warm_ptr = &duals;
      if (change <= opt.tol) {
        r.minimizer = std::move(x);
        r.fixed_point_residual = change;
        r.duals = std::move(duals);
        return r;
      }
    }
    throw NonConvergenceError("local solve: proximal-gradient iterations exhausted", x, 0.0);
  }

  SeparableForm form_;
  FlatSet flat_;
  std::size_t dim_;
  std::size_t shared_;
};

/// Self-contained request for a single proximal solve.
struct ProxRequest {
  ObjectiveTerm objective;
  ConvexSet constraint;
  Vector anchor;
  double step = 1.0;
  double tol = 1e-8;
  std::size_t max_inner_iters = 20000;
  std::size_t certificate_probes = 100;
  std::uint64_t seed = 0x5eedULL;

  ProxOptions options() const {
    ProxOptions o;
    o.tol = tol;
    o.max_inner_iters = max_inner_iters;
    o.certificate_probes = certificate_probes;
    o.seed = seed;
    return o;
  }
};

inline ProxResult local_solve(const ProxRequest& req) {
  if (!(req.step > 0.0)) throw InvalidArgument("local_solve: step must be positive");
  if (!(req.tol > 0.0)) throw InvalidArgument("local_solve: tolerance must be positive");
  const LocalProblem lp(req.objective, req.constraint);
  return lp.solve(req.anchor, req.step, req.options());
}

struct PartialProxResult {
  Vector shared;   // y+, exchanged with neighbours
  Vector private_; // u+, kept local
  ProxResult detail;
};

/// Joint minimization over (y, u) with the penalty on y only. `req.anchor`
/// holds the shared-block anchor z_y.
inline PartialProxResult local_solve_partial(const ProxRequest& req, std::size_t shared_dim) {
  if (!(req.step > 0.0)) throw InvalidArgument("local_solve_partial: step must be positive");
  const LocalProblem lp(req.objective, req.constraint, shared_dim);
  PartialProxResult out;
  out.detail = lp.solve(req.anchor, req.step, req.options());
  const auto& x = out.detail.minimizer;
  out.shared.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(shared_dim));
  out.private_.assign(x.begin() + static_cast<std::ptrdiff_t>(shared_dim), x.end());
  return out;
}

}  // namespace proxnet
