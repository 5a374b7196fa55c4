#pragma once

// Exact solver for the polyhedral case of
//
//     minimize  0.5 * sum_j W_j (x_j - w_j)^2 + sum_j theta_j |x_j|
//     subject to x in box ∩ halfspaces
//
// by the Goldfarb-Idnani dual active-set method. Each |x_j| with theta_j > 0
// gets an epigraph variable s_j >= |x_j|, and the quadratic weight is shared
// between x_j and s_j:
//
//     0.5 W x^2 + theta |x|  =  min_{s >= |x|} 0.5 (W/2) x^2 + 0.5 (W/2) s^2 + theta s
//
// (the right side is increasing in s on s >= 0, so s = |x| at the optimum),
// which keeps the lifted Hessian diagonal and positive definite.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "proxnet/dykstra.hpp"
#include "proxnet/sets.hpp"

namespace proxnet {

struct ActiveSetResult {
  Vector x;
  std::size_t iterations = 0;
  double violation = 0.0;
  std::size_t active = 0;
};

namespace detail {

class DualActiveSet {
 public:
  DualActiveSet(const FlatSet& set, const SeparableProblem& prob) : set_(set), n_(set.dim) {
    const bool has_theta = !prob.theta.empty();
    slot_.assign(n_, npos);
    for (std::size_t j = 0; j < n_; ++j) {
      if (has_theta && prob.theta[j] > 0.0) slot_[j] = n_ + lifted_++;
    }
    N_ = n_ + lifted_;
    G_.assign(N_, 0.0);
    c_.assign(N_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double W = prob.weight[j];
      if (slot_[j] == npos) {
        G_[j] = W;
      } else {
        G_[j] = 0.5 * W;
        G_[slot_[j]] = 0.5 * W;
        c_[slot_[j]] = prob.theta[j];
      }
      c_[j] = -W * prob.center[j];
    }
    for (std::size_t k = 0; k < set.halfspaces.size(); ++k) {
      rows_.push_back({Row::dense, k, 0, 1.0, 0.0, set.halfspaces[k].offset,
                       norm(set.halfspaces[k].normal)});
    }
    if (set.box) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::isfinite(set.box->upper[j])) {
          rows_.push_back({Row::single, j, 0, 1.0, 0.0, set.box->upper[j], 1.0});
        }
        if (std::isfinite(set.box->lower[j])) {
          rows_.push_back({Row::single, j, 0, -1.0, 0.0, -set.box->lower[j], 1.0});
        }
      }
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (slot_[j] == npos) continue;
      rows_.push_back({Row::pair, j, slot_[j], 1.0, -1.0, 0.0, std::sqrt(2.0)});
      rows_.push_back({Row::pair, j, slot_[j], -1.0, -1.0, 0.0, std::sqrt(2.0)});
    }
  }

  ActiveSetResult solve(double feas_tol, std::size_t max_iter) {
    const double inf = std::numeric_limits<double>::infinity();
    const double eps = std::numeric_limits<double>::epsilon();
    const std::size_t M = rows_.size();
    reset_factor();
    Vector y(N_);
    for (std::size_t j = 0; j < N_; ++j) y[j] = -c_[j] / G_[j];
    active_.clear();
    u_.clear();
    std::vector<char> in_active(M, 0), excluded(M, 0);
    Vector np(N_), d(N_), z(N_), r;

    ActiveSetResult res;
    std::size_t it = 0;
    while (true) {
      // most violated inactive row, measured as distance to its hyperplane
      std::size_t ip = npos;
      double worst = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        if (in_active[i] || excluded[i]) continue;
        const double s = slack(i, y);
        const double scaled = s / rows_[i].norm;
        if (scaled < -feas_tol * (1.0 + std::abs(rows_[i].rhs) / rows_[i].norm) && scaled < worst) {
          worst = scaled;
          ip = i;
        }
      }
      if (ip == npos) break;
      const Vector y_old = y;
      const std::vector<std::size_t> active_old = active_;
      const Vector u_old = u_;

      dense_normal(ip, np);  // GI form: np . y + rhs >= 0, np = -a
      for (double& v : np) v = -v;
      double u_plus = 0.0;
      double s_ip = slack(ip, y);
      while (true) {
        if (++it > max_iter) {
          throw NonConvergenceError("active-set solve: iteration limit", y, -s_ip);
        }
        const std::size_t q = active_.size();
        for (std::size_t k = 0; k < N_; ++k) {
          double s = 0.0;
          for (std::size_t i = 0; i < N_; ++i) s += J_[i * N_ + k] * np[i];
          d[k] = s;
        }
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t k = q; k < N_; ++k) {
          if (d[k] == 0.0) continue;
          for (std::size_t i = 0; i < N_; ++i) z[i] += J_[i * N_ + k] * d[k];
        }
        r.assign(q, 0.0);
        for (std::size_t k = q; k-- > 0;) {
          double s = d[k];
          for (std::size_t j = k + 1; j < q; ++j) s -= R_[k * N_ + j] * r[j];
          r[k] = s / R_[k * N_ + k];
        }
        double t1 = inf;
        std::size_t l = npos;
        for (std::size_t k = 0; k < q; ++k) {
          if (r[k] > 0.0 && u_[k] / r[k] < t1) {
            t1 = u_[k] / r[k];
            l = k;
          }
        }
        const double zn = dot(z, np);
        double t2 = inf;
        if (norm(z) > eps * 1e3 && zn > 0.0) t2 = std::max(0.0, -s_ip / zn);
        const double t = std::min(t1, t2);
        if (t == inf) {
          throw InfeasibleSetError("active-set solve: constraints are inconsistent");
        }
        for (std::size_t k = 0; k < q; ++k) u_[k] -= t * r[k];
        u_plus += t;
        if (t2 == inf) {
          drop(l, in_active);
          continue;
        }
        axpy(t, z, y);
        if (t2 <= t1) {
          if (!add(d)) {
            // numerically dependent on the active rows: skip it
            excluded[ip] = 1;
            y = y_old;
            active_ = active_old;
            u_ = u_old;
            std::fill(in_active.begin(), in_active.end(), 0);
            for (auto a : active_) in_active[a] = 1;
            rebuild();
            break;
          }
          active_.push_back(ip);
          u_.push_back(u_plus);
          in_active[ip] = 1;
          break;
        }
        drop(l, in_active);
        s_ip = slack(ip, y);
      }
    }
    res.iterations = it;
    res.active = active_.size();
    res.x.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_));
    res.violation = max_violation(set_, res.x);
    return res;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct Row {
    enum Kind { dense, single, pair } kind;
    std::size_t idx;   // halfspace index (dense) or coordinate
    std::size_t idx2;  // lifted coordinate (pair)
    double coef;
    double coef2;
    double rhs;
    double norm;
  };

  // rhs - a . y  (>= 0 when satisfied)
  double slack(std::size_t i, const Vector& y) const {
    const Row& row = rows_[i];
    switch (row.kind) {
      case Row::dense: {
        const auto& a = set_.halfspaces[row.idx].normal;
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += a[j] * y[j];
        return row.rhs - s;
      }
      case Row::single: return row.rhs - row.coef * y[row.idx];
      case Row::pair: return row.rhs - row.coef * y[row.idx] - row.coef2 * y[row.idx2];
    }
    return 0.0;
  }

  void dense_normal(std::size_t i, Vector& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const Row& row = rows_[i];
    if (row.kind == Row::dense) {
      const auto& a = set_.halfspaces[row.idx].normal;
      std::copy(a.begin(), a.end(), out.begin());
    } else {
      out[row.idx] = row.coef;
      if (row.kind == Row::pair) out[row.idx2] = row.coef2;
    }
  }

  void reset_factor() {
    J_.assign(N_ * N_, 0.0);
    R_.assign(N_ * N_, 0.0);
    for (std::size_t j = 0; j < N_; ++j) J_[j * N_ + j] = 1.0 / std::sqrt(G_[j]);
    r_norm_ = 1.0;
  }

  // Append a column to R given d = J^T n for the new row (Givens on J).
  bool add(Vector& d) {
    const std::size_t q = active_.size();
    for (std::size_t j = N_ - 1; j > q; --j) {
      double cc = d[j - 1], ss = d[j];
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d[j] = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d[j - 1] = -h;
      } else {
        d[j - 1] = h;
      }
      const double xny = ss / (1.0 + cc);
      for (std::size_t k = 0; k < N_; ++k) {
        const double t1 = J_[k * N_ + j - 1], t2 = J_[k * N_ + j];
        J_[k * N_ + j - 1] = t1 * cc + t2 * ss;
        J_[k * N_ + j] = xny * (t1 + J_[k * N_ + j - 1]) - t2;
      }
    }
    for (std::size_t i = 0; i <= q; ++i) R_[i * N_ + q] = d[i];
    if (std::abs(d[q]) <= std::numeric_limits<double>::epsilon() * r_norm_ * 10.0) {
      for (std::size_t i = 0; i <= q; ++i) R_[i * N_ + q] = 0.0;
      return false;
    }
    r_norm_ = std::max(r_norm_, std::abs(d[q]));
    return true;
  }

  // Remove active position `pos` and retriangularize R (Givens on R and J).
  void drop(std::size_t pos, std::vector<char>& in_active) {
    const std::size_t q = active_.size();
    in_active[active_[pos]] = 0;
    for (std::size_t i = pos; i + 1 < q; ++i) {
      active_[i] = active_[i + 1];
      u_[i] = u_[i + 1];
      for (std::size_t k = 0; k < N_; ++k) R_[k * N_ + i] = R_[k * N_ + i + 1];
    }
    active_.pop_back();
    u_.pop_back();
    for (std::size_t k = 0; k < N_; ++k) R_[k * N_ + q - 1] = 0.0;
    const std::size_t nq = q - 1;
    for (std::size_t j = pos; j < nq; ++j) {
      double cc = R_[j * N_ + j], ss = R_[(j + 1) * N_ + j];
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_[(j + 1) * N_ + j] = 0.0;
      if (cc < 0.0) {
        R_[j * N_ + j] = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_[j * N_ + j] = h;
      }
      const double xny = ss / (1.0 + cc);
      for (std::size_t k = j + 1; k < nq; ++k) {
        const double t1 = R_[j * N_ + k], t2 = R_[(j + 1) * N_ + k];
        R_[j * N_ + k] = t1 * cc + t2 * ss;
        R_[(j + 1) * N_ + k] = xny * (t1 + R_[j * N_ + k]) - t2;
      }
      for (std::size_t k = 0; k < N_; ++k) {
        const double t1 = J_[k * N_ + j], t2 = J_[k * N_ + j + 1];
        J_[k * N_ + j] = t1 * cc + t2 * ss;
        J_[k * N_ + j + 1] = xny * (J_[k * N_ + j] + t1) - t2;
      }
    }
  }

  // Refactor from scratch for the current active list.
  void rebuild() {
    reset_factor();
    const std::vector<std::size_t> rows = active_;
    const Vector u = u_;
    active_.clear();
    u_.clear();
    Vector np(N_), d(N_);
    for (std::size_t p = 0; p < rows.size(); ++p) {
      dense_normal(rows[p], np);
      for (std::size_t k = 0; k < N_; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < N_; ++i) s -= J_[i * N_ + k] * np[i];
        d[k] = s;
      }
      if (add(d)) {
        active_.push_back(rows[p]);
        u_.push_back(u[p]);
      }
    }
  }

  const FlatSet& set_;
  std::size_t n_;
  std::size_t lifted_ = 0;
  std::size_t N_ = 0;
  std::vector<std::size_t> slot_;
  Vector G_, c_;
  std::vector<Row> rows_;
  Vector J_, R_;
  double r_norm_ = 1.0;
  std::vector<std::size_t> active_;
  Vector u_;
};

}  // namespace detail

/// Polyhedral sets only (no balls). Exact up to rounding.
inline ActiveSetResult active_set_solve(const FlatSet& set, const SeparableProblem& prob,
                                        double feas_tol = 1e-12, std::size_t max_iter = 0) {
  if (!set.balls.empty()) throw InvalidArgument("active-set solve: balls are not polyhedral");
  const std::size_t n = set.dim;
  if (prob.weight.size() != n || prob.center.size() != n) {
    throw DimensionError("active-set solve: problem dimension does not match the set");
  }
  if (!prob.theta.empty() && prob.theta.size() != n) throw DimensionError("active-set: theta");
  for (double w : prob.weight) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("active-set: metric must be positive");
  }
  if (set.empty_box) throw InfeasibleSetError("box members have an empty intersection");
  detail::DualActiveSet solver(set, prob);
  if (max_iter == 0) max_iter = 50 * (set.halfspaces.size() + 4 * n + 10);
  return solver.solve(feas_tol, max_iter);
}

}  // namespace proxnet

namespace proxnet {

/// Dispatch: polyhedral sets with halfspaces go to the exact active-set
/// method, everything else to Dykstra. For the active-set path `cycles`
/// counts active-set iterations and `last_change` holds the final
/// constraint violation.
inline DykstraResult separable_solve(const FlatSet& set, const SeparableProblem& prob,
                                     const DykstraOptions& opt = {},
                                     const DualState* warm = nullptr) {
  if (set.balls.empty() && !set.halfspaces.empty()) {
    ActiveSetResult a = active_set_solve(set, prob);
    DykstraResult out;
    out.x = std::move(a.x);
    out.cycles = a.iterations;
    out.last_change = a.violation;
    out.violation = a.violation;
    return out;
  }
  return dykstra_solve(set, prob, opt, warm);
}

}  // namespace proxnet
