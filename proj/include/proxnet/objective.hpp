#pragma once

// Convex objective terms. Every variant except SquaredResidual is separable
// across coordinates, which the local solver exploits.

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "proxnet/linalg.hpp"

namespace proxnet {

/// g . x
struct Linear {
  Vector g;
  friend bool operator==(const Linear&, const Linear&) = default;
};

/// 0.5 * sum_j h_j x_j^2 + g . x + constant, with h >= 0.
struct QuadraticDiagonal {
  Vector h;
  Vector g;
  double constant = 0.0;
  friend bool operator==(const QuadraticDiagonal&, const QuadraticDiagonal&) = default;
};

/// weight * sum_j w_j |x_j|. Empty `coordinate_weights` means w_j = 1.
struct L1 {
  double weight = 0.0;
  Vector coordinate_weights;
  friend bool operator==(const L1&, const L1&) = default;
};

/// (a . x - b)^2, the only non-separable term.
struct SquaredResidual {
  Vector a;
  double b = 0.0;
  friend bool operator==(const SquaredResidual&, const SquaredResidual&) = default;
};

class ObjectiveTerm;

struct Sum {
  std::vector<ObjectiveTerm> terms;
  friend bool operator==(const Sum&, const Sum&);
};

class ObjectiveTerm {
 public:
  using Variant = std::variant<Linear, QuadraticDiagonal, L1, SquaredResidual, Sum>;

  static ObjectiveTerm linear(Vector g) {
    if (!all_finite(g)) throw InvalidArgument("linear coefficients must be finite");
    const std::size_t n = g.size();
    return ObjectiveTerm(Linear{std::move(g)}, n);
  }

  static ObjectiveTerm quadratic_diagonal(Vector h, Vector g, double constant = 0.0) {
    if (h.size() != g.size()) throw DimensionError("quadratic h/g dimension mismatch");
    if (!all_finite(h) || !all_finite(g) || !std::isfinite(constant)) {
      throw InvalidArgument("quadratic coefficients must be finite");
    }
    for (double v : h) {
      if (v < 0.0) throw InvalidArgument("quadratic weight must be nonnegative");
    }
    const std::size_t n = h.size();
    return ObjectiveTerm(QuadraticDiagonal{std::move(h), std::move(g), constant}, n);
  }

  /// L1 norm over an n-dimensional space.
  static ObjectiveTerm l1(std::size_t n, double weight, Vector coordinate_weights = {}) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw InvalidArgument("L1 weight must be finite and nonnegative");
    }
    if (!coordinate_weights.empty()) {
      if (coordinate_weights.size() != n) throw DimensionError("L1 coordinate weights");
      for (double v : coordinate_weights) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("L1 coordinate weight");
      }
    }
    return ObjectiveTerm(L1{weight, std::move(coordinate_weights)}, n);
  }

  static ObjectiveTerm squared_residual(Vector a, double b) {
    if (!all_finite(a) || !std::isfinite(b)) throw InvalidArgument("residual must be finite");
    const std::size_t n = a.size();
    return ObjectiveTerm(SquaredResidual{std::move(a), b}, n);
  }

  static ObjectiveTerm sum(std::vector<ObjectiveTerm> terms) {
    if (terms.empty()) throw InvalidArgument("sum needs at least one term");
    const std::size_t n = terms.front().dimension();
    for (const auto& t : terms) {
      if (t.dimension() != n) throw DimensionError("sum members differ in dimension");
    }
    return ObjectiveTerm(Sum{std::move(terms)}, n);
  }

  static ObjectiveTerm zero(std::size_t n) { return linear(Vector(n, 0.0)); }

  std::size_t dimension() const { return dim_; }
  const Variant& variant() const { return v_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }

  friend bool operator==(const ObjectiveTerm&, const ObjectiveTerm&) = default;

 private:
  ObjectiveTerm(Variant v, std::size_t dim) : v_(std::move(v)), dim_(dim) {}
  Variant v_;
  std::size_t dim_ = 0;
};

inline bool operator==(const Sum& a, const Sum& b) { return a.terms == b.terms; }

namespace detail {
inline double l1_coeff(const L1& t, std::size_t j) {
  return t.coordinate_weights.empty() ? t.weight : t.weight * t.coordinate_weights[j];
}
}  // namespace detail

inline double evaluate(const ObjectiveTerm& f, std::span<const double> x) {
  if (x.size() != f.dimension()) {
    throw DimensionError("evaluate: objective has dimension " + std::to_string(f.dimension()) +
                         ", point has " + std::to_string(x.size()));
  }
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Linear>) {
          return dot(t.g, x);
        } else if constexpr (std::is_same_v<T, QuadraticDiagonal>) {
          double s = t.constant;
          for (std::size_t j = 0; j < x.size(); ++j) s += 0.5 * t.h[j] * x[j] * x[j] + t.g[j] * x[j];
          return s;
        } else if constexpr (std::is_same_v<T, L1>) {
          double s = 0.0;
          for (std::size_t j = 0; j < x.size(); ++j) s += detail::l1_coeff(t, j) * std::abs(x[j]);
          return s;
        } else if constexpr (std::is_same_v<T, SquaredResidual>) {
          const double r = dot(t.a, x) - t.b;
          return r * r;
        } else {
          double s = 0.0;
          for (const auto& m : t.terms) s += evaluate(m, x);
          return s;
        }
      },
      f.variant());
}

/// An element of the subdifferential at x. For L1 the zero coordinate gets
/// the minimum-norm element, 0.
inline Vector subgradient(const ObjectiveTerm& f, std::span<const double> x) {
  if (x.size() != f.dimension()) throw DimensionError("subgradient: dimension mismatch");
  Vector out(x.size(), 0.0);
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Linear>) {
          out = t.g;
        } else if constexpr (std::is_same_v<T, QuadraticDiagonal>) {
          for (std::size_t j = 0; j < x.size(); ++j) out[j] = t.h[j] * x[j] + t.g[j];
        } else if constexpr (std::is_same_v<T, L1>) {
          for (std::size_t j = 0; j < x.size(); ++j) {
            const double s = x[j] > 0.0 ? 1.0 : (x[j] < 0.0 ? -1.0 : 0.0);
            out[j] = detail::l1_coeff(t, j) * s;
          }
        } else if constexpr (std::is_same_v<T, SquaredResidual>) {
          const double r = dot(t.a, x) - t.b;
          for (std::size_t j = 0; j < x.size(); ++j) out[j] = 2.0 * r * t.a[j];
        } else {
          for (const auto& m : t.terms) {
            const Vector g = subgradient(m, x);
            for (std::size_t j = 0; j < x.size(); ++j) out[j] += g[j];
          }
        }
      },
      f.variant());
  return out;
}

/// Objective collapsed to   0.5 h.x^2 + g.x + sum theta_j |x_j| + constant
///                        + sum_k (a_k . x - b_k)^2.
struct SeparableForm {
  Vector h;
  Vector g;
  Vector theta;
  double constant = 0.0;
  std::vector<SquaredResidual> coupled;

  explicit SeparableForm(std::size_t n = 0) : h(n, 0.0), g(n, 0.0), theta(n, 0.0) {}

  std::size_t dim() const { return h.size(); }

  /// Upper bound on the Lipschitz constant of the gradient of the coupled part.
  double coupled_lipschitz() const {
    double l = 0.0;
    for (const auto& c : coupled) l += 2.0 * norm_sq(c.a);
    return l;
  }

  void add_coupled_gradient(std::span<const double> x, std::span<double> out) const {
    for (const auto& c : coupled) {
      const double r = dot(c.a, x) - c.b;
      axpy(2.0 * r, c.a, out);
    }
  }

  double coupled_value(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& c : coupled) {
      const double r = dot(c.a, x) - c.b;
      s += r * r;
    }
    return s;
  }
};

namespace detail {
inline void separate_into(const ObjectiveTerm& f, SeparableForm& out) {
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Linear>) {
          axpy(1.0, t.g, out.g);
        } else if constexpr (std::is_same_v<T, QuadraticDiagonal>) {
          axpy(1.0, t.h, out.h);
          axpy(1.0, t.g, out.g);
          out.constant += t.constant;
        } else if constexpr (std::is_same_v<T, L1>) {
          for (std::size_t j = 0; j < out.dim(); ++j) out.theta[j] += l1_coeff(t, j);
        } else if constexpr (std::is_same_v<T, SquaredResidual>) {
          out.coupled.push_back(t);
        } else {
          for (const auto& m : t.terms) separate_into(m, out);
        }
      },
      f.variant());
}
}  // namespace detail

inline SeparableForm separate(const ObjectiveTerm& f) {
  SeparableForm out(f.dimension());
  detail::separate_into(f, out);
  return out;
}

/// Copy of `f` acting on coordinates index_map[j] of a `dim`-dimensional space.
inline ObjectiveTerm embed(const ObjectiveTerm& f, std::span<const std::size_t> index_map,
                           std::size_t dim) {
  if (index_map.size() != f.dimension()) throw DimensionError("embed: index map size mismatch");
  auto spread = [&](const Vector& v) {
    Vector out(dim, 0.0);
    for (std::size_t j = 0; j < index_map.size(); ++j) out[index_map[j]] = v[j];
    return out;
  };
  return std::visit(
      [&](const auto& t) -> ObjectiveTerm {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Linear>) {
          return ObjectiveTerm::linear(spread(t.g));
        } else if constexpr (std::is_same_v<T, QuadraticDiagonal>) {
          return ObjectiveTerm::quadratic_diagonal(spread(t.h), spread(t.g), t.constant);
        } else if constexpr (std::is_same_v<T, L1>) {
          Vector w = t.coordinate_weights.empty() ? Vector(index_map.size(), 1.0)
                                                  : t.coordinate_weights;
          return ObjectiveTerm::l1(dim, t.weight, spread(w));
        } else if constexpr (std::is_same_v<T, SquaredResidual>) {
          return ObjectiveTerm::squared_residual(spread(t.a), t.b);
        } else {
          std::vector<ObjectiveTerm> terms;
          for (const auto& m : t.terms) terms.push_back(embed(m, index_map, dim));
          return ObjectiveTerm::sum(std::move(terms));
        }
      },
      f.variant());
}

}  // namespace proxnet
