#pragma once

// Convex constraint sets: a closed algebra of boxes, halfspaces and balls,
// closed under intersection.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "proxnet/linalg.hpp"

namespace proxnet {

/// lower <= x <= upper componentwise. Infinite bounds are allowed (used when
/// embedding an agent's set into a larger variable space).
struct Box {
  Vector lower;
  Vector upper;
  friend bool operator==(const Box&, const Box&) = default;
};

/// normal . x <= offset
struct Halfspace {
  Vector normal;
  double offset = 0.0;
  friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

/// ||x[coords] - center|| <= radius. Empty `coords` means all coordinates.
struct Ball {
  Vector center;
  double radius = 0.0;
  std::vector<std::size_t> coords;
  friend bool operator==(const Ball&, const Ball&) = default;
};

class ConvexSet;

struct Intersection {
  std::vector<ConvexSet> members;
  friend bool operator==(const Intersection&, const Intersection&);
};

class ConvexSet {
 public:
  using Variant = std::variant<Box, Halfspace, Ball, Intersection>;

  static ConvexSet box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw DimensionError("box bounds differ in dimension");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (std::isnan(lower[i]) || std::isnan(upper[i])) throw InvalidArgument("box bound is NaN");
      if (lower[i] > upper[i]) {
        throw InvalidArgument("box lower bound exceeds upper bound at coordinate " +
                              std::to_string(i));
      }
    }
    return ConvexSet(Box{std::move(lower), std::move(upper)}, 0);
  }

  /// Cube [-half_width, half_width]^n.
  static ConvexSet cube(std::size_t n, double half_width) {
    return box(Vector(n, -half_width), Vector(n, half_width));
  }

  static ConvexSet halfspace(Vector normal, double offset) {
    if (!all_finite(normal) || !std::isfinite(offset)) {
      throw InvalidArgument("halfspace coefficients must be finite");
    }
    if (norm(normal) == 0.0) throw InvalidArgument("halfspace normal is zero");
    return ConvexSet(Halfspace{std::move(normal), offset}, 0);
  }

  static ConvexSet ball(Vector center, double radius) {
    if (!all_finite(center) || !std::isfinite(radius)) {
      throw InvalidArgument("ball parameters must be finite");
    }
    if (radius < 0.0) throw InvalidArgument("ball radius is negative");
    return ConvexSet(Ball{std::move(center), radius, {}}, 0);
  }

  /// Ball acting on a subset of coordinates of an ambient space of size `dim`.
  static ConvexSet ball_on(Vector center, double radius, std::vector<std::size_t> coords,
                           std::size_t dim) {
    if (coords.size() != center.size()) throw DimensionError("ball coords/center mismatch");
    for (std::size_t c : coords) {
      if (c >= dim) throw DimensionError("ball coordinate out of range");
    }
    ConvexSet s = ball(std::move(center), radius);
    std::get<Ball>(s.v_).coords = std::move(coords);
    s.dim_ = dim;
    return s;
  }

  static ConvexSet intersection(std::vector<ConvexSet> members) {
    if (members.empty()) throw InvalidArgument("intersection needs at least one member");
    const std::size_t n = members.front().dimension();
    for (const auto& m : members) {
      if (m.dimension() != n) throw DimensionError("intersection members differ in dimension");
    }
    return ConvexSet(Intersection{std::move(members)}, n);
  }

  std::size_t dimension() const { return dim_; }
  const Variant& variant() const { return v_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }

  /// True if the set is bounded by construction: some member is a finite box
  /// or a ball over all coordinates.
  bool structurally_bounded() const;

  friend bool operator==(const ConvexSet&, const ConvexSet&) = default;

 private:
  ConvexSet(Variant v, std::size_t dim) : v_(std::move(v)), dim_(dim) {
    if (dim_ == 0) {
      if (auto* b = std::get_if<Box>(&v_)) dim_ = b->lower.size();
      if (auto* h = std::get_if<Halfspace>(&v_)) dim_ = h->normal.size();
      if (auto* b = std::get_if<Ball>(&v_)) dim_ = b->center.size();
    }
  }

  Variant v_;
  std::size_t dim_ = 0;
};

inline bool operator==(const Intersection& a, const Intersection& b) {
  return a.members == b.members;
}

/// Flattened view of a set: boxes merged into one, plus the halfspaces and
/// balls that need iterative treatment.
struct FlatSet {
  std::size_t dim = 0;
  std::optional<Box> box;
  std::vector<Halfspace> halfspaces;
  std::vector<Ball> balls;
  bool empty_box = false;  // merged box bounds crossed

  std::size_t coupling_members() const { return halfspaces.size() + balls.size(); }
};

namespace detail {

inline void flatten_into(const ConvexSet& s, FlatSet& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Box>) {
          if (!out.box) {
            out.box = v;
          } else {
            for (std::size_t i = 0; i < out.dim; ++i) {
              out.box->lower[i] = std::max(out.box->lower[i], v.lower[i]);
              out.box->upper[i] = std::min(out.box->upper[i], v.upper[i]);
              if (out.box->lower[i] > out.box->upper[i]) out.empty_box = true;
            }
          }
        } else if constexpr (std::is_same_v<T, Halfspace>) {
          out.halfspaces.push_back(v);
        } else if constexpr (std::is_same_v<T, Ball>) {
          Ball b = v;
          if (b.coords.empty()) {
            b.coords.resize(b.center.size());
            std::iota(b.coords.begin(), b.coords.end(), std::size_t{0});
          }
          out.balls.push_back(std::move(b));
        } else {
          for (const auto& m : v.members) flatten_into(m, out);
        }
      },
      s.variant());
}

}  // namespace detail

inline FlatSet flatten(const ConvexSet& s) {
  FlatSet out;
  out.dim = s.dimension();
  detail::flatten_into(s, out);
  return out;
}

inline bool ConvexSet::structurally_bounded() const {
  const FlatSet f = flatten(*this);
  if (f.box && all_finite(f.box->lower) && all_finite(f.box->upper)) return true;
  for (const auto& b : f.balls) {
    if (b.coords.size() == dim_) return true;
  }
  return false;
}

/// Axis-aligned bounding box of a bounded set (box members and full balls).
inline std::optional<Box> bounding_box(const FlatSet& f) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box bb{Vector(f.dim, -inf), Vector(f.dim, inf)};
  if (f.box) bb = *f.box;
  for (const auto& b : f.balls) {
    for (std::size_t k = 0; k < b.coords.size(); ++k) {
      const std::size_t j = b.coords[k];
      bb.lower[j] = std::max(bb.lower[j], b.center[k] - b.radius);
      bb.upper[j] = std::min(bb.upper[j], b.center[k] + b.radius);
    }
  }
  if (!all_finite(bb.lower) || !all_finite(bb.upper)) return std::nullopt;
  return bb;
}

/// Violation of x against one primitive (0 when inside).
inline double violation(const Halfspace& h, std::span<const double> x) {
  return std::max(0.0, (dot(h.normal, x) - h.offset) / norm(h.normal));
}

inline double violation(const Ball& b, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.coords.size(); ++k) {
    const double d = x[b.coords[k]] - b.center[k];
    s += d * d;
  }
  return std::max(0.0, std::sqrt(s) - b.radius);
}

inline double violation(const Box& b, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::max({0.0, b.lower[i] - x[i], x[i] - b.upper[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

/// Largest single-member violation; zero iff x lies in every member.
inline double max_violation(const FlatSet& f, std::span<const double> x) {
  double v = 0.0;
  if (f.box) v = std::max(v, violation(*f.box, x));
  for (const auto& h : f.halfspaces) v = std::max(v, violation(h, x));
  for (const auto& b : f.balls) v = std::max(v, violation(b, x));
  return v;
}

/// Copy of `s` living in a `dim`-dimensional space, with coordinate j of `s`
/// mapped to index_map[j]. Coordinates not hit by the map are unconstrained.
inline ConvexSet embed(const ConvexSet& s, std::span<const std::size_t> index_map,
                       std::size_t dim) {
  if (index_map.size() != s.dimension()) throw DimensionError("embed: index map size mismatch");
  return std::visit(
      [&](const auto& v) -> ConvexSet {
        using T = std::decay_t<decltype(v)>;
        constexpr double inf = std::numeric_limits<double>::infinity();
        if constexpr (std::is_same_v<T, Box>) {
          Vector lo(dim, -inf), hi(dim, inf);
          for (std::size_t j = 0; j < index_map.size(); ++j) {
            lo[index_map[j]] = v.lower[j];
            hi[index_map[j]] = v.upper[j];
          }
          return ConvexSet::box(std::move(lo), std::move(hi));
        } else if constexpr (std::is_same_v<T, Halfspace>) {
          Vector a(dim, 0.0);
          for (std::size_t j = 0; j < index_map.size(); ++j) a[index_map[j]] = v.normal[j];
          return ConvexSet::halfspace(std::move(a), v.offset);
        } else if constexpr (std::is_same_v<T, Ball>) {
          std::vector<std::size_t> coords;
          if (v.coords.empty()) {
            coords.assign(index_map.begin(), index_map.end());
          } else {
            for (std::size_t c : v.coords) coords.push_back(index_map[c]);
          }
          return ConvexSet::ball_on(v.center, v.radius, std::move(coords), dim);
        } else {
          std::vector<ConvexSet> members;
          members.reserve(v.members.size());
          for (const auto& m : v.members) members.push_back(embed(m, index_map, dim));
          return ConvexSet::intersection(std::move(members));
        }
      },
      s.variant());
}

}  // namespace proxnet
