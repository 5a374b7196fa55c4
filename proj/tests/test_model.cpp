#include <gtest/gtest.h>

#include <random>

#include "proxnet/model.hpp"

using namespace proxnet;

namespace {

// Brute-force nearest feasible point on a grid over [lo, hi]^dim.
Vector grid_project(const ConvexSet& s, const Vector& z, double lo, double hi, std::size_t steps) {
  Vector best;
  double best_d = 1e300;
  const double h = (hi - lo) / static_cast<double>(steps);
  if (z.size() == 1) {
    for (std::size_t a = 0; a <= steps; ++a) {
      const Vector x{lo + h * static_cast<double>(a)};
      if (!contains(s, x, 1e-12)) continue;
      const double d = distance(x, z);
      if (d < best_d) best_d = d, best = x;
    }
    return best;
  }
  for (std::size_t a = 0; a <= steps; ++a) {
    for (std::size_t b = 0; b <= steps; ++b) {
      const Vector x{lo + h * static_cast<double>(a), lo + h * static_cast<double>(b)};
      if (!contains(s, x, 1e-12)) continue;
      const double d = distance(x, z);
      if (d < best_d) best_d = d, best = x;
    }
  }
  return best;
}

ConvexSet random_set(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ConvexSet> members{ConvexSet::cube(n, 1.5)};
  std::uniform_int_distribution<int> kind(0, 2);
  for (int t = 0; t < 2; ++t) {
    Vector a(n);
    for (double& v : a) v = u(rng);
    switch (kind(rng)) {
      case 0:
        members.push_back(ConvexSet::halfspace(a, 0.3 + 0.5 * std::abs(u(rng))));
        break;
      case 1:
        members.push_back(ConvexSet::ball(0.3 * a, 1.0 + 0.3 * std::abs(u(rng))));
        break;
      default: {
        Vector lo(n), hi(n);
        for (std::size_t j = 0; j < n; ++j) lo[j] = -1.0 + 0.4 * std::abs(u(rng)), hi[j] = 1.2;
        members.push_back(ConvexSet::box(lo, hi));
      }
    }
  }
  return ConvexSet::intersection(members);
}

}  // namespace

TEST(Evaluate, HandValues) {
  EXPECT_DOUBLE_EQ(evaluate(ObjectiveTerm::l1(2, 1.0), Vector{0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(evaluate(ObjectiveTerm::linear({1, 2}), Vector{3, 4}), 11.0);
  const auto f = ObjectiveTerm::sum({ObjectiveTerm::l1(2, 1.0), ObjectiveTerm::linear({1, 0})});
  EXPECT_DOUBLE_EQ(evaluate(f, Vector{-1, 2}), 2.0);
}

TEST(Evaluate, SumIsSumOfMembers) {
  const auto a = ObjectiveTerm::quadratic_diagonal({1, 3}, {0.5, -1}, 2.0);
  const auto b = ObjectiveTerm::squared_residual({1, -2}, 0.25);
  const auto c = ObjectiveTerm::l1(2, 0.7, {1.0, 3.0});
  const Vector x{0.3, -1.7};
  EXPECT_EQ(evaluate(ObjectiveTerm::sum({a, b, c}), x), evaluate(a, x) + evaluate(b, x) + evaluate(c, x));
}

TEST(Evaluate, DimensionMismatchThrows) {
  EXPECT_THROW(evaluate(ObjectiveTerm::linear({1, 2}), Vector{1}), DimensionError);
  EXPECT_THROW(subgradient(ObjectiveTerm::linear({1, 2}), Vector{1}), DimensionError);
}

TEST(Objective, RejectsNonconvexOrNonfinite) {
  EXPECT_THROW(ObjectiveTerm::quadratic_diagonal({-1}, {0}), InvalidArgument);
  EXPECT_THROW(ObjectiveTerm::l1(1, -0.1), InvalidArgument);
  EXPECT_THROW(ObjectiveTerm::linear({std::nan("")}), InvalidArgument);
}

TEST(Subgradient, HandValues) {
  EXPECT_EQ(subgradient(ObjectiveTerm::l1(2, 1.0), Vector{0, 2}), (Vector{0, 1}));
  EXPECT_EQ(subgradient(ObjectiveTerm::quadratic_diagonal({2}, {0}), Vector{3}), (Vector{6}));
  EXPECT_EQ(subgradient(ObjectiveTerm::linear({4, -1}), Vector{9, 9}), (Vector{4, -1}));
}

TEST(Subgradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto f = ObjectiveTerm::sum({ObjectiveTerm::quadratic_diagonal({1.5, 0.0, 2.0}, {0.1, -0.3, 1.0}),
                                     ObjectiveTerm::l1(3, 0.4, {1.0, 2.0, 0.5}),
                                     ObjectiveTerm::squared_residual({1.0, -1.0, 0.5}, 0.2),
                                     ObjectiveTerm::linear({0.0, 1.0, -2.0})});
  for (int trial = 0; trial < 200; ++trial) {
    Vector x(3);
    for (double& v : x) v = u(rng);
    const Vector g = subgradient(f, x);
    for (std::size_t j = 0; j < 3; ++j) {
      Vector xp = x, xm = x;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      EXPECT_NEAR((evaluate(f, xp) - evaluate(f, xm)) / 2e-6, g[j], 1e-4);
    }
  }
}

TEST(Contains, Examples) {
  EXPECT_TRUE(contains(ConvexSet::box({0, 0}, {1, 1}), Vector{0.5, 0.5}, 0.0));
  EXPECT_TRUE(contains(ConvexSet::halfspace({1, 0}, 0), Vector{1e-9, 5}, 1e-8));
  EXPECT_FALSE(contains(ConvexSet::halfspace({1, 0}, 0), Vector{1e-7, 5}, 1e-8));
  const auto s = ConvexSet::intersection({ConvexSet::box({0}, {2}), ConvexSet::box({1}, {3})});
  EXPECT_FALSE(contains(s, Vector{0.5}, 0.0));
  EXPECT_TRUE(contains(s, Vector{1.5}, 0.0));
  EXPECT_THROW(contains(s, Vector{1, 1}, 0.0), DimensionError);
  EXPECT_THROW(contains(s, Vector{1}, -1.0), InvalidArgument);
}

TEST(Project, Examples) {
  EXPECT_EQ(project(ConvexSet::box({0}, {1}), Vector{2}), (Vector{1}));
  const Vector p = project(ConvexSet::halfspace({1, 0}, 1), Vector{3, 4});
  EXPECT_NEAR(p[0], 1.0, 1e-14);
  EXPECT_NEAR(p[1], 4.0, 1e-14);
  const auto orthant =
      ConvexSet::intersection({ConvexSet::halfspace({-1, 0}, 0), ConvexSet::halfspace({0, -1}, 0)});
  const Vector q = project(orthant, Vector{-1, -1});
  EXPECT_NEAR(q[0], 0.0, 1e-10);
  EXPECT_NEAR(q[1], 0.0, 1e-10);
}

TEST(Distance, Examples) {
  EXPECT_NEAR(distance(ConvexSet::ball({0, 0}, 1), Vector{2, 0}), 1.0, 1e-14);
  EXPECT_NEAR(distance(ConvexSet::box({0}, {1}), Vector{-3}), 3.0, 1e-14);
  EXPECT_EQ(distance(ConvexSet::box({0}, {1}), Vector{0.25}), 0.0);
}

TEST(Project, EmptyIntersectionIsReported) {
  const auto s = ConvexSet::intersection({ConvexSet::box({0}, {1}), ConvexSet::box({2}, {3})});
  EXPECT_THROW(project(s, Vector{0.5}), InfeasibleSetError);
  const auto t = ConvexSet::intersection({ConvexSet::ball({0, 0}, 1), ConvexSet::halfspace({1, 0}, -2)});
  EXPECT_THROW(project(t, Vector{0, 0}), InfeasibleSetError);
}

TEST(Project, IdempotentAndNonexpansive) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const ConvexSet s = random_set(rng, n);
    Vector z1(n), z2(n);
    for (std::size_t j = 0; j < n; ++j) z1[j] = u(rng), z2[j] = u(rng);
    const Vector p1 = project(s, z1, 1e-12), p2 = project(s, z2, 1e-12);
    const Vector pp = project(s, p1, 1e-12);
    EXPECT_LE(distance(pp, p1), 1e-10);
    EXPECT_LE(distance(p1, p2), distance(z1, z2) + 1e-10);
    EXPECT_TRUE(contains(s, p1, 1e-9));
  }
}

TEST(Project, AgreesWithGridSearch) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 2;
    const ConvexSet s = random_set(rng, n);
    Vector z(n);
    for (double& v : z) v = u(rng);
    const std::size_t steps = n == 1 ? 30000 : 600;
    const Vector g = grid_project(s, z, -1.5, 1.5, steps);
    ASSERT_FALSE(g.empty());
    const Vector p = project(s, z, 1e-12);
    // the grid point is feasible, so the true projection is at least as close
    EXPECT_LE(distance(p, z), distance(g, z) + 1e-12);
    EXPECT_NEAR(distance(p, z), distance(g, z), 3.0 * 3.0 / static_cast<double>(steps));
  }
}

TEST(Sets, ConstructionChecks) {
  EXPECT_THROW(ConvexSet::box({1}, {0}), InvalidArgument);
  EXPECT_THROW(ConvexSet::ball({0}, -1.0), InvalidArgument);
  EXPECT_THROW(ConvexSet::box({0, 0}, {1}), DimensionError);
  EXPECT_THROW(ConvexSet::intersection({ConvexSet::box({0}, {1}), ConvexSet::box({0, 0}, {1, 1})}),
               DimensionError);
}

TEST(Sets, BallOnCoordinates) {
  // ball on coordinate 1 only; coordinate 0 free
  const auto s = ConvexSet::ball_on({0.0}, 1.0, {1}, 2);
  EXPECT_TRUE(contains(s, Vector{100.0, 0.5}, 0.0));
  EXPECT_NEAR(distance(s, Vector{7.0, 3.0}), 2.0, 1e-12);
}

TEST(Problem, ValidationFindsIssues) {
  ProblemSpec p;
  p.dimension = 1;
  AgentSpec a;
  a.objective = ObjectiveTerm::linear({1.0});
  a.constraint = ConvexSet::halfspace({1.0}, 0.0);
  p.agents.push_back(a);
  auto issues = validate_problem(p);
  ASSERT_FALSE(issues.empty());  // unbounded set

  p.agents[0].constraint = ConvexSet::box({0}, {1});
  p.agents[0].initial = Vector{2.0};
  issues = validate_problem(p);
  ASSERT_FALSE(issues.empty());  // infeasible start

  p.agents[0].initial = Vector{0.5};
  p.interior = InteriorPoint{{0.5}, 0.6};
  EXPECT_FALSE(validate_problem(p).empty());  // ball leaves the box
  p.interior = InteriorPoint{{0.5}, 0.4};
  EXPECT_TRUE(validate_problem(p).empty());
}
