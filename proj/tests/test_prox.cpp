#include <gtest/gtest.h>

#include <random>

#include "proxnet/prox.hpp"

using namespace proxnet;

namespace {

ProxRequest request(ObjectiveTerm f, ConvexSet X, Vector z, double c) {
  ProxRequest r{std::move(f), std::move(X), std::move(z)};
  r.step = c;
  r.tol = 1e-10;
  return r;
}

double prox_objective(const ObjectiveTerm& f, const Vector& z, double c, const Vector& x) {
  return evaluate(f, x) + 0.5 / c * norm_sq(z - x);
}

// Grid minimizer of the prox objective over X restricted to [lo, hi]^n, n <= 2.
Vector grid_prox(const ObjectiveTerm& f, const ConvexSet& X, const Vector& z, double c, double lo,
                 double hi, std::size_t steps) {
  const std::size_t n = z.size();
  const double h = (hi - lo) / static_cast<double>(steps);
  Vector best;
  double best_v = 1e300;
  const std::size_t outer = n == 2 ? steps : 0;
  for (std::size_t a = 0; a <= steps; ++a) {
    for (std::size_t b = 0; b <= outer; ++b) {
      Vector x{lo + h * static_cast<double>(a)};
      if (n == 2) x.push_back(lo + h * static_cast<double>(b));
      if (!contains(X, x, 1e-12)) continue;
      const double v = prox_objective(f, z, c, x);
      if (v < best_v) best_v = v, best = x;
    }
  }
  return best;
}

struct Instance {
  ObjectiveTerm f;
  ConvexSet X;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, bool coupled) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector h(n), g(n), a(n);
  for (std::size_t j = 0; j < n; ++j) h[j] = 1.0 + u(rng), g[j] = u(rng), a[j] = u(rng);
  std::vector<ObjectiveTerm> terms{ObjectiveTerm::quadratic_diagonal(h, g),
                                   ObjectiveTerm::l1(n, 0.5 * (1.0 + u(rng)))};
  if (coupled) terms.push_back(ObjectiveTerm::squared_residual(a, u(rng)));
  std::vector<ConvexSet> sets{ConvexSet::cube(n, 1.0)};
  Vector normal(n);
  for (double& v : normal) v = u(rng);
  sets.push_back(ConvexSet::halfspace(normal, 0.2 + 0.3 * std::abs(u(rng))));
  if (n == 2 && u(rng) > 0.0) sets.push_back(ConvexSet::ball({0.1, -0.1}, 1.1));
  return {ObjectiveTerm::sum(terms), ConvexSet::intersection(sets)};
}

}  // namespace

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(Vector{0, 0}, 0.7), (Vector{0, 0}));
  const Vector s = soft_threshold(Vector{1, -2}, 0.3);
  EXPECT_NEAR(s[0], 0.7, 1e-15);
  EXPECT_NEAR(s[1], -1.7, 1e-15);
  EXPECT_EQ(soft_threshold(Vector{1.5, -0.25}, 0.0), (Vector{1.5, -0.25}));
  EXPECT_THROW(soft_threshold(Vector{1}, -1.0), InvalidArgument);
}

TEST(LocalSolve, ZeroObjectiveIsProjection) {
  const auto X = ConvexSet::intersection({ConvexSet::cube(2, 1.0), ConvexSet::halfspace({1, 1}, 0.5)});
  const Vector z{2.0, 1.5};
  const auto r = local_solve(request(ObjectiveTerm::zero(2), X, z, 0.7));
  const Vector p = project(X, z, 1e-12);
  EXPECT_LE(distance(r.minimizer, p), 1e-9);
}

TEST(LocalSolve, L1OnHugeBoxIsSoftThreshold) {
  const Vector z{1.3, -0.2, -4.0};
  const double lambda = 0.6, c = 1.5;
  const auto r = local_solve(request(ObjectiveTerm::l1(3, lambda), ConvexSet::cube(3, 1e6), z, c));
  const Vector s = soft_threshold(z, lambda * c);
  EXPECT_LE(distance(r.minimizer, s), 1e-12);
}

TEST(LocalSolve, QuadraticOnInterval) {
  const auto f = ObjectiveTerm::quadratic_diagonal({2.0}, {-2.0}, 1.0);
  const auto r = local_solve(request(f, ConvexSet::box({0}, {2}), {0.0}, 1.0));
  EXPECT_NEAR(r.minimizer[0], 2.0 / 3.0, 1e-10);
  const Vector g = grid_prox(f, ConvexSet::box({0}, {2}), {0.0}, 1.0, 0.0, 2.0, 20000);
  EXPECT_NEAR(r.minimizer[0], g[0], 1e-3);
  EXPECT_LE(r.fixed_point_residual, 1e-10);
  EXPECT_LE(r.optimality_certificate, 1e-6);
}

TEST(LocalSolve, RejectsBadRequests) {
  const auto f = ObjectiveTerm::zero(1);
  EXPECT_THROW(local_solve(request(f, ConvexSet::box({0}, {1}), {0.0}, 0.0)), InvalidArgument);
  EXPECT_THROW(local_solve(request(f, ConvexSet::box({0}, {1}), {0.0, 1.0}, 1.0)), DimensionError);
  auto r = request(f, ConvexSet::box({0}, {1}), {0.0}, 1.0);
  r.tol = 0.0;
  EXPECT_THROW(local_solve(r), InvalidArgument);
  const auto empty = ConvexSet::intersection({ConvexSet::box({0}, {1}), ConvexSet::halfspace({1}, -1)});
  EXPECT_THROW(local_solve(request(f, empty, {0.0}, 1.0)), InfeasibleSetError);
}

TEST(LocalSolve, IsDeterministic) {
  std::mt19937_64 rng(4);
  const Instance in = random_instance(rng, 2, true);
  const auto req = request(in.f, in.X, {0.4, -0.9}, 0.3);
  const auto a = local_solve(req), b = local_solve(req);
  EXPECT_EQ(a.minimizer, b.minimizer);
  EXPECT_EQ(a.inner_iterations, b.inner_iterations);
}

TEST(LocalSolve, MatchesGridOnSmallInstances) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t n = 1 + trial % 2;
    const Instance in = random_instance(rng, n, trial % 3 == 0);
    Vector z(n);
    for (double& v : z) v = u(rng);
    const double c = 0.2 + std::abs(u(rng));
    const auto r = local_solve(request(in.f, in.X, z, c));
    const Vector g = grid_prox(in.f, in.X, z, c, -1.0, 1.0, n == 1 ? 20000 : 400);
    ASSERT_FALSE(g.empty());
    EXPECT_LE(prox_objective(in.f, z, c, r.minimizer), prox_objective(in.f, z, c, g) + 1e-9);
    EXPECT_LE(distance(r.minimizer, g), 1e-2) << "trial " << trial;
    EXPECT_TRUE(contains(in.X, r.minimizer, 1e-8));
  }
}

TEST(LocalSolve, VariationalCertificate) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const Instance in = random_instance(rng, n, trial % 2 == 0);
    Vector z(n);
    for (double& v : z) v = u(rng);
    auto req = request(in.f, in.X, z, 0.1 + std::abs(u(rng)));
    req.certificate_probes = 100;
    req.seed = static_cast<std::uint64_t>(trial);
    const auto r = local_solve(req);
    EXPECT_LE(r.optimality_certificate, 1e-6) << "trial " << trial;
  }
}

TEST(LocalSolve, ProxLimits) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const Instance in = random_instance(rng, n, false);
    Vector z(n);
    for (double& v : z) v = u(rng);
    const auto small = local_solve(request(in.f, in.X, z, 1e-6));
    EXPECT_LE(distance(small.minimizer, project(in.X, z, 1e-12)), 1e-3);

    const LocalProblem lp(in.f, in.X);
    ProxOptions opt;
    opt.tol = 1e-11;
    const Vector xstar = lp.argmin(opt);
    const auto big = local_solve(request(in.f, in.X, z, 1e6));
    EXPECT_LE(distance(big.minimizer, xstar), 1e-3);
  }
}

TEST(LocalSolve, ArgminOfUnconstrainedQuadratic) {
  const auto f = ObjectiveTerm::quadratic_diagonal({2.0, 4.0}, {-2.0, 4.0});
  const LocalProblem lp(f, ConvexSet::cube(2, 100.0));
  const Vector x = lp.argmin();
  EXPECT_NEAR(x[0], 1.0, 1e-7);
  EXPECT_NEAR(x[1], -1.0, 1e-7);
}

TEST(LocalSolvePartial, NoPrivateBlockMatchesFullSolve) {
  const auto f = ObjectiveTerm::quadratic_diagonal({1.0, 3.0}, {0.5, -1.0});
  const auto X = ConvexSet::cube(2, 1.0);
  const auto req = request(f, X, {0.3, 0.8}, 0.9);
  const auto full = local_solve(req);
  const auto part = local_solve_partial(req, 2);
  EXPECT_EQ(part.shared, full.minimizer);
  EXPECT_TRUE(part.private_.empty());
}

TEST(LocalSolvePartial, SeparableExample) {
  // f = y^2 + u^2, Y = [-1, 1], U = [1, 2], z_y = 0, c = 1
  const auto f = ObjectiveTerm::quadratic_diagonal({2.0, 2.0}, {0.0, 0.0});
  const auto X = ConvexSet::box({-1.0, 1.0}, {1.0, 2.0});
  const auto r = local_solve_partial(request(f, X, {0.0}, 1.0), 1);
  EXPECT_NEAR(r.shared[0], 0.0, 1e-10);
  EXPECT_NEAR(r.private_[0], 1.0, 1e-10);
}

TEST(LocalSolvePartial, CoupledExampleLargeStep) {
  // f = (y - u)^2, U = {2}, Y = [0, 1], z_y = 0, c = 100
  const auto f = ObjectiveTerm::squared_residual({1.0, -1.0}, 0.0);
  const auto X = ConvexSet::box({0.0, 2.0}, {1.0, 2.0});
  const auto r = local_solve_partial(request(f, X, {0.0}, 100.0), 1);
  // grid oracle on y in [0,1]: (y-2)^2 + y^2/200
  double best = 0.0, best_v = 1e300;
  for (int i = 0; i <= 100000; ++i) {
    const double y = i * 1e-5;
    const double v = (y - 2.0) * (y - 2.0) + y * y / 200.0;
    if (v < best_v) best_v = v, best = y;
  }
  EXPECT_NEAR(r.shared[0], best, 1e-3);
  EXPECT_NEAR(r.shared[0], 1.0, 1e-3);
  EXPECT_NEAR(r.private_[0], 2.0, 1e-12);
}

TEST(LocalSolvePartial, PrivateBlockIsNotPenalized) {
  // f = (u - 5)^2 with u free in [0, 10]: u goes to 5 regardless of the anchor
  const auto f = ObjectiveTerm::quadratic_diagonal({0.0, 2.0}, {0.0, -10.0});
  const auto X = ConvexSet::box({-1.0, 0.0}, {1.0, 10.0});
  const auto r = local_solve_partial(request(f, X, {0.25}, 1e-3), 1);
  EXPECT_NEAR(r.shared[0], 0.25, 1e-9);
  EXPECT_NEAR(r.private_[0], 5.0, 1e-7);
}
