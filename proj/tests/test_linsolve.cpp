// ============================================================================
// tests/test_linsolve.cpp
// ============================================================================
#include "ddc/linsolve.hpp"
#include "ddc/operators.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace ddc;

namespace {

FieldVector random_vector(Index n, unsigned seed)
{
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FieldVector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = u(gen);
  return v;
}

std::vector<Index> boundary_velocity_dofs(const TaylorHoodSpace& th)
{
  std::vector<Index> dofs;
  const Index n = th.velocity.n_dofs();
  for (Index d : th.velocity.boundary_dofs(BoundaryTag::Exact)) {
    dofs.push_back(d);
    dofs.push_back(d + n);
  }
  std::sort(dofs.begin(), dofs.end());
  return dofs;
}

// Stokes system on the unit square with exact boundary data from u.
SaddleSystem stokes_system(const TaylorHoodSpace& th, double nu, const VectorFunction& u,
                           const VectorFunction& f)
{
  SaddleSystem s;
  s.A = nu * vector_block(assemble_stiffness(th.velocity));
  s.B = assemble_divergence(th);
  s.f = assemble_load(th.velocity, [&](const Point& p, double) { return f(p); }, 0.0);
  s.g = FieldVector::Zero(th.n_pressure());
  s.dirichlet_dofs = boundary_velocity_dofs(th);
  const FieldVector ui = interpolate(u, th.velocity);
  s.dirichlet_values.resize(static_cast<Index>(s.dirichlet_dofs.size()));
  for (std::size_t k = 0; k < s.dirichlet_dofs.size(); ++k)
    s.dirichlet_values[static_cast<Index>(k)] = ui[s.dirichlet_dofs[k]];
  s.mean_constraint = assemble_mean_vector(th.pressure);
  return s;
}

std::shared_ptr<const Mesh> jittered(int n, unsigned seed)
{
  return std::make_shared<const Mesh>(oracle::perturbed_square_mesh(n, seed));
}

} // namespace

TEST(SpdSolver, RandomSystem)
{
  const ScalarSpace p2(jittered(5, 1), 2);
  const SparseOperator a = assemble_stiffness(p2) + assemble_mass(p2);
  const FieldVector b = random_vector(p2.n_dofs(), 3);
  SolverReport report;
  const FieldVector x = SpdSolver(a).solve(b, 1e-12, &report);
  EXPECT_LE((a * x - b).norm() / b.norm(), 1e-12);
  EXPECT_LE(report.residual, 1e-12);
  EXPECT_LT((solve_spd(a, b) - x).norm(), 1e-9 * x.norm());
}

TEST(SpdSolver, RejectsIndefinite)
{
  const ScalarSpace p1(jittered(3, 1), 1);
  const SparseOperator neg = -1.0 * assemble_mass(p1);
  EXPECT_THROW(SpdSolver{neg}, SolverError);
}

TEST(SaddleSolver, StokesLinearFlowIsExact)
{
  const TaylorHoodSpace th(jittered(4, 2));
  auto u = [](const Point& p) { return Vec2(p.y(), p.x()); };
  const SaddleSolution sol = solve_saddle(stokes_system(th, 1.0, u, [](const Point&) { return Vec2::Zero(); }));
  EXPECT_LT((sol.u - interpolate(u, th.velocity)).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LT(sol.p.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SaddleSolver, StokesQuadraticFlowWithPressure)
{
  // u = (y^2, x^2), p = x + y - 1: -nu lap u + grad p = (1 - 2 nu, 1 - 2 nu).
  const TaylorHoodSpace th(jittered(4, 3));
  const double nu = 0.5;
  auto u = [](const Point& p) { return Vec2(p.y() * p.y(), p.x() * p.x()); };
  auto f = [nu](const Point&) { return Vec2(1.0 - 2.0 * nu, 1.0 - 2.0 * nu); };
  const SaddleSolution sol = solve_saddle(stokes_system(th, nu, u, f));
  EXPECT_LT((sol.u - interpolate(u, th.velocity)).cwiseAbs().maxCoeff(), 1e-10);
  // The system carries +B^T p, so the solved pressure is the negated one.
  const FieldVector p = interpolate([](const Point& x) { return x.x() + x.y() - 1.0; }, th.pressure);
  EXPECT_LT((sol.p + p).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SaddleSolver, ResidualContract)
{
  const TaylorHoodSpace th(jittered(4, 4));
  SaddleSystem s = stokes_system(th, 0.3, [](const Point& p) { return Vec2(p.x(), -p.y()); },
                                 [](const Point& p) { return Vec2(p.y(), 1.0); });
  s.A = s.A + 10.0 * vector_block(assemble_mass(th.velocity)) +
        assemble_convection_linearized(th.velocity, random_vector(th.n_velocity(), 5));
  s.g = random_vector(th.n_pressure(), 6);
  const SaddleSolution sol = solve_saddle(s, 1e-12);

  FieldVector r1 = s.A * sol.u + SparseOperator(s.B.transpose()) * sol.p - s.f;
  for (Index d : s.dirichlet_dofs)
    r1[d] = 0.0;
  EXPECT_LT(r1.norm(), 1e-10 * s.f.norm());
  const FieldVector r2 = s.B * sol.u + sol.multiplier * *s.mean_constraint - s.g;
  EXPECT_LT(r2.norm(), 1e-10 * (s.g.norm() + 1.0));
  EXPECT_NEAR(s.mean_constraint->dot(sol.p), 0.0, 1e-12);
  for (std::size_t k = 0; k < s.dirichlet_dofs.size(); ++k)
    EXPECT_EQ(sol.u[s.dirichlet_dofs[k]], s.dirichlet_values[static_cast<Index>(k)]);
  EXPECT_LE(sol.report.residual, 1e-12);
}

TEST(SaddleSolver, PressurePermutationInvariance)
{
  const TaylorHoodSpace th(jittered(3, 5));
  SaddleSystem s = stokes_system(th, 1.0, [](const Point& p) { return Vec2(p.y() * p.y(), 0.0); },
                                 [](const Point& p) { return Vec2(p.x(), p.y()); });
  s.g = random_vector(th.n_pressure(), 8);
  s.g -= (s.mean_constraint->dot(s.g) / s.mean_constraint->squaredNorm()) * *s.mean_constraint;
  const SaddleSolution base = solve_saddle(s);

  const Index np = th.n_pressure();
  std::vector<Index> perm(np);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(13));
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index> pm(np);
  for (Index i = 0; i < np; ++i)
    pm.indices()[i] = perm[i];
  SaddleSystem t = s;
  t.B = SparseOperator(pm * s.B);
  t.g = pm * s.g;
  t.mean_constraint = FieldVector(pm * *s.mean_constraint);
  const SaddleSolution permuted = solve_saddle(t);
  EXPECT_LT((permuted.u - base.u).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((permuted.p - pm * base.p).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SaddleSolver, ReuseMatchesFreshFactorization)
{
  const TaylorHoodSpace th(jittered(6, 6));
  SaddleSystem s = stokes_system(th, 0.01, [](const Point& p) { return Vec2(p.y(), 0.0); },
                                 [](const Point& p) { return Vec2(1.0, p.x()); });
  const SparseOperator base = s.A + 20.0 * vector_block(assemble_mass(th.velocity));
  SaddleSolver reuse(true), fresh(false);
  int reused = 0;
  for (int it = 0; it < 6; ++it) {
    const FieldVector w = (1.0 + 0.05 * it) * interpolate(
        [](const Point& p) { return Vec2(-p.y(), p.x()); }, th.velocity);
    s.A = base + assemble_convection_linearized(th.velocity, w);
    const SaddleSolution a = reuse.solve(s, 1e-10);
    const SaddleSolution b = fresh.solve(s, 1e-10);
    reused += a.report.reused_factors ? 1 : 0;
    EXPECT_LT((a.u - b.u).norm(), 1e-8 * b.u.norm());
    EXPECT_LT((a.p - b.p).norm(), 1e-7 * (b.p.norm() + 1.0));
    EXPECT_LE(a.report.residual, 1e-10);
  }
  EXPECT_GT(reused, 0);
  EXPECT_LT(reuse.factorizations(), fresh.factorizations());
}

TEST(SaddleSolver, RepeatedSolveIsDeterministic)
{
  const TaylorHoodSpace th(jittered(4, 7));
  const SaddleSystem s = stokes_system(th, 1.0, [](const Point& p) { return Vec2(p.y(), p.x()); },
                                       [](const Point& p) { return Vec2(p.x(), 0.0); });
  SaddleSolver solver;
  const SaddleSolution a = solver.solve(s);
  const SaddleSolution b = solver.solve(s);
  EXPECT_TRUE(b.report.reused_symbolic);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.p, b.p);
}

TEST(SaddleSolver, RejectsInconsistentInput)
{
  const TaylorHoodSpace th(jittered(2, 8));
  SaddleSystem s = stokes_system(th, 1.0, [](const Point&) { return Vec2::Zero(); },
                                 [](const Point&) { return Vec2::Zero(); });
  SaddleSystem bad = s;
  bad.g.resize(3);
  EXPECT_THROW(solve_saddle(bad), SolverError);
  bad = s;
  bad.dirichlet_values.resize(1);
  EXPECT_THROW(solve_saddle(bad), SolverError);
  bad = s;
  bad.dirichlet_dofs[0] = th.n_velocity();
  EXPECT_THROW(solve_saddle(bad), SolverError);
  bad = s;
  bad.mean_constraint = FieldVector::Ones(2);
  EXPECT_THROW(solve_saddle(bad), SolverError);
}
