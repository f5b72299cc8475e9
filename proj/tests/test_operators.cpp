// ============================================================================
// tests/test_operators.cpp
// ============================================================================
#include "ddc/analysis.hpp"
#include "ddc/operators.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
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

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
  EXPECT_EQ(a.rows(), b.rows());
  EXPECT_EQ(a.cols(), b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

// Two meshes: the asymmetric two-triangle mesh and a jittered 3x3 square.
class OracleMeshes : public ::testing::TestWithParam<int> {
protected:
  std::shared_ptr<const Mesh> mesh() const
  {
    return GetParam() == 0 ? std::make_shared<const Mesh>(oracle::two_triangle_mesh())
                           : std::make_shared<const Mesh>(oracle::perturbed_square_mesh(3, 11));
  }
};

constexpr double kOracleTol = 1e-12;

} // namespace

TEST_P(OracleMeshes, MassAndStiffness)
{
  const auto m = mesh();
  for (int degree : {1, 2}) {
    const ScalarSpace v(m, degree);
    EXPECT_LT(max_abs_diff(oracle::dense(assemble_mass(v)), oracle::mass(v)), kOracleTol);
    EXPECT_LT(max_abs_diff(oracle::dense(assemble_stiffness(v)), oracle::stiffness(v)), kOracleTol);
  }
}

TEST_P(OracleMeshes, DivergenceAndCoupling)
{
  const TaylorHoodSpace th(mesh());
  EXPECT_LT(max_abs_diff(oracle::dense(assemble_divergence(th)), oracle::divergence(th)), kOracleTol);
  for (int d = 0; d < 2; ++d)
    EXPECT_LT(max_abs_diff(oracle::dense(assemble_gradient_coupling(th.pressure, th.velocity, d)),
                           oracle::gradient_coupling(th.pressure, th.velocity, d)),
              kOracleTol);
  EXPECT_LT(max_abs_diff(assemble_mean_vector(th.pressure), oracle::mean_vector(th.pressure)), kOracleTol);
}

TEST_P(OracleMeshes, ConvectionAndTrilinearForm)
{
  const TaylorHoodSpace th(mesh());
  const Index n = th.n_velocity();
  const FieldVector w = random_vector(n, 1), u = random_vector(n, 2), v = random_vector(n, 3);
  const Eigen::MatrixXd c = oracle::convection_scalar(th.velocity, w);
  EXPECT_LT(max_abs_diff(oracle::dense(assemble_convection_scalar(th.velocity, w)), c), kOracleTol);
  EXPECT_NEAR(apply_bstar(th.velocity, w, u, v), oracle::bstar(th.velocity, w, u, v), 1e-11);
}

TEST_P(OracleMeshes, Loads)
{
  const auto m = mesh();
  const ScalarSpace v(m, 2);
  // Cubic data against quadratic test functions: both rules are exact.
  auto g = [](const Point& p) { return 1.0 + p.x() * p.y() - p.y() * p.y() * p.x() + p.x() * p.x() * p.x(); };
  EXPECT_LT(max_abs_diff(assemble_load(v, g), oracle::load(v, g)), kOracleTol);
}

INSTANTIATE_TEST_SUITE_P(Meshes, OracleMeshes, ::testing::Values(0, 1));

TEST(Operators, ReferenceP1Element)
{
  const auto m = std::make_shared<const Mesh>(
      Mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}},
           {{{0, 1}, BoundaryTag::Wall}, {{1, 2}, BoundaryTag::Wall}, {{2, 0}, BoundaryTag::Wall}}));
  const ScalarSpace p1(m, 1);
  Eigen::Matrix3d mass_expected, stiff_expected;
  mass_expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  mass_expected *= 0.5 / 12.0;
  stiff_expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  stiff_expected *= 0.5;
  EXPECT_LT(max_abs_diff(oracle::dense(assemble_mass(p1)), mass_expected), 1e-15);
  EXPECT_LT(max_abs_diff(oracle::dense(assemble_stiffness(p1)), stiff_expected), 1e-15);
}

TEST(Operators, StiffnessOfLinearFunction)
{
  const ScalarSpace p2(std::make_shared<const Mesh>(build_rectangle_mesh(0, 0, 1, 1, 4, 4)), 2);
  const FieldVector u = interpolate([](const Point& p) { return p.x() + 2 * p.y(); }, p2);
  EXPECT_NEAR(u.dot(assemble_stiffness(p2) * u), 5.0, 1e-12);
  const FieldVector one = FieldVector::Ones(p2.n_dofs());
  EXPECT_NEAR((assemble_stiffness(p2) * one).norm(), 0.0, 1e-12);
  EXPECT_NEAR(one.dot(assemble_mass(p2) * one), 1.0, 1e-13);
}

TEST(Operators, SymmetryAndBlocks)
{
  const ScalarSpace p2(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(4, 5)), 2);
  const SparseOperator k = assemble_stiffness(p2);
  EXPECT_LT(max_abs_diff(oracle::dense(k), oracle::dense(SparseOperator(k.transpose()))), 1e-14);
  const Eigen::MatrixXd kb = oracle::dense(vector_block(k));
  const Index n = p2.n_dofs();
  EXPECT_EQ(kb.rows(), 2 * n);
  EXPECT_LT(max_abs_diff(kb.topLeftCorner(n, n), oracle::dense(k)), 0.0 + 1e-300);
  EXPECT_LT(max_abs_diff(kb.bottomRightCorner(n, n), oracle::dense(k)), 1e-300);
  EXPECT_EQ(kb.topRightCorner(n, n).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Operators, DivergenceFreeRotationIsInKernel)
{
  const TaylorHoodSpace th(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(5, 2)));
  const FieldVector u = interpolate([](const Point& p) { return Vec2(-p.y(), p.x()); }, th.velocity);
  EXPECT_LT((assemble_divergence(th) * u).cwiseAbs().maxCoeff(), 1e-14);
  const FieldVector s = interpolate([](const Point& p) { return Vec2(p.y() * p.y(), p.x() * p.x()); }, th.velocity);
  EXPECT_LT((assemble_divergence(th) * s).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Operators, PressureLoadIsTransposedDivergence)
{
  const TaylorHoodSpace th(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(3, 9)));
  auto p = [](const Point& x) { return 1.0 - 2.0 * x.x() + 0.5 * x.y(); };
  const FieldVector ph = interpolate(p, th.pressure);
  const FieldVector expected = SparseOperator(assemble_divergence(th).transpose()) * ph;
  EXPECT_LT(max_abs_diff(assemble_pressure_load(th.velocity, p), expected), 1e-13);
}

TEST(Operators, GradientLoadMatchesStiffness)
{
  const TaylorHoodSpace th(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(3, 4)));
  auto u = [](const Point& x) { return Vec2(x.x() * x.y(), 1.0 - x.x() * x.x() + x.y()); };
  auto grad = [](const Point& x) {
    Mat2 g;
    g << x.y(), x.x(), -2.0 * x.x(), 1.0;
    return g;
  };
  const FieldVector uh = interpolate(u, th.velocity);
  const FieldVector expected = vector_block(assemble_stiffness(th.velocity)) * uh;
  EXPECT_LT(max_abs_diff(assemble_gradient_load(th.velocity, grad), expected), 1e-13);
  const FieldVector div_expected = assemble_divergence(th) * uh;
  EXPECT_LT(max_abs_diff(assemble_divergence_load(th.pressure, grad), div_expected), 1e-13);
}

TEST(TrilinearForm, SkewAndLinear)
{
  const TaylorHoodSpace th(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(4, 3)));
  const Index n = th.n_velocity();
  const FieldVector u = random_vector(n, 4), v = random_vector(n, 5), w = random_vector(n, 6),
                    z = random_vector(n, 7);
  EXPECT_NEAR(apply_bstar(th.velocity, u, v, v), 0.0, 1e-13);
  EXPECT_NEAR(apply_bstar(th.velocity, u, v, w), -apply_bstar(th.velocity, u, w, v), 1e-13);
  const double a = 0.7, b = -1.3;
  EXPECT_NEAR(apply_bstar(th.velocity, a * u + b * z, v, w),
              a * apply_bstar(th.velocity, u, v, w) + b * apply_bstar(th.velocity, z, v, w), 1e-12);
  EXPECT_NEAR(apply_bstar(th.velocity, u, a * v + b * z, w),
              a * apply_bstar(th.velocity, u, v, w) + b * apply_bstar(th.velocity, u, z, w), 1e-12);
}

TEST(TrilinearForm, LinearizedOperatorIsSkew)
{
  const TaylorHoodSpace th(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(4, 8)));
  const Index n = th.n_velocity();
  const FieldVector w = random_vector(n, 10), v = random_vector(n, 11), z = random_vector(n, 12);
  const SparseOperator nw = assemble_convection_linearized(th.velocity, w);
  EXPECT_NEAR(v.dot(nw * v), 0.0, 1e-12);
  EXPECT_NEAR(z.dot(nw * v), apply_bstar(th.velocity, w, v, z), 1e-12);
  const Eigen::MatrixXd dn = oracle::dense(nw);
  EXPECT_LT((dn + dn.transpose()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(GradientProjection, ReproducesLinearGradients)
{
  const TaylorHoodSpace th(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(4, 1)));
  const P1GradientProjection proj(th.velocity, th.pressure);
  const FieldVector u = interpolate([](const Point& p) { return Vec2(p.x(), p.y()); }, th.velocity);
  const CoarseGradient g = proj.project(u);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d)
      EXPECT_LT((g(c, d).array() - (c == d ? 1.0 : 0.0)).abs().maxCoeff(), 1e-10);
  // (x, y) has identity gradient, so its dissipation load is K (x, y).
  const FieldVector expected = vector_block(assemble_stiffness(th.velocity)) * u;
  EXPECT_LT(max_abs_diff(proj.dissipation_load(g), expected), 1e-10);
}

TEST(GradientProjection, OrthogonalAndIdempotent)
{
  const TaylorHoodSpace th(std::make_shared<const Mesh>(oracle::perturbed_square_mesh(4, 6)));
  const P1GradientProjection proj(th.velocity, th.pressure);
  const FieldVector u = random_vector(th.n_velocity(), 21);
  const CoarseGradient g = proj.project(u);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d)
      EXPECT_LT((proj.mass() * g(c, d) - proj.projection_rhs(u, c, d)).norm(), 1e-10);
  // Quadratic velocities have piecewise linear continuous gradients.
  const FieldVector q = interpolate(
      [](const Point& p) { return Vec2(p.x() * p.x() - p.y(), p.x() * p.y()); }, th.velocity);
  const CoarseGradient gq = proj.project(q);
  const FieldVector expected = interpolate([](const Point& p) { return 2.0 * p.x(); }, th.pressure);
  EXPECT_LT((gq(0, 0) - expected).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(gradient_mismatch_sq(th.velocity, th.pressure, q, gq), 1e-20);
  const CoarseGradient again = project_gradient_coarse(q, th.velocity, th.pressure);
  for (int i = 0; i < 4; ++i)
    EXPECT_LT((again.component[i] - gq.component[i]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GradientProjection, MismatchShrinksUnderRefinement)
{
  auto u = [](const Point& p) { return Vec2(std::sin(3 * p.x()) * p.y(), std::cos(2 * p.y() + p.x())); };
  double previous = INFINITY;
  for (int n : {4, 8, 16}) {
    const TaylorHoodSpace th(std::make_shared<const Mesh>(build_rectangle_mesh(0, 0, 1, 1, n, n)));
    const FieldVector uh = interpolate(u, th.velocity);
    const double mismatch =
        std::sqrt(gradient_mismatch_sq(th.velocity, th.pressure, uh, project_gradient_coarse(uh, th.velocity, th.pressure)));
    EXPECT_LT(mismatch, 0.6 * previous);
    previous = mismatch;
  }
}
