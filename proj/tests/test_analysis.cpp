// ============================================================================
// tests/test_analysis.cpp
// ============================================================================
#include "ddc/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace ddc;

TEST(ConvergenceRate, KnownPairs)
{
  EXPECT_NEAR(convergence_rate(0.08, 0.02), 2.0, 1e-15);
  EXPECT_NEAR(convergence_rate(0.103376, 0.0618065), 0.74, 5e-3);
  EXPECT_NEAR(convergence_rate(0.0255807, 0.00655849), 1.96, 5e-3);
  EXPECT_NEAR(convergence_rate(3e-7, 3e-7), 0.0, 1e-15);
  EXPECT_THROW(convergence_rate(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(convergence_rate(1.0, -1.0), std::invalid_argument);
}

TEST(ConvergenceRate, ScaleInvariant)
{
  for (double s : {1e-6, 0.37, 1e4})
    EXPECT_NEAR(convergence_rate(s * 0.103376, s * 0.0618065), convergence_rate(0.103376, 0.0618065),
                1e-13);
}

TEST(ErrorAccumulator, ConstantErrorGivesRootT)
{
  const double c = 0.3, k = 0.01;
  ErrorAccumulator acc(100);
  for (int i = 0; i < 100; ++i)
    acc.add(k, {c, 2 * c});
  const SpaceTimeError e = acc.finalize();
  EXPECT_NEAR(e.l2_l2, c * std::sqrt(1.0), 1e-14);
  EXPECT_NEAR(e.l2_h1, 2 * c, 1e-14);
}

TEST(ErrorAccumulator, MatchesDirectSum)
{
  ErrorAccumulator acc;
  double direct = 0.0;
  for (int i = 1; i <= 7; ++i) {
    acc.add(0.125, {0.1 * i, 0.0});
    direct += 0.125 * 0.01 * i * i;
  }
  EXPECT_NEAR(acc.finalize().l2_l2, std::sqrt(direct), 1e-15);
  EXPECT_EQ(acc.steps(), 7);
}

TEST(ErrorAccumulator, RejectsEarlyFinalizeAndBadStep)
{
  ErrorAccumulator acc(3);
  EXPECT_THROW(acc.finalize(), std::logic_error);
  acc.add(0.1, {1, 1});
  EXPECT_THROW(acc.finalize(), std::logic_error);
  EXPECT_THROW(acc.add(0.0, {1, 1}), std::invalid_argument);
}

TEST(StepError, ExactFieldIsZeroAndConstantIsOne)
{
  const ScalarSpace v(std::make_shared<const Mesh>(build_rectangle_mesh(0, 0, 1, 1, 3, 3)), 2);
  auto zero_grad = [](const Point&) { return Mat2::Zero().eval(); };
  const FieldVector zero = FieldVector::Zero(2 * v.n_dofs());
  const StepError one = step_error(v, zero, [](const Point&) { return Vec2(1.0, 0.0); }, zero_grad);
  EXPECT_NEAR(one.l2, 1.0, 1e-14);
  EXPECT_NEAR(one.h1_semi, 0.0, 1e-14);

  auto q = [](const Point& p) { return Vec2(p.x() * p.y(), p.y() * p.y() - p.x()); };
  auto gq = [](const Point& p) {
    Mat2 g;
    g << p.y(), p.x(), -1.0, 2 * p.y();
    return g;
  };
  const StepError exact = step_error(v, interpolate(q, v), q, gq);
  EXPECT_LT(exact.l2, 1e-14);
  EXPECT_LT(exact.h1_semi, 1e-13);
}

TEST(StepError, ManufacturedFieldNormAtTimeZero)
{
  // int cos^2(2 pi y) + sin^2(2 pi x) over the unit square is 1.
  const ScalarSpace v(std::make_shared<const Mesh>(build_rectangle_mesh(0, 0, 1, 1, 16, 16)), 2);
  const FieldVector zero = FieldVector::Zero(2 * v.n_dofs());
  const StepError e = step_error(
      v, zero, [](const Point& p) { return ManufacturedProblem::exact_velocity_at(p.x(), p.y(), 0.0); },
      [](const Point& p) { return ManufacturedProblem::exact_gradient_at(p.x(), p.y(), 0.0); });
  EXPECT_NEAR(e.l2, 1.0, 1e-6);
  EXPECT_NEAR(e.h1_semi, 2 * std::numbers::pi, 1e-5);
  EXPECT_NEAR(l2_norm(v, [](const Point&) { return Vec2(3.0, 4.0); }), 5.0, 1e-12);
}

TEST(RateTable, SingleLevelHasEmptyRates)
{
  RateTable t;
  t.add_level(4, {0.5, 2.0}, {0.25, 1.0});
  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str(), std::string(RateTable::kHeader) + "\n4,0.5,,2,,0.25,,1,\n");
}

TEST(RateTable, RatesPerHalving)
{
  RateTable t;
  t.add_level(4, {0.08, 0.8}, {0.16, 1.6});
  t.add_level(8, {0.04, 0.4}, {0.04, 0.8});
  t.add_level(32, {0.01, 0.1}, {0.0025, 0.2});  // two halvings
  ASSERT_EQ(t.rows().size(), 3u);
  EXPECT_FALSE(t.rows()[0].cr1_l2.has_value());
  EXPECT_NEAR(*t.rows()[1].cr1_l2, 1.0, 1e-15);
  EXPECT_NEAR(*t.rows()[1].cr2_l2, 2.0, 1e-15);
  EXPECT_NEAR(*t.rows()[1].cr2_h1, 1.0, 1e-15);
  EXPECT_NEAR(*t.rows()[2].cr1_h1, 1.0, 1e-15);
  EXPECT_NEAR(*t.rows()[2].cr2_l2, 2.0, 1e-15);
  EXPECT_THROW(t.add_level(32, {1, 1}, {1, 1}), std::invalid_argument);
}

TEST(WeakDivergence, RemovesMeanDirection)
{
  SparseOperator d(2, 2);
  d.insert(0, 0) = 1.0;
  d.insert(1, 1) = 1.0;
  const FieldVector u = FieldVector::Ones(2);
  const FieldVector c = FieldVector::Ones(2);
  EXPECT_NEAR(weak_divergence_norm(d, u, nullptr), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(weak_divergence_norm(d, u, &c), 0.0, 1e-15);
}

TEST(SteadyStateDetector, FiresOnceBelowThreshold)
{
  SteadyStateDetector det(1e-3);
  det.add(1, 0.1, 1e-2);
  EXPECT_FALSE(det.triggered());
  det.add(2, 0.2, 5e-4);
  det.add(3, 0.3, 1e-4);
  ASSERT_TRUE(det.triggered());
  EXPECT_EQ(*det.trigger_step(), 2);
  EXPECT_DOUBLE_EQ(*det.trigger_time(), 0.2);
}

TEST(MonotoneDecay, WindowedMaxima)
{
  std::vector<double> decaying, oscillating;
  for (int i = 0; i < 100; ++i) {
    decaying.push_back(std::exp(-0.05 * i) * (1.0 + 0.3 * (i % 2)));
    oscillating.push_back(1.0 + 0.5 * std::sin(0.3 * i));
  }
  EXPECT_TRUE(monotone_decay(decaying, 5));
  EXPECT_FALSE(monotone_decay(oscillating, 5));
  EXPECT_FALSE(monotone_decay({1.0, 0.5}, 5));
  EXPECT_THROW(monotone_decay(decaying, 0), std::invalid_argument);
}
