// ============================================================================
// src/problems.cpp - exact fields, forcing and boundary data
// ============================================================================
#include "ddc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddc {

namespace {
constexpr double kPi = std::numbers::pi;
}

ManufacturedProblem::ManufacturedProblem(double nu) : nu_(nu)
{
  if (!(nu > 0.0))
    throw std::invalid_argument("ManufacturedProblem: viscosity must be positive");
}

Vec2 ManufacturedProblem::exact_velocity_at(double x, double y, double t)
{
  const double decay = std::exp(-t);
  return {decay * std::cos(2.0 * kPi * (y - t)), decay * std::sin(2.0 * kPi * (x - t))};
}

Mat2 ManufacturedProblem::exact_gradient_at(double x, double y, double t)
{
  const double decay = std::exp(-t);
  Mat2 g;
  g << 0.0, -2.0 * kPi * decay * std::sin(2.0 * kPi * (y - t)),
      2.0 * kPi * decay * std::cos(2.0 * kPi * (x - t)), 0.0;
  return g;
}

// f = u_t - nu Lap u + (u . grad) u with p = 0.
Vec2 ManufacturedProblem::exact_forcing(double nu, double x, double y, double t)
{
  const double e = std::exp(-t);
  const double e2 = e * e;
  const double a = 2.0 * kPi * (y - t);
  const double b = 2.0 * kPi * (x - t);
  const double ca = std::cos(a), sa = std::sin(a);
  const double cb = std::cos(b), sb = std::sin(b);
  const double lap = 4.0 * kPi * kPi * nu;

  const double f1 = e * (-ca + 2.0 * kPi * sa) + lap * e * ca - 2.0 * kPi * e2 * sb * sa;
  const double f2 = e * (-sb - 2.0 * kPi * cb) + lap * e * sb + 2.0 * kPi * e2 * ca * cb;
  return {f1, f2};
}

Vec2 ManufacturedProblem::forcing(const Point& p, double t) const
{
  return exact_forcing(nu_, p.x(), p.y(), t);
}

Vec2 ManufacturedProblem::boundary_velocity(BoundaryTag, const Point& p, double t) const
{
  return exact_velocity_at(p.x(), p.y(), t);
}

Vec2 ManufacturedProblem::initial_velocity(const Point& p) const
{
  return exact_velocity_at(p.x(), p.y(), 0.0);
}

std::optional<Mat2> ManufacturedProblem::initial_velocity_gradient(const Point& p) const
{
  return exact_gradient_at(p.x(), p.y(), 0.0);
}

Vec2 ManufacturedProblem::exact_velocity(const Point& p, double t) const
{
  return exact_velocity_at(p.x(), p.y(), t);
}

Mat2 ManufacturedProblem::exact_velocity_gradient(const Point& p, double t) const
{
  return exact_gradient_at(p.x(), p.y(), t);
}

double ManufacturedProblem::poincare_constant() const
{
  return 1.0 / (kPi * std::sqrt(2.0));
}

Vec2 inflow_profile(double y)
{
  constexpr double height = 10.0;
  if (!(y >= 0.0 && y <= height))
    throw std::invalid_argument("inflow_profile: y outside the channel");
  const double s = y / height;
  return {4.0 * s * (1.0 - s), 0.0};
}

Vec2 StepChannelProblem::boundary_velocity(BoundaryTag tag, const Point& p, double) const
{
  if (tag == BoundaryTag::Inflow)
    return inflow_profile(p.y());
  return Vec2::Zero();
}

Vec2 StepChannelProblem::initial_velocity(const Point& p) const
{
  // No-slip on the closed step square [5,6]x[0,1].
  constexpr double eps = 1e-12;
  if (p.x() >= 5.0 - eps && p.x() <= 6.0 + eps && p.y() <= 1.0 + eps)
    return Vec2::Zero();
  return inflow_profile(std::clamp(p.y(), 0.0, 10.0));
}

double StepChannelProblem::poincare_constant() const
{
  return 10.0 / kPi;
}

} // namespace ddc
