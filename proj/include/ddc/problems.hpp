// ============================================================================
// ddc/problems.hpp - concrete flow problems
//
// ManufacturedProblem: rotating flow on [0,1]^2
//     u1 = exp(-t) cos(2 pi (y - t)),  u2 = exp(-t) sin(2 pi (x - t)),  p = 0,
// with the forcing that makes it an exact Navier-Stokes solution and
// Dirichlet data from the exact field on the whole boundary.
//
// StepChannelProblem: flow over a forward-backward facing step in a 40x10
// channel, nu = 1/600, parabolic inflow of peak 1, no-slip walls and step,
// natural ("do nothing") outflow, no forcing.
// ============================================================================
#pragma once

#include "ddc/mesh.hpp"
#include "ddc/types.hpp"

#include <optional>
#include <vector>

namespace ddc {

/// Interface the time-stepping schemes need from a problem definition.
class FlowProblem {
public:
  virtual ~FlowProblem() = default;

  virtual double viscosity() const = 0;
  virtual Vec2 forcing(const Point& p, double t) const = 0;
  virtual bool has_forcing() const { return true; }

  /// Boundary tags whose dofs carry strongly imposed velocity data.
  virtual std::vector<BoundaryTag> dirichlet_tags() const = 0;
  virtual Vec2 boundary_velocity(BoundaryTag tag, const Point& p, double t) const = 0;
  /// True when the velocity is prescribed on the whole boundary and the
  /// pressure must be fixed by a zero-mean condition.
  virtual bool zero_mean_pressure() const = 0;

  virtual Vec2 initial_velocity(const Point& p) const = 0;
  /// Analytic gradient of the initial velocity; empty when the initial state is
  /// only defined through its nodal interpolant.
  virtual std::optional<Mat2> initial_velocity_gradient(const Point& p) const = 0;
  virtual double initial_pressure(const Point&) const { return 0.0; }

  virtual bool has_exact_solution() const { return false; }
  virtual Vec2 exact_velocity(const Point&, double) const { return Vec2::Zero(); }
  virtual Mat2 exact_velocity_gradient(const Point&, double) const { return Mat2::Zero(); }

  /// Poincare constant C with ||v|| <= C ||grad v|| for velocities vanishing on
  /// the Dirichlet boundary; turns ||f|| into a computable bound for ||f||_{-1}.
  virtual double poincare_constant() const = 0;
};

class ManufacturedProblem final : public FlowProblem {
public:
  explicit ManufacturedProblem(double nu);

  static Vec2 exact_velocity_at(double x, double y, double t);
  static Mat2 exact_gradient_at(double x, double y, double t);
  static Vec2 exact_forcing(double nu, double x, double y, double t);

  double viscosity() const override { return nu_; }
  Vec2 forcing(const Point& p, double t) const override;
  std::vector<BoundaryTag> dirichlet_tags() const override { return {BoundaryTag::Exact}; }
  Vec2 boundary_velocity(BoundaryTag tag, const Point& p, double t) const override;
  bool zero_mean_pressure() const override { return true; }
  Vec2 initial_velocity(const Point& p) const override;
  std::optional<Mat2> initial_velocity_gradient(const Point& p) const override;

  bool has_exact_solution() const override { return true; }
  Vec2 exact_velocity(const Point& p, double t) const override;
  Mat2 exact_velocity_gradient(const Point& p, double t) const override;

  /// 1 / (pi sqrt 2): first Dirichlet eigenvalue of the unit square is 2 pi^2.
  double poincare_constant() const override;

private:
  double nu_;
};

/// Parabolic inflow across the 10-unit channel height, peak speed 1 at y = 5.
/// Throws std::invalid_argument for y outside [0, 10].
Vec2 inflow_profile(double y);

class StepChannelProblem final : public FlowProblem {
public:
  static constexpr double kViscosity = 1.0 / 600.0;

  explicit StepChannelProblem(double nu = kViscosity) : nu_(nu) {}

  double viscosity() const override { return nu_; }
  Vec2 forcing(const Point&, double) const override { return Vec2::Zero(); }
  bool has_forcing() const override { return false; }
  std::vector<BoundaryTag> dirichlet_tags() const override
  {
    return {BoundaryTag::Inflow, BoundaryTag::Wall};
  }
  Vec2 boundary_velocity(BoundaryTag tag, const Point& p, double t) const override;
  bool zero_mean_pressure() const override { return false; }
  /// The inflow parabola extended across the whole channel, zero on the step.
  Vec2 initial_velocity(const Point& p) const override;
  std::optional<Mat2> initial_velocity_gradient(const Point&) const override
  {
    return std::nullopt;
  }

  /// 10 / pi: one-dimensional bound across the channel height between the walls.
  double poincare_constant() const override;

private:
  double nu_;
};

} // namespace ddc
