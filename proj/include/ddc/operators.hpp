// ============================================================================
// ddc/operators.hpp - finite element operator and load assembly
//
// Every operator is assembled element by element in mesh order with the
// 7-point degree-5 rule, so the results are bitwise reproducible. Vector
// (velocity) operators act on component-blocked coefficient vectors.
// ============================================================================
#pragma once

#include "ddc/linsolve.hpp"
#include "ddc/sparse.hpp"
#include "ddc/spaces.hpp"

#include <array>
#include <memory>

namespace ddc {

/// (phi_j, phi_i)
SparseOperator assemble_mass(const ScalarSpace& space);
/// (grad phi_j, grad phi_i)
SparseOperator assemble_stiffness(const ScalarSpace& space);

/// Block-diagonal copies of a scalar operator acting on both velocity components.
SparseOperator vector_block(const SparseOperator& scalar);

/// B[q, v] = (psi_q, div v) for pressure basis psi_q and velocity basis v.
SparseOperator assemble_divergence(const TaylorHoodSpace& th);

/// Skew-symmetrized trilinear form
///   b*(u, v, w) = 1/2 (u . grad v, w) - 1/2 (u . grad w, v)
/// of three velocity fields on the given P2 space.
double apply_bstar(const ScalarSpace& velocity, const FieldVector& u, const FieldVector& v,
                   const FieldVector& w);

/// Scalar Picard block C(w)[i, j] = b*(w, phi_j, phi_i) restricted to one component.
SparseOperator assemble_convection_scalar(const ScalarSpace& velocity, const FieldVector& w);

/// N(w) with z . N(w) v = b*(w, v, z) for all velocity vectors v, z.
SparseOperator assemble_convection_linearized(const ScalarSpace& velocity, const FieldVector& w);

/// (f, phi_i) for a scalar source.
FieldVector assemble_load(const ScalarSpace& space, const ScalarFunction& f);
/// (f(t), v_i) for a vector source on a velocity space.
FieldVector assemble_load(const ScalarSpace& velocity, const TimeVectorFunction& f, double t);

/// (G, grad v_i) for a tensor function G, G(c, d) ~ d u_c / d x_d.
FieldVector assemble_gradient_load(const ScalarSpace& velocity, const TensorFunction& grad);
/// (p, div v_i) for a scalar function p.
FieldVector assemble_pressure_load(const ScalarSpace& velocity, const ScalarFunction& p);
/// (trace G, psi_q) on the pressure space.
FieldVector assemble_divergence_load(const ScalarSpace& pressure, const TensorFunction& grad);

/// int psi_q for every pressure basis function (the zero-mean constraint vector).
FieldVector assemble_mean_vector(const ScalarSpace& pressure);

/// R_d[i, j] = (psi_i, d phi_j / d x_d) between a P1 row space and P2 column space.
SparseOperator assemble_gradient_coupling(const ScalarSpace& rows, const ScalarSpace& cols, int d);

/// The four components of a 2x2 tensor field; component (c, d) lives at
/// index 2 * c + d and approximates d u_c / d x_d.
struct CoarseGradient {
  std::array<FieldVector, 4> component;

  FieldVector& operator()(int c, int d) { return component[2 * c + d]; }
  const FieldVector& operator()(int c, int d) const { return component[2 * c + d]; }
};

/// Large-scale model used by the subgrid predictor: a projection of the
/// velocity gradient and the load it induces on velocity test functions.
class LargeScaleProjection {
public:
  virtual ~LargeScaleProjection() = default;

  virtual CoarseGradient project(const FieldVector& u) const = 0;
  /// (G, grad v_i) for every velocity basis function.
  virtual FieldVector dissipation_load(const CoarseGradient& g) const = 0;
};

/// L2 projection of grad u onto continuous P1 on the same mesh, with the
/// consistent P1 mass matrix.
class P1GradientProjection final : public LargeScaleProjection {
public:
  P1GradientProjection(const ScalarSpace& velocity, const ScalarSpace& lspace,
                       double tol = 1e-12);

  CoarseGradient project(const FieldVector& u) const override;
  FieldVector dissipation_load(const CoarseGradient& g) const override;

  /// b_(c,d)[i] = (d u_c / d x_d, psi_i), the right-hand side of the projection.
  FieldVector projection_rhs(const FieldVector& u, int c, int d) const;

  const SparseOperator& mass() const { return solver_.matrix(); }
  const SparseOperator& coupling(int d) const { return coupling_[d]; }
  Index n_velocity_scalar() const { return n_velocity_; }

private:
  Index n_velocity_;
  std::array<SparseOperator, 2> coupling_;
  SpdSolver solver_;
  double tol_;
};

CoarseGradient project_gradient_coarse(const FieldVector& u, const ScalarSpace& velocity,
                                       const ScalarSpace& lspace);

} // namespace ddc
