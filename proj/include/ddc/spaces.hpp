// ============================================================================
// ddc/spaces.hpp - quadrature, Lagrange P1/P2 bases and finite element spaces
//
// Reference triangle: vertices (0,0), (1,0), (0,1); barycentric coordinates
// (l0, l1, l2) with l1 = xi, l2 = eta. Local P2 ordering is the three
// vertices followed by the midpoints of edges 01, 12, 20.
// ============================================================================
#pragma once

#include "ddc/mesh.hpp"
#include "ddc/types.hpp"

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace ddc {

using Barycentric = std::array<double, 3>;

struct QuadratureRule {
  int degree = 0;
  std::vector<Barycentric> points;
  std::vector<double> weights; // sum to 1/2, the reference area
};

/// Symmetric rules exact to the given polynomial degree. Supported: 1, 2, 5.
const QuadratureRule& triangle_rule(int degree);

/// The 7-point degree-5 rule used by all assembly and error integration.
inline const QuadratureRule& assembly_rule() { return triangle_rule(5); }

struct ShapeValues {
  int n = 0;
  std::array<double, 6> phi{};
  std::array<Vec2, 6> dphi{}; // gradients w.r.t. (xi, eta)
};

/// Lagrange basis of degree 1 or 2 at a point of the reference triangle.
/// Throws std::invalid_argument for other degrees or points outside the simplex.
ShapeValues eval_basis(int degree, const Barycentric& point);

/// Affine map of one triangle: x = x0 + J * (xi, eta).
struct ElementGeometry {
  Point origin;
  Mat2 jacobian;
  Mat2 inverse_transpose; // maps reference gradients to physical ones
  double det = 0.0;       // twice the area

  Point map(const Barycentric& b) const;
};

ElementGeometry element_geometry(const Mesh& mesh, Index t);

class ScalarSpace {
public:
  ScalarSpace(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  Index n_dofs() const { return n_dofs_; }
  int dofs_per_cell() const { return degree_ == 1 ? 3 : 6; }

  std::span<const Index> cell_dofs(Index t) const
  {
    return {cell_dofs_.data() + static_cast<std::size_t>(t) * dofs_per_cell(),
            static_cast<std::size_t>(dofs_per_cell())};
  }
  const std::vector<Point>& dof_coordinates() const { return coords_; }

  /// Sorted dofs on facets carrying the tag (vertices and, for P2, midpoints).
  const std::vector<Index>& boundary_dofs(BoundaryTag tag) const
  {
    return boundary_[static_cast<std::size_t>(tag)];
  }

private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  Index n_dofs_ = 0;
  std::vector<Index> cell_dofs_;
  std::vector<Point> coords_;
  std::array<std::vector<Index>, 4> boundary_;
};

/// Shared-ownership convenience for the common case.
ScalarSpace build_scalar_space(std::shared_ptr<const Mesh> mesh, int degree);

/// P2 vector velocity / P1 pressure. Velocity vectors are component-blocked
/// (x-dofs then y-dofs), so n_velocity() == 2 * velocity.n_dofs().
struct TaylorHoodSpace {
  explicit TaylorHoodSpace(std::shared_ptr<const Mesh> mesh);

  std::shared_ptr<const Mesh> mesh;
  ScalarSpace velocity;
  ScalarSpace pressure;

  Index n_velocity() const { return 2 * velocity.n_dofs(); }
  Index n_pressure() const { return pressure.n_dofs(); }
};

FieldVector interpolate(const ScalarFunction& f, const ScalarSpace& space);
FieldVector interpolate(const VectorFunction& f, const ScalarSpace& vector_space);

/// Value of a scalar field inside cell t.
double evaluate(const ScalarSpace& space, const FieldVector& coeffs, Index t, const Barycentric& b);
/// Value of a scalar field at an arbitrary point (linear search for the cell).
double evaluate(const ScalarSpace& space, const FieldVector& coeffs, const Point& p);

/// Locate the cell containing p; returns -1 when outside the mesh.
Index locate(const Mesh& mesh, const Point& p, Barycentric* bary = nullptr);

} // namespace ddc
