// ============================================================================
// tests/support/oracle.hpp - brute-force reference computations
//
// Nothing here touches the library's reference element: local bases come
// from Vandermonde systems on the physical node coordinates of each cell and
// integrals use a collapsed (Duffy) Gauss-Legendre tensor rule whose nodes
// are computed by Newton iteration on Legendre polynomials.
// ============================================================================
#pragma once

#include "ddc/sparse.hpp"
#include "ddc/spaces.hpp"

#include <Eigen/Dense>

#include <vector>

namespace oracle {

using ddc::FieldVector;
using ddc::Index;
using ddc::Point;
using ddc::Vec2;

struct Rule1D {
  std::vector<double> x, w;  // on [0, 1]
};
Rule1D gauss_legendre(int n);

struct PhysicalRule {
  std::vector<Point> points;
  std::vector<double> weights;
};
/// n x n collapsed rule on the triangle (a, b, c); exact to degree 2n - 2.
PhysicalRule triangle_rule(const Point& a, const Point& b, const Point& c, int n = 8);

/// Lagrange basis of total degree 1 or 2 through the given physical nodes.
class LocalBasis {
public:
  LocalBasis(const std::vector<Point>& nodes, int degree);
  int size() const { return n_; }
  double value(int i, const Point& x) const;
  Vec2 gradient(int i, const Point& x) const;

private:
  Eigen::VectorXd monomials(const Point& x) const;
  Eigen::MatrixXd monomial_gradients(const Point& x) const;  // n x 2
  int degree_, n_;
  Eigen::MatrixXd coeff_;  // column i = coefficients of basis i
};

/// Dense global operators built per entry by looping over all cells.
Eigen::MatrixXd mass(const ddc::ScalarSpace& space);
Eigen::MatrixXd stiffness(const ddc::ScalarSpace& space);
/// D[q, v] = (psi_q, div v), component-blocked velocity columns.
Eigen::MatrixXd divergence(const ddc::TaylorHoodSpace& th);
/// C[i, j] = 1/2 (w . grad phi_j, phi_i) - 1/2 (w . grad phi_i, phi_j).
Eigen::MatrixXd convection_scalar(const ddc::ScalarSpace& velocity, const FieldVector& w);
/// R[i, j] = (psi_i, d phi_j / dx_d).
Eigen::MatrixXd gradient_coupling(const ddc::ScalarSpace& rows, const ddc::ScalarSpace& cols, int d);
Eigen::VectorXd mean_vector(const ddc::ScalarSpace& pressure);
Eigen::VectorXd load(const ddc::ScalarSpace& space, const ddc::ScalarFunction& f);

/// b*(u, v, w) by an element loop with the oracle basis and rule.
double bstar(const ddc::ScalarSpace& velocity, const FieldVector& u, const FieldVector& v,
             const FieldVector& w);

Eigen::MatrixXd dense(const ddc::SparseOperator& a);

/// Two triangles with no symmetry: (0,0), (1.3,0.2), (0.4,1.1), (1.5,1.4).
ddc::Mesh two_triangle_mesh();
/// A structured rectangle mesh with interior nodes shifted pseudo-randomly.
ddc::Mesh perturbed_square_mesh(int n, unsigned seed);

} // namespace oracle
