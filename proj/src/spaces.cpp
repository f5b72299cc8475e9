// ============================================================================
// src/spaces.cpp - quadrature rules, Lagrange bases and dof enumeration
// ============================================================================
#include "ddc/spaces.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ddc {

namespace {

QuadratureRule make_rule_1()
{
  return {1, {{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {0.5}};
}

QuadratureRule make_rule_2()
{
  QuadratureRule r{2, {}, {}};
  const double a = 1.0 / 6, b = 2.0 / 3;
  r.points = {{b, a, a}, {a, b, a}, {a, a, b}};
  r.weights = {1.0 / 6, 1.0 / 6, 1.0 / 6};
  return r;
}

// Radon's 7-point rule.
QuadratureRule make_rule_5()
{
  QuadratureRule r{5, {}, {}};
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0, b1 = 1.0 - 2.0 * a1;
  const double a2 = (6.0 + s15) / 21.0, b2 = 1.0 - 2.0 * a2;
  const double w1 = (155.0 - s15) / 2400.0;
  const double w2 = (155.0 + s15) / 2400.0;
  r.points = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1},
              {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}};
  r.weights = {9.0 / 80, w1, w1, w1, w2, w2, w2};
  return r;
}

const std::array<Vec2, 3> kBaryGrad = {Vec2(-1.0, -1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};

} // namespace

const QuadratureRule& triangle_rule(int degree)
{
  static const QuadratureRule r1 = make_rule_1();
  static const QuadratureRule r2 = make_rule_2();
  static const QuadratureRule r5 = make_rule_5();
  switch (degree) {
  case 1: return r1;
  case 2: return r2;
  case 5: return r5;
  default: throw std::invalid_argument("triangle_rule: unsupported degree " + std::to_string(degree));
  }
}

ShapeValues eval_basis(int degree, const Barycentric& l)
{
  constexpr double tol = 1e-12;
  if (std::abs(l[0] + l[1] + l[2] - 1.0) > tol)
    throw std::invalid_argument("eval_basis: barycentric coordinates must sum to 1");
  for (double c : l)
    if (c < -tol || c > 1.0 + tol)
      throw std::invalid_argument("eval_basis: point outside the reference triangle");

  ShapeValues s;
  if (degree == 1) {
    s.n = 3;
    for (int i = 0; i < 3; ++i) {
      s.phi[i] = l[i];
      s.dphi[i] = kBaryGrad[i];
    }
  } else if (degree == 2) {
    s.n = 6;
    for (int i = 0; i < 3; ++i) {
      s.phi[i] = l[i] * (2.0 * l[i] - 1.0);
      s.dphi[i] = (4.0 * l[i] - 1.0) * kBaryGrad[i];
    }
    for (int e = 0; e < 3; ++e) {
      const int i = e, j = (e + 1) % 3;
      s.phi[3 + e] = 4.0 * l[i] * l[j];
      s.dphi[3 + e] = 4.0 * (l[i] * kBaryGrad[j] + l[j] * kBaryGrad[i]);
    }
  } else {
    throw std::invalid_argument("eval_basis: unsupported degree " + std::to_string(degree));
  }
  return s;
}

Point ElementGeometry::map(const Barycentric& b) const
{
  return origin + jacobian * Vec2(b[1], b[2]);
}

ElementGeometry element_geometry(const Mesh& mesh, Index t)
{
  const auto& v = mesh.triangles()[t].v;
  const Point& p0 = mesh.nodes()[v[0]];
  ElementGeometry g;
  g.origin = p0;
  g.jacobian.col(0) = mesh.nodes()[v[1]] - p0;
  g.jacobian.col(1) = mesh.nodes()[v[2]] - p0;
  g.det = g.jacobian.determinant();
  g.inverse_transpose = g.jacobian.inverse().transpose();
  return g;
}

ScalarSpace::ScalarSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree)
{
  if (!mesh_)
    throw std::invalid_argument("ScalarSpace: null mesh");
  if (degree_ != 1 && degree_ != 2)
    throw std::invalid_argument("ScalarSpace: unsupported degree " + std::to_string(degree_));

  const Mesh& m = *mesh_;
  const Index nn = m.n_nodes();
  n_dofs_ = degree_ == 1 ? nn : nn + m.n_edges();

  coords_ = m.nodes();
  if (degree_ == 2)
    for (const auto& e : m.edges())
      coords_.push_back(0.5 * (m.nodes()[e[0]] + m.nodes()[e[1]]));

  const int per = dofs_per_cell();
  cell_dofs_.resize(static_cast<std::size_t>(m.n_triangles()) * per);
  for (Index t = 0; t < m.n_triangles(); ++t) {
    Index* dofs = cell_dofs_.data() + static_cast<std::size_t>(t) * per;
    for (int i = 0; i < 3; ++i)
      dofs[i] = m.triangles()[t].v[i];
    if (degree_ == 2)
      for (int e = 0; e < 3; ++e)
        dofs[3 + e] = nn + m.triangle_edge(t, e);
  }

  for (const BoundaryFacet& f : m.facets()) {
    auto& set = boundary_[static_cast<std::size_t>(f.tag)];
    set.push_back(f.v[0]);
    set.push_back(f.v[1]);
    if (degree_ == 2)
      set.push_back(nn + m.find_edge(f.v[0], f.v[1]));
  }
  for (auto& set : boundary_) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
}

ScalarSpace build_scalar_space(std::shared_ptr<const Mesh> mesh, int degree)
{
  return ScalarSpace(std::move(mesh), degree);
}

TaylorHoodSpace::TaylorHoodSpace(std::shared_ptr<const Mesh> m)
    : mesh(std::move(m)), velocity(mesh, 2), pressure(mesh, 1)
{
}

FieldVector interpolate(const ScalarFunction& f, const ScalarSpace& space)
{
  FieldVector out(space.n_dofs());
  const auto& coords = space.dof_coordinates();
  for (Index i = 0; i < space.n_dofs(); ++i)
    out[i] = f(coords[i]);
  return out;
}

FieldVector interpolate(const VectorFunction& f, const ScalarSpace& space)
{
  const Index n = space.n_dofs();
  FieldVector out(2 * n);
  const auto& coords = space.dof_coordinates();
  for (Index i = 0; i < n; ++i) {
    const Vec2 v = f(coords[i]);
    out[i] = v.x();
    out[n + i] = v.y();
  }
  return out;
}

double evaluate(const ScalarSpace& space, const FieldVector& coeffs, Index t, const Barycentric& b)
{
  const ShapeValues s = eval_basis(space.degree(), b);
  const auto dofs = space.cell_dofs(t);
  double v = 0.0;
  for (int i = 0; i < s.n; ++i)
    v += coeffs[dofs[i]] * s.phi[i];
  return v;
}

Index locate(const Mesh& mesh, const Point& p, Barycentric* bary)
{
  constexpr double tol = 1e-12;
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const Vec2 ref = g.jacobian.inverse() * (p - g.origin);
    const Barycentric b{1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
    if (b[0] >= -tol && b[1] >= -tol && b[2] >= -tol) {
      if (bary)
        *bary = b;
      return t;
    }
  }
  return -1;
}

double evaluate(const ScalarSpace& space, const FieldVector& coeffs, const Point& p)
{
  Barycentric b;
  const Index t = locate(space.mesh(), p, &b);
  if (t < 0)
    throw std::invalid_argument("evaluate: point outside the mesh");
  return evaluate(space, coeffs, t, b);
}

} // namespace ddc
