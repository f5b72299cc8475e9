// ============================================================================
// src/operators.cpp - element loops for mass, stiffness, divergence,
// convection, loads and the coarse gradient projection
// ============================================================================
#include "ddc/operators.hpp"

#include <stdexcept>
#include <vector>

namespace ddc {

namespace {

constexpr int kMaxQp = 7;

// Basis values and reference gradients at the assembly rule points.
struct Tabulation {
  int n = 0;
  int nq = 0;
  std::array<ShapeValues, kMaxQp> at{};
};

const Tabulation& tabulation(int degree)
{
  static const auto build = [](int deg) {
    const QuadratureRule& rule = assembly_rule();
    Tabulation tab;
    tab.nq = static_cast<int>(rule.points.size());
    for (int q = 0; q < tab.nq; ++q)
      tab.at[q] = eval_basis(deg, rule.points[q]);
    tab.n = tab.at[0].n;
    return tab;
  };
  static const Tabulation p1 = build(1);
  static const Tabulation p2 = build(2);
  return degree == 1 ? p1 : p2;
}

// Per-cell physical quantities for one space.
struct CellValues {
  int n = 0;
  int nq = 0;
  std::array<double, kMaxQp> jxw{};
  std::array<std::array<double, 6>, kMaxQp> phi{};
  std::array<std::array<Vec2, 6>, kMaxQp> grad{};
  std::array<Point, kMaxQp> x{};

  void reinit(const ScalarSpace& space, Index t)
  {
    const Tabulation& tab = tabulation(space.degree());
    const QuadratureRule& rule = assembly_rule();
    const ElementGeometry g = element_geometry(space.mesh(), t);
    n = tab.n;
    nq = tab.nq;
    for (int q = 0; q < nq; ++q) {
      jxw[q] = rule.weights[q] * std::abs(g.det);
      x[q] = g.map(rule.points[q]);
      for (int i = 0; i < n; ++i) {
        phi[q][i] = tab.at[q].phi[i];
        grad[q][i] = g.inverse_transpose * tab.at[q].dphi[i];
      }
    }
  }
};

SparseOperator from_triplets(Index rows, Index cols, std::vector<Triplet>& trip)
{
  SparseOperator m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

void require_velocity(const ScalarSpace& velocity, const FieldVector& u, const char* what)
{
  if (u.size() != 2 * velocity.n_dofs())
    throw std::invalid_argument(std::string(what) + ": velocity vector has wrong length");
}

Vec2 velocity_at(const CellValues& cv, std::span<const Index> dofs, Index n, const FieldVector& u,
                 int q)
{
  Vec2 w = Vec2::Zero();
  for (int j = 0; j < cv.n; ++j) {
    w.x() += u[dofs[j]] * cv.phi[q][j];
    w.y() += u[n + dofs[j]] * cv.phi[q][j];
  }
  return w;
}

Mat2 gradient_at(const CellValues& cv, std::span<const Index> dofs, Index n, const FieldVector& u,
                 int q)
{
  Mat2 g = Mat2::Zero();
  for (int j = 0; j < cv.n; ++j) {
    g.row(0) += u[dofs[j]] * cv.grad[q][j].transpose();
    g.row(1) += u[n + dofs[j]] * cv.grad[q][j].transpose();
  }
  return g;
}

} // namespace

SparseOperator assemble_mass(const ScalarSpace& space)
{
  std::vector<Triplet> trip;
  const int per = space.dofs_per_cell();
  trip.reserve(static_cast<std::size_t>(space.mesh().n_triangles()) * per * per);
  CellValues cv;
  for (Index t = 0; t < space.mesh().n_triangles(); ++t) {
    cv.reinit(space, t);
    const auto dofs = space.cell_dofs(t);
    for (int i = 0; i < cv.n; ++i)
      for (int j = 0; j < cv.n; ++j) {
        double v = 0.0;
        for (int q = 0; q < cv.nq; ++q)
          v += cv.jxw[q] * cv.phi[q][i] * cv.phi[q][j];
        trip.emplace_back(dofs[i], dofs[j], v);
      }
  }
  return from_triplets(space.n_dofs(), space.n_dofs(), trip);
}

SparseOperator assemble_stiffness(const ScalarSpace& space)
{
  std::vector<Triplet> trip;
  const int per = space.dofs_per_cell();
  trip.reserve(static_cast<std::size_t>(space.mesh().n_triangles()) * per * per);
  CellValues cv;
  for (Index t = 0; t < space.mesh().n_triangles(); ++t) {
    cv.reinit(space, t);
    const auto dofs = space.cell_dofs(t);
    for (int i = 0; i < cv.n; ++i)
      for (int j = 0; j < cv.n; ++j) {
        double v = 0.0;
        for (int q = 0; q < cv.nq; ++q)
          v += cv.jxw[q] * cv.grad[q][i].dot(cv.grad[q][j]);
        trip.emplace_back(dofs[i], dofs[j], v);
      }
  }
  return from_triplets(space.n_dofs(), space.n_dofs(), trip);
}

SparseOperator vector_block(const SparseOperator& scalar)
{
  const Index n = static_cast<Index>(scalar.rows());
  const Index m = static_cast<Index>(scalar.cols());
  std::vector<Triplet> trip;
  trip.reserve(2 * static_cast<std::size_t>(scalar.nonZeros()));
  for (int c = 0; c < 2; ++c)
    for (Index i = 0; i < n; ++i)
      for (SparseOperator::InnerIterator it(scalar, i); it; ++it)
        trip.emplace_back(c * n + i, c * m + static_cast<Index>(it.col()), it.value());
  return from_triplets(2 * n, 2 * m, trip);
}

SparseOperator assemble_divergence(const TaylorHoodSpace& th)
{
  const ScalarSpace& vs = th.velocity;
  const ScalarSpace& ps = th.pressure;
  const Index n = vs.n_dofs();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(th.mesh->n_triangles()) * 3 * 12);
  CellValues cu, cp;
  for (Index t = 0; t < th.mesh->n_triangles(); ++t) {
    cu.reinit(vs, t);
    cp.reinit(ps, t);
    const auto udofs = vs.cell_dofs(t);
    const auto pdofs = ps.cell_dofs(t);
    for (int i = 0; i < cp.n; ++i)
      for (int j = 0; j < cu.n; ++j)
        for (int c = 0; c < 2; ++c) {
          double v = 0.0;
          for (int q = 0; q < cu.nq; ++q)
            v += cu.jxw[q] * cp.phi[q][i] * cu.grad[q][j][c];
          trip.emplace_back(pdofs[i], c * n + udofs[j], v);
        }
  }
  return from_triplets(ps.n_dofs(), 2 * n, trip);
}

double apply_bstar(const ScalarSpace& velocity, const FieldVector& u, const FieldVector& v,
                   const FieldVector& w)
{
  require_velocity(velocity, u, "apply_bstar");
  require_velocity(velocity, v, "apply_bstar");
  require_velocity(velocity, w, "apply_bstar");
  const Index n = velocity.n_dofs();
  double sum = 0.0;
  CellValues cv;
  for (Index t = 0; t < velocity.mesh().n_triangles(); ++t) {
    cv.reinit(velocity, t);
    const auto dofs = velocity.cell_dofs(t);
    for (int q = 0; q < cv.nq; ++q) {
      const Vec2 uq = velocity_at(cv, dofs, n, u, q);
      const Vec2 vq = velocity_at(cv, dofs, n, v, q);
      const Vec2 wq = velocity_at(cv, dofs, n, w, q);
      const Mat2 gv = gradient_at(cv, dofs, n, v, q);
      const Mat2 gw = gradient_at(cv, dofs, n, w, q);
      // (u . grad v)_c = sum_d u_d dv_c/dx_d
      sum += cv.jxw[q] * 0.5 * ((gv * uq).dot(wq) - (gw * uq).dot(vq));
    }
  }
  return sum;
}

SparseOperator assemble_convection_scalar(const ScalarSpace& velocity, const FieldVector& w)
{
  require_velocity(velocity, w, "assemble_convection");
  const Index n = velocity.n_dofs();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(velocity.mesh().n_triangles()) * 36);
  CellValues cv;
  std::array<double, 6> adv{};
  for (Index t = 0; t < velocity.mesh().n_triangles(); ++t) {
    cv.reinit(velocity, t);
    const auto dofs = velocity.cell_dofs(t);
    std::array<std::array<double, 6>, 6> local{};
    for (int q = 0; q < cv.nq; ++q) {
      const Vec2 wq = velocity_at(cv, dofs, n, w, q);
      for (int j = 0; j < cv.n; ++j)
        adv[j] = wq.dot(cv.grad[q][j]);
      const double s = 0.5 * cv.jxw[q];
      for (int i = 0; i < cv.n; ++i)
        for (int j = 0; j < cv.n; ++j)
          local[i][j] += s * (adv[j] * cv.phi[q][i] - adv[i] * cv.phi[q][j]);
    }
    // Entries are pushed even when zero so the sparsity pattern never changes.
    for (int i = 0; i < cv.n; ++i)
      for (int j = 0; j < cv.n; ++j)
        trip.emplace_back(dofs[i], dofs[j], local[i][j]);
  }
  return from_triplets(n, n, trip);
}

SparseOperator assemble_convection_linearized(const ScalarSpace& velocity, const FieldVector& w)
{
  return vector_block(assemble_convection_scalar(velocity, w));
}

FieldVector assemble_load(const ScalarSpace& space, const ScalarFunction& f)
{
  FieldVector b = FieldVector::Zero(space.n_dofs());
  CellValues cv;
  for (Index t = 0; t < space.mesh().n_triangles(); ++t) {
    cv.reinit(space, t);
    const auto dofs = space.cell_dofs(t);
    for (int q = 0; q < cv.nq; ++q) {
      const double fq = f(cv.x[q]) * cv.jxw[q];
      for (int i = 0; i < cv.n; ++i)
        b[dofs[i]] += fq * cv.phi[q][i];
    }
  }
  return b;
}

FieldVector assemble_load(const ScalarSpace& velocity, const TimeVectorFunction& f, double t_eval)
{
  const Index n = velocity.n_dofs();
  FieldVector b = FieldVector::Zero(2 * n);
  CellValues cv;
  for (Index t = 0; t < velocity.mesh().n_triangles(); ++t) {
    cv.reinit(velocity, t);
    const auto dofs = velocity.cell_dofs(t);
    for (int q = 0; q < cv.nq; ++q) {
      const Vec2 fq = f(cv.x[q], t_eval) * cv.jxw[q];
      for (int i = 0; i < cv.n; ++i) {
        b[dofs[i]] += fq.x() * cv.phi[q][i];
        b[n + dofs[i]] += fq.y() * cv.phi[q][i];
      }
    }
  }
  return b;
}

FieldVector assemble_gradient_load(const ScalarSpace& velocity, const TensorFunction& grad)
{
  const Index n = velocity.n_dofs();
  FieldVector b = FieldVector::Zero(2 * n);
  CellValues cv;
  for (Index t = 0; t < velocity.mesh().n_triangles(); ++t) {
    cv.reinit(velocity, t);
    const auto dofs = velocity.cell_dofs(t);
    for (int q = 0; q < cv.nq; ++q) {
      const Mat2 g = grad(cv.x[q]) * cv.jxw[q];
      for (int i = 0; i < cv.n; ++i) {
        b[dofs[i]] += g.row(0).dot(cv.grad[q][i]);
        b[n + dofs[i]] += g.row(1).dot(cv.grad[q][i]);
      }
    }
  }
  return b;
}

FieldVector assemble_pressure_load(const ScalarSpace& velocity, const ScalarFunction& p)
{
  const Index n = velocity.n_dofs();
  FieldVector b = FieldVector::Zero(2 * n);
  CellValues cv;
  for (Index t = 0; t < velocity.mesh().n_triangles(); ++t) {
    cv.reinit(velocity, t);
    const auto dofs = velocity.cell_dofs(t);
    for (int q = 0; q < cv.nq; ++q) {
      const double pq = p(cv.x[q]) * cv.jxw[q];
      for (int i = 0; i < cv.n; ++i) {
        b[dofs[i]] += pq * cv.grad[q][i].x();
        b[n + dofs[i]] += pq * cv.grad[q][i].y();
      }
    }
  }
  return b;
}

FieldVector assemble_divergence_load(const ScalarSpace& pressure, const TensorFunction& grad)
{
  return assemble_load(pressure, [&grad](const Point& p) { return grad(p).trace(); });
}

FieldVector assemble_mean_vector(const ScalarSpace& pressure)
{
  return assemble_load(pressure, [](const Point&) { return 1.0; });
}

SparseOperator assemble_gradient_coupling(const ScalarSpace& rows, const ScalarSpace& cols, int d)
{
  if (&rows.mesh() != &cols.mesh())
    throw std::invalid_argument("assemble_gradient_coupling: spaces on different meshes");
  if (d != 0 && d != 1)
    throw std::invalid_argument("assemble_gradient_coupling: direction must be 0 or 1");
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(rows.mesh().n_triangles()) * rows.dofs_per_cell() *
               cols.dofs_per_cell());
  CellValues cr, cc;
  for (Index t = 0; t < rows.mesh().n_triangles(); ++t) {
    cr.reinit(rows, t);
    cc.reinit(cols, t);
    const auto rdofs = rows.cell_dofs(t);
    const auto cdofs = cols.cell_dofs(t);
    for (int i = 0; i < cr.n; ++i)
      for (int j = 0; j < cc.n; ++j) {
        double v = 0.0;
        for (int q = 0; q < cr.nq; ++q)
          v += cr.jxw[q] * cr.phi[q][i] * cc.grad[q][j][d];
        trip.emplace_back(rdofs[i], cdofs[j], v);
      }
  }
  return from_triplets(rows.n_dofs(), cols.n_dofs(), trip);
}

P1GradientProjection::P1GradientProjection(const ScalarSpace& velocity, const ScalarSpace& lspace,
                                           double tol)
    : n_velocity_(velocity.n_dofs()),
      coupling_{assemble_gradient_coupling(lspace, velocity, 0),
                assemble_gradient_coupling(lspace, velocity, 1)},
      solver_(assemble_mass(lspace)), tol_(tol)
{
  if (lspace.degree() != 1)
    throw std::invalid_argument("P1GradientProjection: large-scale space must be P1");
}

FieldVector P1GradientProjection::projection_rhs(const FieldVector& u, int c, int d) const
{
  return coupling_[d] * u.segment(c * n_velocity_, n_velocity_);
}

CoarseGradient P1GradientProjection::project(const FieldVector& u) const
{
  if (u.size() != 2 * n_velocity_)
    throw std::invalid_argument("project_gradient_coarse: velocity vector has wrong length");
  CoarseGradient g;
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d)
      g(c, d) = solver_.solve(projection_rhs(u, c, d), tol_);
  return g;
}

FieldVector P1GradientProjection::dissipation_load(const CoarseGradient& g) const
{
  FieldVector b(2 * n_velocity_);
  for (int c = 0; c < 2; ++c)
    b.segment(c * n_velocity_, n_velocity_) =
        coupling_[0].transpose() * g(c, 0) + coupling_[1].transpose() * g(c, 1);
  return b;
}

CoarseGradient project_gradient_coarse(const FieldVector& u, const ScalarSpace& velocity,
                                       const ScalarSpace& lspace)
{
  return P1GradientProjection(velocity, lspace).project(u);
}

} // namespace ddc
