#include "ddc/vtk.hpp"

#include "ddc/io.hpp"

#include <ostream>
#include <stdexcept>

namespace ddc {

namespace {

void write_vectors(std::ostream& os, const char* name, const FieldVector& u, Index n_scalar,
                   Index n_nodes)
{
  os << "VECTORS " << name << " double\n";
  for (Index i = 0; i < n_nodes; ++i)
    os << format_double(u[i]) << ' ' << format_double(u[n_scalar + i]) << " 0\n";
}

} // namespace

void write_vtk_snapshot(std::ostream& os, const TaylorHoodSpace& th, const FieldVector& velocity,
                        const FieldVector& pressure, const FieldVector* velocity_first,
                        const std::string& title)
{
  const Mesh& mesh = *th.mesh;
  const Index n = th.velocity.n_dofs();
  if (velocity.size() != 2 * n || pressure.size() != th.pressure.n_dofs() ||
      (velocity_first && velocity_first->size() != 2 * n))
    throw std::invalid_argument("write_vtk_snapshot: field sizes do not match the space");

  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_nodes() << " double\n";
  for (const Point& p : mesh.nodes())
    os << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
  os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const Triangle& t : mesh.triangles())
    os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  os << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (Index t = 0; t < mesh.n_triangles(); ++t)
    os << "5\n";

  os << "POINT_DATA " << mesh.n_nodes() << '\n';
  write_vectors(os, "velocity", velocity, n, mesh.n_nodes());
  if (velocity_first)
    write_vectors(os, "velocity_first", *velocity_first, n, mesh.n_nodes());
  os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (Index i = 0; i < mesh.n_nodes(); ++i)
    os << format_double(pressure[i]) << '\n';
}

} // namespace ddc
