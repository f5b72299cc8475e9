// ============================================================================
// ddc/vtk.hpp - legacy ASCII VTK snapshots of velocity/pressure fields
// ============================================================================
#pragma once

#include "ddc/spaces.hpp"

#include <iosfwd>
#include <string>

namespace ddc {

/// Writes the mesh vertices and triangles with POINT_DATA: the velocity
/// (vertex values of the P2 field) as VECTORS and the P1 pressure as SCALARS.
/// An optional second velocity (the predictor) is written as "velocity_first".
void write_vtk_snapshot(std::ostream& os, const TaylorHoodSpace& th, const FieldVector& velocity,
                        const FieldVector& pressure, const FieldVector* velocity_first = nullptr,
                        const std::string& title = "ddc snapshot");

} // namespace ddc
