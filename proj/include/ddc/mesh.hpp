// ============================================================================
// ddc/mesh.hpp - conforming triangulations with tagged boundary facets
//
// Meshes are immutable after construction. The constructor validates
// orientation, conformity and the boundary facet records, and builds the
// unique edge list used by P2 dof numbering and uniform refinement.
// ============================================================================
#pragma once

#include "ddc/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace ddc {

enum class BoundaryTag : std::uint8_t { Inflow, Outflow, Wall, Exact };

std::string_view to_string(BoundaryTag tag);

struct Triangle {
  std::array<Index, 3> v; // counterclockwise
};

struct BoundaryFacet {
  std::array<Index, 2> v;
  BoundaryTag tag;
};

class Mesh {
public:
  Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
       std::vector<BoundaryFacet> facets);

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryFacet>& facets() const { return facets_; }

  Index n_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index n_triangles() const { return static_cast<Index>(triangles_.size()); }
  Index n_edges() const { return static_cast<Index>(edges_.size()); }

  /// Unique edges, endpoints sorted ascending. Numbered in order of first
  /// appearance when walking triangles and their local edges (01, 12, 20).
  const std::vector<std::array<Index, 2>>& edges() const { return edges_; }
  /// Local edge e of triangle t joins local vertices (e, (e+1)%3).
  Index triangle_edge(Index t, int e) const { return triangle_edges_[t][e]; }
  /// Edge id joining a and b, or -1.
  Index find_edge(Index a, Index b) const;
  /// Number of triangles sharing each edge (1 on the boundary, 2 inside).
  const std::vector<std::uint8_t>& edge_valence() const { return edge_valence_; }

  double signed_area(Index t) const;
  double total_area() const;

  /// Shortest and longest edge length over the mesh.
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }

private:
  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryFacet> facets_;
  std::vector<std::array<Index, 2>> edges_;
  std::vector<std::array<Index, 3>> triangle_edges_;
  std::vector<std::uint8_t> edge_valence_;
  std::vector<std::vector<std::pair<Index, Index>>> node_edges_; // (other node, edge id)
  double h_min_ = 0.0;
  double h_max_ = 0.0;
};

/// Structured nx-by-ny grid on [x0,x1]x[y0,y1]; every cell is split along its
/// bottom-left to top-right diagonal. All boundary facets are tagged Exact.
Mesh build_rectangle_mesh(double x0, double y0, double x1, double y1, int nx, int ny);

/// Channel [0,40]x[0,10] with the square [5,6]x[0,1] removed, meshed as a
/// structured grid of spacing h (1/h must be an integer). Facets on x=0 are
/// Inflow, on x=40 Outflow, everything else Wall.
Mesh build_step_channel_mesh(double h);

/// Red refinement: every triangle is split into four through its edge
/// midpoints. Parent nodes keep their ids; midpoint of edge e gets id
/// n_nodes + e. Facets are split in two and keep their tag.
Mesh uniform_refine(const Mesh& mesh);

/// Legacy ASCII VTK (version 3.0) unstructured grid of the triangles.
void write_vtk(const Mesh& mesh, std::ostream& os);

} // namespace ddc
