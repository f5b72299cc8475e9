// ============================================================================
// src/mesh.cpp - triangulation construction, validation and refinement
// ============================================================================
#include "ddc/mesh.hpp"

#include "ddc/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ddc {

std::string_view to_string(BoundaryTag tag)
{
  switch (tag) {
  case BoundaryTag::Inflow: return "inflow";
  case BoundaryTag::Outflow: return "outflow";
  case BoundaryTag::Wall: return "wall";
  case BoundaryTag::Exact: return "exact";
  }
  return "unknown";
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
           std::vector<BoundaryFacet> facets)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), facets_(std::move(facets))
{
  const Index nn = n_nodes();
  if (nn < 3 || triangles_.empty())
    throw std::invalid_argument("Mesh: need at least 3 nodes and one triangle");
  for (const Point& p : nodes_)
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw std::invalid_argument("Mesh: non-finite node coordinate");

  node_edges_.assign(nn, {});
  triangle_edges_.resize(triangles_.size());
  h_min_ = std::numeric_limits<double>::infinity();
  h_max_ = 0.0;

  for (Index t = 0; t < n_triangles(); ++t) {
    const auto& v = triangles_[t].v;
    for (Index a : v)
      if (a < 0 || a >= nn)
        throw std::invalid_argument("Mesh: triangle " + std::to_string(t) + " has invalid vertex");
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw std::invalid_argument("Mesh: triangle " + std::to_string(t) + " has duplicate vertices");
    if (!(signed_area(t) > 0.0))
      throw std::invalid_argument("Mesh: triangle " + std::to_string(t) + " is not counterclockwise");

    for (int e = 0; e < 3; ++e) {
      const Index a = v[e];
      const Index b = v[(e + 1) % 3];
      Index id = find_edge(a, b);
      if (id < 0) {
        id = n_edges();
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_valence_.push_back(0);
        node_edges_[a].emplace_back(b, id);
        node_edges_[b].emplace_back(a, id);
        const double len = (nodes_[a] - nodes_[b]).norm();
        h_min_ = std::min(h_min_, len);
        h_max_ = std::max(h_max_, len);
      }
      if (++edge_valence_[id] > 2)
        throw std::invalid_argument("Mesh: edge shared by more than two triangles");
      triangle_edges_[t][e] = id;
    }
  }

  // Every boundary edge carries exactly one facet record, and facets sit on
  // boundary edges only.
  std::vector<std::uint8_t> facet_count(edges_.size(), 0);
  for (const BoundaryFacet& f : facets_) {
    const Index id = find_edge(f.v[0], f.v[1]);
    if (id < 0 || edge_valence_[id] != 1)
      throw std::invalid_argument("Mesh: facet does not lie on a boundary edge");
    if (++facet_count[id] > 1)
      throw std::invalid_argument("Mesh: duplicate facet record");
  }
  std::vector<int> boundary_degree(nn, 0);
  for (Index e = 0; e < n_edges(); ++e) {
    if (edge_valence_[e] == 1) {
      if (facet_count[e] != 1)
        throw std::invalid_argument("Mesh: boundary edge without facet record");
      ++boundary_degree[edges_[e][0]];
      ++boundary_degree[edges_[e][1]];
    }
  }
  for (int d : boundary_degree)
    if (d % 2 != 0)
      throw std::invalid_argument("Mesh: boundary is not a closed loop");
}

Index Mesh::find_edge(Index a, Index b) const
{
  if (a < 0 || a >= n_nodes())
    return -1;
  for (const auto& [other, id] : node_edges_[a])
    if (other == b)
      return id;
  return -1;
}

double Mesh::signed_area(Index t) const
{
  const auto& v = triangles_[t].v;
  const Point& p0 = nodes_[v[0]];
  const Point& p1 = nodes_[v[1]];
  const Point& p2 = nodes_[v[2]];
  return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y()));
}

double Mesh::total_area() const
{
  double sum = 0.0;
  for (Index t = 0; t < n_triangles(); ++t)
    sum += signed_area(t);
  return sum;
}

namespace {

// Boundary facets of a triangle soup: every edge with valence one, in order of
// first appearance, oriented as in its triangle and tagged by the classifier.
std::vector<BoundaryFacet> tag_boundary_edges(const std::vector<Point>& nodes,
                                              const std::vector<Triangle>& tris,
                                              BoundaryTag (*classify)(const Point&))
{
  std::vector<std::array<Index, 3>> half; // (lo, hi, orientation a)
  half.reserve(tris.size() * 3);
  for (const Triangle& tri : tris)
    for (int e = 0; e < 3; ++e) {
      const Index a = tri.v[e];
      const Index b = tri.v[(e + 1) % 3];
      half.push_back({std::min(a, b), std::max(a, b), a});
    }
  std::vector<std::size_t> order(half.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return half[i][0] != half[j][0] ? half[i][0] < half[j][0] : half[i][1] < half[j][1];
  });

  std::vector<std::size_t> boundary; // indices into half, in first-appearance order
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && half[order[j]][0] == half[order[i]][0] &&
           half[order[j]][1] == half[order[i]][1])
      ++j;
    if (j - i == 1)
      boundary.push_back(order[i]);
    i = j;
  }
  std::sort(boundary.begin(), boundary.end());

  std::vector<BoundaryFacet> facets;
  facets.reserve(boundary.size());
  for (std::size_t i : boundary) {
    const Index a = half[i][2];
    const Index b = a == half[i][0] ? half[i][1] : half[i][0];
    const Point mid = 0.5 * (nodes[a] + nodes[b]);
    facets.push_back({{a, b}, classify(mid)});
  }
  return facets;
}

} // namespace

Mesh build_rectangle_mesh(double x0, double y0, double x1, double y1, int nx, int ny)
{
  if (!(x1 > x0) || !(y1 > y0))
    throw std::invalid_argument("build_rectangle_mesh: non-positive extent");
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rectangle_mesh: cell counts must be >= 1");

  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      nodes.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Index v00 = vid(i, j), v10 = vid(i + 1, j);
      const Index v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      tris.push_back({{v00, v10, v11}});
      tris.push_back({{v00, v11, v01}});
    }

  auto facets = tag_boundary_edges(nodes, tris, [](const Point&) { return BoundaryTag::Exact; });
  return Mesh(std::move(nodes), std::move(tris), std::move(facets));
}

Mesh build_step_channel_mesh(double h)
{
  constexpr double length = 40.0, height = 10.0;
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("build_step_channel_mesh: h must be positive");
  const double inv = 1.0 / h;
  const long per_unit = std::lround(inv);
  if (per_unit < 1 || std::abs(inv - static_cast<double>(per_unit)) > 1e-9 * inv)
    throw std::invalid_argument("build_step_channel_mesh: h must divide the unit step side");

  const int nx = static_cast<int>(per_unit * 40);
  const int ny = static_cast<int>(per_unit * 10);
  const int sx0 = static_cast<int>(per_unit * 5), sx1 = static_cast<int>(per_unit * 6);
  const int sy1 = static_cast<int>(per_unit);
  auto in_step = [&](int i, int j) { return i >= sx0 && i < sx1 && j < sy1; };

  // Grid nodes first, then compress to those touched by a kept cell.
  std::vector<Index> grid_to_node(static_cast<std::size_t>(nx + 1) * (ny + 1), -1);
  auto gid = [nx](int i, int j) { return static_cast<std::size_t>(j) * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (!in_step(i, j))
        for (int dj = 0; dj <= 1; ++dj)
          for (int di = 0; di <= 1; ++di)
            grid_to_node[gid(i + di, j + dj)] = 0;

  std::vector<Point> nodes;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      if (grid_to_node[gid(i, j)] == 0) {
        grid_to_node[gid(i, j)] = static_cast<Index>(nodes.size());
        nodes.emplace_back(length * i / nx, height * j / ny);
      }

  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (in_step(i, j))
        continue;
      const Index v00 = grid_to_node[gid(i, j)], v10 = grid_to_node[gid(i + 1, j)];
      const Index v01 = grid_to_node[gid(i, j + 1)], v11 = grid_to_node[gid(i + 1, j + 1)];
      tris.push_back({{v00, v10, v11}});
      tris.push_back({{v00, v11, v01}});
    }

  auto classify = [](const Point& mid) {
    if (mid.x() == 0.0)
      return BoundaryTag::Inflow;
    if (mid.x() == 40.0)
      return BoundaryTag::Outflow;
    return BoundaryTag::Wall;
  };
  auto facets = tag_boundary_edges(nodes, tris, classify);
  return Mesh(std::move(nodes), std::move(tris), std::move(facets));
}

Mesh uniform_refine(const Mesh& mesh)
{
  const Index nn = mesh.n_nodes();
  std::vector<Point> nodes = mesh.nodes();
  nodes.reserve(static_cast<std::size_t>(nn + mesh.n_edges()));
  for (const auto& e : mesh.edges())
    nodes.push_back(0.5 * (mesh.nodes()[e[0]] + mesh.nodes()[e[1]]));

  std::vector<Triangle> tris;
  tris.reserve(4 * static_cast<std::size_t>(mesh.n_triangles()));
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const auto& v = mesh.triangles()[t].v;
    const Index m01 = nn + mesh.triangle_edge(t, 0);
    const Index m12 = nn + mesh.triangle_edge(t, 1);
    const Index m20 = nn + mesh.triangle_edge(t, 2);
    tris.push_back({{v[0], m01, m20}});
    tris.push_back({{m01, v[1], m12}});
    tris.push_back({{m20, m12, v[2]}});
    tris.push_back({{m01, m12, m20}});
  }

  std::vector<BoundaryFacet> facets;
  facets.reserve(2 * mesh.facets().size());
  for (const BoundaryFacet& f : mesh.facets()) {
    const Index mid = nn + mesh.find_edge(f.v[0], f.v[1]);
    facets.push_back({{f.v[0], mid}, f.tag});
    facets.push_back({{mid, f.v[1]}, f.tag});
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(facets));
}

void write_vtk(const Mesh& mesh, std::ostream& os)
{
  os << "# vtk DataFile Version 3.0\n"
     << "ddc mesh\n"
     << "ASCII\n"
     << "DATASET UNSTRUCTURED_GRID\n"
     << "POINTS " << mesh.n_nodes() << " double\n";
  for (const Point& p : mesh.nodes())
    os << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
  os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const Triangle& t : mesh.triangles())
    os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  os << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (Index t = 0; t < mesh.n_triangles(); ++t)
    os << "5\n";
}

} // namespace ddc
