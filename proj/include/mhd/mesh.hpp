#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhd/geometry.hpp"

namespace mhd {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the Gmsh reader; carries the 1-based line number of the offending input.
class MeshParseError : public MeshError {
 public:
  MeshParseError(int line, const std::string& what)
      : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class TopologyError : public MeshError {
 public:
  using MeshError::MeshError;
};

/// Local vertex pairs of the six tetrahedron edges, and the faces opposite each vertex.
inline constexpr std::array<std::array<int, 2>, 6> kLocalEdges{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 3>, 4> kLocalFaces{{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

/// Conforming tetrahedral mesh. Every cell is stored with positive signed volume.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<int> regions;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }

  /// Signed volume of cell `c` as stored.
  double signed_volume(int c) const;
  double volume(int c) const { return std::abs(signed_volume(c)); }
  std::array<Vec3, 4> cell_vertices(int c) const;
};

/// Reorders vertices of negatively oriented cells and validates indices, degeneracy and duplicates.
/// Throws MeshError on invalid input.
void canonicalize(Mesh& mesh);

/// Structured mesh of (0,1)^3: n^3 cubes, each split into 6 Kuhn tetrahedra sharing the main diagonal.
Mesh unit_cube_mesh(int n);

/// Single reference tetrahedron (0,0,0), (1,0,0), (0,1,0), (0,0,1).
Mesh reference_tet_mesh();

/// Gmsh MSH 2.2 ASCII. Only 4-node tetrahedra (type 4) are kept; the first tag is the region.
Mesh read_gmsh_msh2(std::istream& in);
Mesh read_gmsh_msh2_file(const std::string& path);

/// Oriented edge/face topology. Edge and face vertex tuples are ascending in global index and
/// sorted lexicographically; that ascending order is the intrinsic orientation of each entity.
struct MeshTopology {
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> faces;

  std::vector<std::array<int, 6>> cell_edges;
  /// +1 when local edge (kLocalEdges) runs in ascending global order.
  std::vector<std::array<std::int8_t, 6>> cell_edge_signs;

  std::vector<std::array<int, 4>> cell_faces;
  /// Parity of the local ascending face tuple (kLocalFaces) against the global one.
  std::vector<std::array<std::int8_t, 4>> cell_face_signs;
  /// +1 when the global face normal points out of the cell (the div incidence).
  std::vector<std::array<std::int8_t, 4>> cell_face_outward;

  /// Boundary edges of each face as (a,b), (b,c), (a,c) with circulation signs +1, +1, -1.
  std::vector<std::array<int, 3>> face_edges;
  std::vector<std::array<std::int8_t, 3>> face_edge_signs;
  /// Adjacent cells; second entry is -1 on the boundary.
  std::vector<std::array<int, 2>> face_cells;

  std::vector<char> boundary_vertex;
  std::vector<char> boundary_edge;
  std::vector<char> boundary_face;

  int num_vertices() const { return static_cast<int>(boundary_vertex.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_cells() const { return static_cast<int>(cell_edges.size()); }

  int edge_index(int a, int b) const;
  int face_index(int a, int b, int c) const;
};

MeshTopology build_topology(const Mesh& mesh);

struct MeshMetrics {
  double h_max = 0.0;
  double h_min = 0.0;
  /// Largest ratio of cell diameter to inradius.
  double shape_ratio = 0.0;
};

MeshMetrics mesh_metrics(const Mesh& mesh);

}  // namespace mhd
