#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mhd/mesh.hpp"

using namespace mhd;

namespace {

std::string single_tet_msh(const std::string& element_lines, int count) {
  std::ostringstream s;
  s << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n"
    << "$Elements\n" << count << "\n" << element_lines << "$EndElements\n";
  return s.str();
}

Mesh parse(const std::string& text) {
  std::istringstream in(text);
  return read_gmsh_msh2(in);
}

/// Sub-simplex enumeration straight from the cells.
void brute_counts(const Mesh& m, int& edges, int& faces) {
  std::set<std::array<int, 2>> e;
  std::set<std::array<int, 3>> f;
  for (auto c : m.cells) {
    std::sort(c.begin(), c.end());
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        e.insert({c[i], c[j]});
        for (int k = j + 1; k < 4; ++k) f.insert({c[i], c[j], c[k]});
      }
  }
  edges = static_cast<int>(e.size());
  faces = static_cast<int>(f.size());
}

}  // namespace

TEST(UnitCube, CountsForOneCube) {
  const Mesh m = unit_cube_mesh(1);
  EXPECT_EQ(m.num_vertices(), 8);
  EXPECT_EQ(m.num_cells(), 6);
  const MeshTopology t = build_topology(m);
  EXPECT_EQ(t.num_edges(), 19);
  EXPECT_EQ(t.num_faces(), 18);
}

TEST(UnitCube, CountsForTwoCubes) {
  const Mesh m = unit_cube_mesh(2);
  EXPECT_EQ(m.num_vertices(), 27);
  EXPECT_EQ(m.num_cells(), 48);
}

TEST(UnitCube, EulerAndBruteForceCounts) {
  for (int n : {1, 2, 3, 4}) {
    const Mesh m = unit_cube_mesh(n);
    const MeshTopology t = build_topology(m);
    int e = 0, f = 0;
    brute_counts(m, e, f);
    EXPECT_EQ(t.num_edges(), e);
    EXPECT_EQ(t.num_faces(), f);
    EXPECT_EQ(m.num_vertices() - e + f - m.num_cells(), 1) << "n=" << n;
  }
}

TEST(UnitCube, PositiveVolumesSumToOne) {
  const Mesh m = unit_cube_mesh(3);
  double total = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    EXPECT_GT(m.signed_volume(c), 0.0);
    total += m.volume(c);
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(UnitCube, RejectsNonPositiveSize) { EXPECT_THROW(unit_cube_mesh(0), MeshError); }

TEST(Topology, AscendingOrientation) {
  const MeshTopology t = build_topology(unit_cube_mesh(2));
  for (const auto& e : t.edges) EXPECT_LT(e[0], e[1]);
  for (const auto& f : t.faces) {
    EXPECT_LT(f[0], f[1]);
    EXPECT_LT(f[1], f[2]);
  }
}

TEST(Topology, BoundaryFlags) {
  const MeshTopology t1 = build_topology(unit_cube_mesh(1));
  int bf = 0;
  for (char b : t1.boundary_face) bf += b;
  EXPECT_EQ(bf, 12);
  for (char b : t1.boundary_vertex) EXPECT_TRUE(b);

  const Mesh m2 = unit_cube_mesh(2);
  const MeshTopology t2 = build_topology(m2);
  int interior = 0;
  for (int v = 0; v < t2.num_vertices(); ++v)
    if (!t2.boundary_vertex[v]) {
      ++interior;
      EXPECT_NEAR(m2.vertices[v].x, 0.5, 1e-15);
      EXPECT_NEAR(m2.vertices[v].y, 0.5, 1e-15);
      EXPECT_NEAR(m2.vertices[v].z, 0.5, 1e-15);
    }
  EXPECT_EQ(interior, 1);
  bf = 0;
  for (char b : t2.boundary_face) bf += b;
  EXPECT_EQ(bf, 48);
}

TEST(Topology, SingleTet) {
  const MeshTopology t = build_topology(reference_tet_mesh());
  EXPECT_EQ(t.num_edges(), 6);
  EXPECT_EQ(t.num_faces(), 4);
  for (char b : t.boundary_face) EXPECT_TRUE(b);
  for (char b : t.boundary_edge) EXPECT_TRUE(b);
}

TEST(Topology, InteriorFacesHaveOppositeOutwardSigns) {
  const MeshTopology t = build_topology(unit_cube_mesh(2));
  std::vector<int> sum(t.num_faces(), 0);
  for (int c = 0; c < t.num_cells(); ++c)
    for (int k = 0; k < 4; ++k) sum[t.cell_faces[c][k]] += t.cell_face_outward[c][k];
  for (int f = 0; f < t.num_faces(); ++f) {
    if (t.boundary_face[f])
      EXPECT_EQ(std::abs(sum[f]), 1);
    else
      EXPECT_EQ(sum[f], 0);
  }
}

TEST(Topology, NonManifoldFaceRejected) {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}, {1, 1, 1}};
  m.cells = {{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 2, 5}};
  m.regions = {0, 0, 0};
  canonicalize(m);
  EXPECT_THROW(build_topology(m), TopologyError);
}

TEST(Metrics, Diameters) {
  EXPECT_NEAR(mesh_metrics(unit_cube_mesh(1)).h_max, std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(mesh_metrics(unit_cube_mesh(2)).h_max, std::sqrt(3.0) / 2, 1e-14);
  EXPECT_NEAR(mesh_metrics(reference_tet_mesh()).h_max, std::sqrt(2.0), 1e-14);
  for (int n : {1, 2, 4})
    EXPECT_NEAR(mesh_metrics(unit_cube_mesh(2 * n)).h_max, 0.5 * mesh_metrics(unit_cube_mesh(n)).h_max, 1e-14);
}

TEST(Gmsh, SingleTet) {
  const Mesh m = parse(single_tet_msh("1 4 2 7 1 1 2 3 4\n", 1));
  EXPECT_EQ(m.num_vertices(), 4);
  EXPECT_EQ(m.num_cells(), 1);
  EXPECT_NEAR(m.volume(0), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(m.regions[0], 7);
}

TEST(Gmsh, FileOnDisk) {
  const Mesh m = read_gmsh_msh2_file(std::string(MHD_TEST_DATA_DIR) + "/single_tet.msh");
  EXPECT_EQ(m.num_cells(), 1);
  EXPECT_THROW(read_gmsh_msh2_file("/nonexistent/file.msh"), MeshError);
  const Mesh cube = read_gmsh_msh2_file(std::string(MHD_TEST_DATA_DIR) + "/cube2.msh");
  const MeshTopology t = build_topology(cube);
  const MeshTopology ref = build_topology(unit_cube_mesh(2));
  EXPECT_EQ(cube.num_cells(), 48);
  EXPECT_EQ(t.num_edges(), ref.num_edges());
  EXPECT_EQ(t.num_faces(), ref.num_faces());
}

TEST(Gmsh, NegativeOrientationRepaired) {
  const Mesh m = parse(single_tet_msh("1 4 2 7 1 2 1 3 4\n", 1));
  EXPECT_GT(m.signed_volume(0), 0.0);
}

TEST(Gmsh, TrianglesSkipped) {
  const Mesh m = parse(single_tet_msh("1 2 2 1 1 1 2 3\n2 4 2 7 1 1 2 3 4\n3 2 2 1 1 1 2 4\n", 3));
  EXPECT_EQ(m.num_cells(), 1);
}

TEST(Gmsh, ErrorsNameTheLine) {
  try {
    parse(single_tet_msh("1 4 2 7 1 1 2 3 9\n", 1));
    FAIL() << "unknown node accepted";
  } catch (const MeshParseError& e) {
    EXPECT_EQ(e.line(), 13);
  }
  EXPECT_THROW(parse("$MeshFormat\nbogus\n$EndMeshFormat\n"), MeshParseError);
  EXPECT_THROW(parse(single_tet_msh("1 2 2 1 1 1 2 3\n", 1)), MeshParseError);
  EXPECT_THROW(parse("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n1 0 0 0\n3 1 0 0\n$EndNodes\n"), MeshParseError);
}

TEST(Canonicalize, RejectsDegenerateCell) {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}};
  m.cells = {{0, 1, 2, 3}};
  m.regions = {0};
  EXPECT_THROW(canonicalize(m), MeshError);
}
