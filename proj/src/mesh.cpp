#include "mhd/mesh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace mhd {

namespace {

int parity_of_three(std::array<int, 3> v) {
  int swaps = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2 - i; ++j) {
      if (v[j] > v[j + 1]) {
        std::swap(v[j], v[j + 1]);
        ++swaps;
      }
    }
  }
  return swaps % 2 == 0 ? 1 : -1;
}

template <std::size_t N>
int find_sorted(const std::vector<std::array<int, N>>& list, const std::array<int, N>& key) {
  auto it = std::lower_bound(list.begin(), list.end(), key);
  if (it == list.end() || *it != key) {
    return -1;
  }
  return static_cast<int>(it - list.begin());
}

}  // namespace

double Mesh::signed_volume(int c) const {
  const auto& t = cells[c];
  const Vec3& p0 = vertices[t[0]];
  return triple(vertices[t[1]] - p0, vertices[t[2]] - p0, vertices[t[3]] - p0) / 6.0;
}

std::array<Vec3, 4> Mesh::cell_vertices(int c) const {
  const auto& t = cells[c];
  return {vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]};
}

void canonicalize(Mesh& mesh) {
  const int nv = mesh.num_vertices();
  if (mesh.regions.size() != mesh.cells.size()) {
    mesh.regions.resize(mesh.cells.size(), 0);
  }
  std::vector<std::array<int, 4>> sorted;
  sorted.reserve(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    auto& t = mesh.cells[c];
    for (int v : t) {
      if (v < 0 || v >= nv) {
        throw MeshError("cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                        " out of range");
      }
    }
    const double vol = mesh.signed_volume(c);
    if (vol == 0.0) {
      throw MeshError("cell " + std::to_string(c) + " is degenerate");
    }
    if (vol < 0.0) {
      std::swap(t[2], t[3]);
    }
    auto key = t;
    std::sort(key.begin(), key.end());
    sorted.push_back(key);
  }
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw MeshError("duplicate cell");
  }
}

Mesh unit_cube_mesh(int n) {
  if (n < 1) {
    throw MeshError("unit_cube_mesh: n must be positive");
  }
  Mesh mesh;
  const int m = n + 1;
  auto vid = [m](int i, int j, int k) { return i + m * (j + m * k); };
  mesh.vertices.reserve(static_cast<std::size_t>(m) * m * m);
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n,
                                 static_cast<double>(k) / n});
      }
    }
  }
  // Each permutation of the axes gives one monotone path from the low to the high corner.
  static constexpr std::array<std::array<int, 3>, 6> kPaths{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  mesh.cells.reserve(static_cast<std::size_t>(6) * n * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (const auto& path : kPaths) {
          std::array<int, 3> p{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = vid(p[0], p[1], p[2]);
          for (int s = 0; s < 3; ++s) {
            ++p[path[s]];
            tet[s + 1] = vid(p[0], p[1], p[2]);
          }
          mesh.cells.push_back(tet);
        }
      }
    }
  }
  mesh.regions.assign(mesh.cells.size(), 0);
  canonicalize(mesh);
  return mesh;
}

Mesh reference_tet_mesh() {
  Mesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  mesh.cells = {{0, 1, 2, 3}};
  mesh.regions = {0};
  canonicalize(mesh);
  return mesh;
}

int MeshTopology::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  return find_sorted(edges, {a, b});
}

int MeshTopology::face_index(int a, int b, int c) const {
  std::array<int, 3> key{a, b, c};
  std::sort(key.begin(), key.end());
  return find_sorted(faces, key);
}

MeshTopology build_topology(const Mesh& mesh) {
  MeshTopology topo;
  const int nc = mesh.num_cells();

  topo.edges.reserve(static_cast<std::size_t>(nc) * 6);
  topo.faces.reserve(static_cast<std::size_t>(nc) * 4);
  for (const auto& t : mesh.cells) {
    for (const auto& e : kLocalEdges) {
      std::array<int, 2> key{t[e[0]], t[e[1]]};
      std::sort(key.begin(), key.end());
      topo.edges.push_back(key);
    }
    for (const auto& f : kLocalFaces) {
      std::array<int, 3> key{t[f[0]], t[f[1]], t[f[2]]};
      std::sort(key.begin(), key.end());
      topo.faces.push_back(key);
    }
  }
  std::sort(topo.edges.begin(), topo.edges.end());
  topo.edges.erase(std::unique(topo.edges.begin(), topo.edges.end()), topo.edges.end());
  std::sort(topo.faces.begin(), topo.faces.end());
  topo.faces.erase(std::unique(topo.faces.begin(), topo.faces.end()), topo.faces.end());

  topo.cell_edges.resize(nc);
  topo.cell_edge_signs.resize(nc);
  topo.cell_faces.resize(nc);
  topo.cell_face_signs.resize(nc);
  topo.cell_face_outward.resize(nc);
  topo.face_cells.assign(topo.faces.size(), {-1, -1});

  for (int c = 0; c < nc; ++c) {
    const auto& t = mesh.cells[c];
    for (int k = 0; k < 6; ++k) {
      const int a = t[kLocalEdges[k][0]];
      const int b = t[kLocalEdges[k][1]];
      topo.cell_edges[c][k] = topo.edge_index(a, b);
      topo.cell_edge_signs[c][k] = a < b ? 1 : -1;
    }
    for (int k = 0; k < 4; ++k) {
      std::array<int, 3> g{t[kLocalFaces[k][0]], t[kLocalFaces[k][1]], t[kLocalFaces[k][2]]};
      const int f = topo.face_index(g[0], g[1], g[2]);
      const int parity = parity_of_three(g);
      topo.cell_faces[c][k] = f;
      topo.cell_face_signs[c][k] = static_cast<std::int8_t>(parity);
      // On a positively oriented cell the local ascending tuple of face k points outward iff k is even.
      topo.cell_face_outward[c][k] = static_cast<std::int8_t>((k % 2 == 0 ? 1 : -1) * parity);
      auto& fc = topo.face_cells[f];
      if (fc[0] < 0) {
        fc[0] = c;
      } else if (fc[1] < 0) {
        fc[1] = c;
      } else {
        throw TopologyError("face " + std::to_string(f) + " is shared by more than two cells");
      }
    }
  }

  topo.face_edges.resize(topo.faces.size());
  topo.face_edge_signs.resize(topo.faces.size());
  topo.boundary_vertex.assign(mesh.vertices.size(), 0);
  topo.boundary_edge.assign(topo.edges.size(), 0);
  topo.boundary_face.assign(topo.faces.size(), 0);
  for (int f = 0; f < topo.num_faces(); ++f) {
    const auto& [a, b, c] = topo.faces[f];
    topo.face_edges[f] = {topo.edge_index(a, b), topo.edge_index(b, c), topo.edge_index(a, c)};
    topo.face_edge_signs[f] = {1, 1, -1};
    if (topo.face_cells[f][1] < 0) {
      topo.boundary_face[f] = 1;
      for (int e : topo.face_edges[f]) topo.boundary_edge[e] = 1;
      topo.boundary_vertex[a] = topo.boundary_vertex[b] = topo.boundary_vertex[c] = 1;
    }
  }
  return topo;
}

MeshMetrics mesh_metrics(const Mesh& mesh) {
  MeshMetrics m;
  m.h_min = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto x = mesh.cell_vertices(c);
    double diam = 0.0;
    for (const auto& e : kLocalEdges) {
      diam = std::max(diam, norm(x[e[1]] - x[e[0]]));
    }
    double area = 0.0;
    for (const auto& f : kLocalFaces) {
      area += 0.5 * norm(cross(x[f[1]] - x[f[0]], x[f[2]] - x[f[0]]));
    }
    const double inradius = 3.0 * mesh.volume(c) / area;
    m.h_max = std::max(m.h_max, diam);
    m.h_min = std::min(m.h_min, diam);
    m.shape_ratio = std::max(m.shape_ratio, diam / inradius);
  }
  if (mesh.cells.empty()) m.h_min = 0.0;
  return m;
}

}  // namespace mhd
