#include <fstream>
#include <istream>
#include <sstream>

#include "mhd/mesh.hpp"

namespace mhd {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  std::string expect_line(const char* what) {
    std::string line;
    if (!next(line)) throw MeshParseError(line_no_, std::string("unexpected end of file, expected ") + what);
    return line;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

long parse_count(LineReader& r, const char* what) {
  const std::string line = r.expect_line(what);
  std::istringstream ss(line);
  long n = -1;
  if (!(ss >> n) || n < 0) throw MeshParseError(r.line(), std::string("bad ") + what + " count");
  return n;
}

void expect_end(LineReader& r, const std::string& tag) {
  const std::string line = trimmed(r.expect_line(tag.c_str()));
  if (line != tag) throw MeshParseError(r.line(), "expected " + tag + ", found '" + line + "'");
}

}  // namespace

Mesh read_gmsh_msh2(std::istream& in) {
  LineReader r(in);
  bool have_format = false;
  bool have_nodes = false;
  bool have_elements = false;
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> tets;
  std::vector<int> regions;

  std::string line;
  while (r.next(line)) {
    const std::string tag = trimmed(line);
    if (tag == "$MeshFormat") {
      std::istringstream ss(r.expect_line("format line"));
      double version = 0.0;
      int file_type = -1, data_size = 0;
      if (!(ss >> version >> file_type >> data_size)) throw MeshParseError(r.line(), "malformed $MeshFormat");
      if (version < 2.0 || version >= 3.0) throw MeshParseError(r.line(), "unsupported MSH version");
      if (file_type != 0) throw MeshParseError(r.line(), "only ASCII MSH files are supported");
      expect_end(r, "$EndMeshFormat");
      have_format = true;
    } else if (tag == "$Nodes") {
      if (!have_format) throw MeshParseError(r.line(), "$Nodes before $MeshFormat");
      const long n = parse_count(r, "node");
      nodes.assign(n, Vec3{});
      std::vector<char> seen(n, 0);
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(r.expect_line("node"));
        long id = 0;
        Vec3 p;
        if (!(ss >> id >> p.x >> p.y >> p.z)) throw MeshParseError(r.line(), "malformed node line");
        if (id < 1 || id > n || seen[id - 1]) {
          throw MeshParseError(r.line(), "node ids must be contiguous 1.." + std::to_string(n));
        }
        seen[id - 1] = 1;
        nodes[id - 1] = p;
      }
      expect_end(r, "$EndNodes");
      have_nodes = true;
    } else if (tag == "$Elements") {
      if (!have_nodes) throw MeshParseError(r.line(), "$Elements before $Nodes");
      const long n = parse_count(r, "element");
      for (long i = 0; i < n; ++i) {
        std::istringstream ss(r.expect_line("element"));
        long id = 0;
        int type = 0, ntags = 0;
        if (!(ss >> id >> type >> ntags) || ntags < 0) throw MeshParseError(r.line(), "malformed element line");
        std::vector<long> tags(ntags);
        for (auto& t : tags) {
          if (!(ss >> t)) throw MeshParseError(r.line(), "missing element tag");
        }
        if (type != 4) continue;
        std::array<int, 4> tet{};
        for (auto& v : tet) {
          long node = 0;
          if (!(ss >> node)) throw MeshParseError(r.line(), "tetrahedron needs 4 nodes");
          if (node < 1 || node > static_cast<long>(nodes.size())) {
            throw MeshParseError(r.line(), "unknown node reference " + std::to_string(node));
          }
          v = static_cast<int>(node - 1);
        }
        tets.push_back(tet);
        regions.push_back(ntags > 0 ? static_cast<int>(tags[0]) : 0);
      }
      expect_end(r, "$EndElements");
      have_elements = true;
    } else if (!tag.empty() && tag[0] == '$') {
      const std::string end = "$End" + tag.substr(1);
      std::string skip;
      do {
        skip = trimmed(r.expect_line(end.c_str()));
      } while (skip != end);
    } else {
      throw MeshParseError(r.line(), "unexpected content '" + tag + "'");
    }
  }
  if (!have_format) throw MeshParseError(r.line(), "missing $MeshFormat header");
  if (!have_elements) throw MeshParseError(r.line(), "missing $Elements section");
  if (tets.empty()) throw MeshParseError(r.line(), "no tetrahedra found");

  // Drop nodes not referenced by any tetrahedron, keeping the relative order of the rest.
  std::vector<int> remap(nodes.size(), -1);
  for (const auto& t : tets) {
    for (int v : t) remap[v] = 0;
  }
  Mesh mesh;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (remap[i] == 0) {
      remap[i] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(nodes[i]);
    }
  }
  mesh.cells.reserve(tets.size());
  for (const auto& t : tets) {
    mesh.cells.push_back({remap[t[0]], remap[t[1]], remap[t[2]], remap[t[3]]});
  }
  mesh.regions = std::move(regions);
  canonicalize(mesh);
  return mesh;
}

Mesh read_gmsh_msh2_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return read_gmsh_msh2(in);
}

}  // namespace mhd
