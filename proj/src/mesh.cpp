#include "surfcorr/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "surfcorr/io_util.hpp"
#include "surfcorr/rng.hpp"

namespace surfcorr {

std::size_t EdgeGraph::edge_count() const {
  std::size_t directed = 0;
  for (const auto& nbrs : adjacency) directed += nbrs.size();
  return directed / 2;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
      ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, int line_no) {
  double v;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                     std::string(tok) + "'");
  }
  return v;
}

// First slash-separated field of an `f` entry; texture/normal refs are ignored.
int parse_face_index(std::string_view tok, int line_no) {
  const auto slash = tok.find('/');
  const auto head = slash == std::string_view::npos ? tok : tok.substr(0, slash);
  int v;
  const auto res = std::from_chars(head.data(), head.data() + head.size(), v);
  if (res.ec != std::errc{} || res.ptr != head.data() + head.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad face index '" +
                     std::string(tok) + "'");
  }
  if (v < 1) {
    throw ParseError("line " + std::to_string(line_no) +
                     ": face index must be >= 1 (OBJ indices are 1-based), got " +
                     std::to_string(v));
  }
  return v - 1;
}

double face_area(const TriangleMesh& mesh, const std::array<int, 3>& f) {
  const Eigen::Vector3d& a = mesh.vertices[f[0]];
  const Eigen::Vector3d& b = mesh.vertices[f[1]];
  const Eigen::Vector3d& c = mesh.vertices[f[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

TriangleMesh parse_obj(const std::string& text, const std::string& name) {
  TriangleMesh mesh;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) {
        throw ParseError(name + ": line " + std::to_string(line_no) +
                         ": vertex record needs 3 coordinates");
      }
      mesh.vertices.emplace_back(parse_double(toks[1], line_no),
                                 parse_double(toks[2], line_no),
                                 parse_double(toks[3], line_no));
    } else if (toks[0] == "f") {
      if (toks.size() != 4) {
        throw ParseError(name + ": line " + std::to_string(line_no) +
                         ": only triangular faces are supported (got " +
                         std::to_string(toks.size() - 1) + " entries)");
      }
      mesh.faces.push_back({parse_face_index(toks[1], line_no),
                            parse_face_index(toks[2], line_no),
                            parse_face_index(toks[3], line_no)});
    }
    // vn / vt / o / g / s / usemtl / mtllib: geometry-irrelevant, skipped
  }
  validate_mesh(mesh);
  return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
  return parse_obj(read_text_file(path), path);
}

void write_mesh(const TriangleMesh& mesh, const std::string& path) {
  atomic_write(path, [&](std::ostream& os) {
    os.precision(17);
    for (const auto& v : mesh.vertices) {
      os << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
    for (const auto& f : mesh.faces) {
      os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
  });
}

void validate_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw ValidationError("mesh has no vertices");
  if (mesh.faces.empty()) throw ValidationError("mesh has no faces");
  const int n = mesh.vertex_count();
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const auto& f = mesh.faces[i];
    for (int k = 0; k < 3; ++k) {
      if (f[k] < 0 || f[k] >= n) {
        throw ValidationError("face " + std::to_string(i) + ": vertex index " +
                              std::to_string(f[k]) + " out of range [0, " +
                              std::to_string(n) + ")");
      }
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw ValidationError("face " + std::to_string(i) + " repeats a vertex index");
    }
    if (face_area(mesh, f) < kDegenerateFaceArea) {
      throw ValidationError("face " + std::to_string(i) + " is degenerate (area < " +
                            std::to_string(kDegenerateFaceArea) + ")");
    }
  }
  // Connectivity over the face-derived edge graph.
  std::vector<std::vector<int>> adj(n);
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      adj[f[k]].push_back(f[(k + 1) % 3]);
      adj[f[(k + 1) % 3]].push_back(f[k]);
    }
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  if (reached != n) {
    throw ValidationError("edge graph is disconnected (" + std::to_string(reached) +
                          " of " + std::to_string(n) +
                          " vertices reachable); geodesics would be undefined");
  }
}

EdgeGraph build_edge_graph(const TriangleMesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<std::set<int>> nbrs(n);
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      nbrs[a].insert(b);
      nbrs[b].insert(a);
    }
  }
  EdgeGraph graph;
  graph.adjacency.resize(n);
  for (int u = 0; u < n; ++u) {
    graph.adjacency[u].reserve(nbrs[u].size());
    for (int v : nbrs[u]) {
      graph.adjacency[u].emplace_back(v, (mesh.vertices[u] - mesh.vertices[v]).norm());
    }
  }
  return graph;
}

std::uint64_t mesh_content_hash(const TriangleMesh& mesh) {
  std::uint64_t h = fnv1a64("surfcorr-mesh");
  for (const auto& v : mesh.vertices) {
    double xyz[3] = {v.x(), v.y(), v.z()};
    h = fnv1a64_bytes(xyz, sizeof(xyz), h);
  }
  for (const auto& f : mesh.faces) {
    std::int32_t idx[3] = {f[0], f[1], f[2]};
    h = fnv1a64_bytes(idx, sizeof(idx), h);
  }
  return h;
}

TriangleMesh make_tetrahedron() {
  // Regular tetrahedron scaled to unit edge length.
  const double s = 1.0 / (2.0 * std::sqrt(2.0));
  TriangleMesh mesh;
  mesh.vertices = {
      Eigen::Vector3d(1, 1, 1) * s,
      Eigen::Vector3d(1, -1, -1) * s,
      Eigen::Vector3d(-1, 1, -1) * s,
      Eigen::Vector3d(-1, -1, 1) * s,
  };
  mesh.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  validate_mesh(mesh);
  return mesh;
}

TriangleMesh make_icosphere(int level) {
  if (level < 0) throw ArgError("icosphere level must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (auto& v : mesh.vertices) v.normalize();
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int iter = 0; iter < level; ++iter) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (const auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      Eigen::Vector3d m = (mesh.vertices[a] + mesh.vertices[b]).normalized();
      mesh.vertices.push_back(m);
      const int idx = mesh.vertex_count() - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(next);
  }
  validate_mesh(mesh);
  return mesh;
}

TriangleMesh make_grid(int n) {
  if (n < 2) throw ArgError("grid size must be >= 2");
  TriangleMesh mesh;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      mesh.vertices.emplace_back(static_cast<double>(c), static_cast<double>(r), 0.0);
    }
  }
  auto id = [n](int r, int c) { return r * n + c; };
  for (int r = 0; r + 1 < n; ++r) {
    for (int c = 0; c + 1 < n; ++c) {
      mesh.faces.push_back({id(r, c), id(r, c + 1), id(r + 1, c)});
      mesh.faces.push_back({id(r, c + 1), id(r + 1, c + 1), id(r + 1, c)});
    }
  }
  validate_mesh(mesh);
  return mesh;
}

TriangleMesh make_test_mesh(const std::string& kind) {
  if (kind == "tetrahedron") return make_tetrahedron();
  auto parse_arg = [&](const std::string& prefix) -> int {
    const std::string inner =
        kind.substr(prefix.size(), kind.size() - prefix.size() - 1);
    int v = 0;
    const auto res = std::from_chars(inner.data(), inner.data() + inner.size(), v);
    if (res.ec != std::errc{} || res.ptr != inner.data() + inner.size()) {
      throw ArgError("bad test mesh kind: " + kind);
    }
    return v;
  };
  if (kind.starts_with("icosphere(") && kind.ends_with(")")) {
    return make_icosphere(parse_arg("icosphere("));
  }
  if (kind.starts_with("grid(") && kind.ends_with(")")) {
    return make_grid(parse_arg("grid("));
  }
  throw ArgError("unknown test mesh kind: " + kind +
                 " (expected tetrahedron, icosphere(level), or grid(n))");
}

}  // namespace surfcorr
