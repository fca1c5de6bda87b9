#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "surfcorr/errors.hpp"

namespace surfcorr {

// Faces with area below this are rejected by validation.
inline constexpr double kDegenerateFaceArea = 1e-12;

// Canonical 3D body surface. Immutable after construction/validation; safe
// for concurrent reads.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
};

// Undirected weighted vertex graph derived from face adjacency; the substrate
// for graph geodesics. Neighbor lists are sorted by vertex index.
struct EdgeGraph {
  std::vector<std::vector<std::pair<int, double>>> adjacency;

  int vertex_count() const { return static_cast<int>(adjacency.size()); }
  std::size_t edge_count() const;  // undirected edges
};

// OBJ subset: `v x y z` and triangular `f` records; `f` entries may carry
// /texture/normal suffixes, which are ignored. Throws ParseError with the
// offending line number, ValidationError for a structurally bad mesh.
TriangleMesh load_mesh(const std::string& path);
TriangleMesh parse_obj(const std::string& text, const std::string& name);
void write_mesh(const TriangleMesh& mesh, const std::string& path);

// Index ranges, face degeneracy (repeated indices or area < kDegenerateFaceArea),
// and edge-graph connectivity. Geodesics between components are undefined, so a
// disconnected graph is an error.
void validate_mesh(const TriangleMesh& mesh);

EdgeGraph build_edge_graph(const TriangleMesh& mesh);

// Content hash over vertex coordinates and face indices; keys geodesic caches.
std::uint64_t mesh_content_hash(const TriangleMesh& mesh);

// Deterministic synthetic meshes.
TriangleMesh make_tetrahedron();        // regular, unit edge length
TriangleMesh make_icosphere(int level); // unit radius; level 0 = icosahedron
TriangleMesh make_grid(int n);          // n×n vertices in the z=0 plane

// kind: "tetrahedron" | "icosphere(level)" | "grid(n)"
TriangleMesh make_test_mesh(const std::string& kind);

}  // namespace surfcorr
