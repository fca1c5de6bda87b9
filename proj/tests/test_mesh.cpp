#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "surfcorr/errors.hpp"
#include "surfcorr/mesh.hpp"

using namespace surfcorr;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path =
      (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("tetrahedron fixture has 4 vertices, 4 faces, unit edges") {
  const TriangleMesh mesh = make_tetrahedron();
  CHECK(mesh.vertices.size() == 4);
  CHECK(mesh.faces.size() == 4);
  const EdgeGraph graph = build_edge_graph(mesh);
  CHECK(graph.edge_count() == 6);
  for (const auto& nbrs : graph.adjacency) {
    for (const auto& [v, w] : nbrs) {
      (void)v;
      CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("grid(3) has 9 vertices and 8 triangles") {
  const TriangleMesh mesh = make_grid(3);
  CHECK(mesh.vertices.size() == 9);
  CHECK(mesh.faces.size() == 8);
  CHECK_NOTHROW(validate_mesh(mesh));
}

TEST_CASE("icosphere counts: 12 at level 0, 42/120 at level 1, 162 at level 2") {
  CHECK(make_icosphere(0).vertices.size() == 12);
  const TriangleMesh ico1 = make_icosphere(1);
  CHECK(ico1.vertices.size() == 42);
  CHECK(build_edge_graph(ico1).edge_count() == 120);
  CHECK(make_icosphere(2).vertices.size() == 162);
}

TEST_CASE("make_test_mesh parses kind strings") {
  CHECK(make_test_mesh("tetrahedron").vertices.size() == 4);
  CHECK(make_test_mesh("icosphere(1)").vertices.size() == 42);
  CHECK(make_test_mesh("grid(4)").vertices.size() == 16);
  CHECK_THROWS_AS(make_test_mesh("dodecahedron"), ArgError);
}

TEST_CASE("OBJ loader accepts slash-suffixed faces and reports counts") {
  const std::string obj =
      "# comment\n"
      "v 0 0 0\n"
      "v 1 0 0\n"
      "v 0 1 0\n"
      "v 0 0 1\n"
      "f 1/2/3 2/1/1 3/4/4\n"
      "f 1//2 2//3 4//1\n"
      "f 1/5 3/1 4/2\n"
      "f 2 3 4\n";
  const auto path = write_temp("surfcorr_tetra_slashes.obj", obj);
  const TriangleMesh mesh = load_mesh(path);
  CHECK(mesh.vertices.size() == 4);
  CHECK(mesh.faces.size() == 4);
  std::remove(path.c_str());
}

TEST_CASE("OBJ loader rejects 1-based index violations with a line number") {
  const auto path = write_temp("surfcorr_zero_index.obj",
                               "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
  CHECK_THROWS_WITH_AS(load_mesh(path),
                       doctest::Contains("line 4"), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("OBJ loader rejects malformed records") {
  const auto bad_vertex = write_temp("surfcorr_bad_vertex.obj",
                                     "v 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  CHECK_THROWS_AS(load_mesh(bad_vertex), ParseError);
  std::remove(bad_vertex.c_str());

  const auto quad = write_temp(
      "surfcorr_quad.obj",
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  CHECK_THROWS_AS(load_mesh(quad), ParseError);
  std::remove(quad.c_str());
}

TEST_CASE("validation rejects out-of-range and repeated indices") {
  TriangleMesh mesh = make_tetrahedron();
  mesh.faces.push_back({0, 1, 9});
  CHECK_THROWS_AS(validate_mesh(mesh), ValidationError);

  mesh = make_tetrahedron();
  mesh.faces.push_back({1, 1, 2});
  CHECK_THROWS_AS(validate_mesh(mesh), ValidationError);
}

TEST_CASE("validation rejects zero-area faces") {
  TriangleMesh mesh = make_tetrahedron();
  mesh.vertices.push_back(mesh.vertices[0]);
  mesh.vertices.back().x() += 0.5;
  // Collinear with vertices 0 and the new point shifted along x only.
  mesh.vertices.push_back(mesh.vertices[0]);
  mesh.vertices.back().x() += 1.0;
  mesh.faces.push_back({0, 4, 5});
  CHECK_THROWS_AS(validate_mesh(mesh), ValidationError);
}

TEST_CASE("validation rejects disconnected meshes") {
  TriangleMesh mesh = make_tetrahedron();
  const TriangleMesh other = make_tetrahedron();
  const int base = static_cast<int>(mesh.vertices.size());
  for (const auto& v : other.vertices) {
    mesh.vertices.push_back(v + Eigen::Vector3d(10.0, 0.0, 0.0));
  }
  for (const auto& f : other.faces) {
    mesh.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  CHECK_THROWS_WITH_AS(validate_mesh(mesh),
                       doctest::Contains("connected"), ValidationError);
}

TEST_CASE("write/load round-trips vertices within 1e-6 and faces exactly") {
  const TriangleMesh mesh = make_icosphere(1);
  const auto path =
      (std::filesystem::temp_directory_path() / "surfcorr_roundtrip.obj")
          .string();
  write_mesh(mesh, path);
  const TriangleMesh back = load_mesh(path);
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  REQUIRE(back.faces.size() == mesh.faces.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    CHECK((back.vertices[i] - mesh.vertices[i]).norm() <= 1e-6);
  }
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    CHECK(back.faces[i] == mesh.faces[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("edge graph is symmetric with positive weights") {
  const TriangleMesh mesh = make_grid(5);
  const EdgeGraph graph = build_edge_graph(mesh);
  for (std::size_t u = 0; u < graph.adjacency.size(); ++u) {
    for (const auto& [v, w] : graph.adjacency[u]) {
      CHECK(w > 0.0);
      bool found = false;
      for (const auto& [back, wb] : graph.adjacency[v]) {
        if (back == static_cast<int>(u)) {
          found = true;
          CHECK(wb == w);
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("mesh content hash tracks geometry changes") {
  TriangleMesh a = make_icosphere(1);
  TriangleMesh b = a;
  CHECK(mesh_content_hash(a) == mesh_content_hash(b));
  b.vertices[7].z() += 1e-9;
  CHECK(mesh_content_hash(a) != mesh_content_hash(b));
}
