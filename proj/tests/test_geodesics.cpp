#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "surfcorr/errors.hpp"
#include "surfcorr/geodesics.hpp"
#include "surfcorr/mesh.hpp"
#include "surfcorr/rng.hpp"

using namespace surfcorr;

TEST_CASE("unit tetrahedron distances from vertex 0 are (0,1,1,1)") {
  const EdgeGraph graph = build_edge_graph(make_tetrahedron());
  const std::vector<double> row = geodesic_from(graph, 0);
  REQUIRE(row.size() == 4);
  CHECK(row[0] == 0.0);
  CHECK(row[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("path graph across a degenerate strip accumulates unit edges") {
  // Strip of two thin triangles whose long diagonals are pruned by distance:
  // v0-(1)-v1-(1)-v2 plus off-axis apexes keeping faces non-degenerate.
  TriangleMesh mesh;
  mesh.vertices = {
      {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {2.0, 0.0, 0.0},
      {0.5, 20.0, 0.0}, {1.5, 20.0, 0.0},
  };
  mesh.faces = {{0, 1, 3}, {1, 2, 4}, {1, 4, 3}};
  validate_mesh(mesh);
  const EdgeGraph graph = build_edge_graph(mesh);
  const std::vector<double> row = geodesic_from(graph, 0);
  CHECK(row[2] == 2.0);
}

TEST_CASE("source out of range throws") {
  const EdgeGraph graph = build_edge_graph(make_tetrahedron());
  CHECK_THROWS_AS(geodesic_from(graph, 4), ArgError);
  CHECK_THROWS_AS(geodesic_from(graph, -1), ArgError);
}

TEST_CASE("geodesic_from matches the all-pairs oracle on small meshes") {
  Rng rng = stage_rng(11, "geodesic-oracle-unit");
  for (int trial = 0; trial < 4; ++trial) {
    const TriangleMesh mesh = oracle::random_mesh(rng);
    const EdgeGraph graph = build_edge_graph(mesh);
    const auto expected = oracle::all_pairs_geodesics(graph);
    for (int s = 0; s < static_cast<int>(graph.adjacency.size()); ++s) {
      const std::vector<double> row = geodesic_from(graph, s);
      for (std::size_t v = 0; v < row.size(); ++v) {
        CHECK(row[v] == expected[s][v]);
      }
    }
  }
}

TEST_CASE("symmetry and triangle inequality hold on the icosphere") {
  const EdgeGraph graph = build_edge_graph(make_icosphere(1));
  const int n = static_cast<int>(graph.adjacency.size());
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (int s = 0; s < n; ++s) rows.push_back(geodesic_from(graph, s));
  Rng rng = stage_rng(5, "geodesic-triples");
  for (int t = 0; t < 200; ++t) {
    const int a = rng.uniform_int(0, n - 1);
    const int b = rng.uniform_int(0, n - 1);
    const int c = rng.uniform_int(0, n - 1);
    CHECK(rows[a][b] == doctest::Approx(rows[b][a]).epsilon(1e-9));
    CHECK(rows[a][c] <= rows[a][b] + rows[b][c] + 1e-9);
  }
}

TEST_CASE("build_cache over all tetrahedron vertices has a zero diagonal") {
  const EdgeGraph graph = build_edge_graph(make_tetrahedron());
  const GeodesicCache cache = build_cache(graph, {0, 1, 2, 3});
  CHECK(cache.sources.size() == 4);
  CHECK(cache.vertex_count == 4);
  for (int src : cache.sources) CHECK(cache.row(src)[src] == 0.0);
  CHECK(cache.g_max == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singleton-source cache equals geodesic_from") {
  const EdgeGraph graph = build_edge_graph(make_icosphere(1));
  const GeodesicCache cache = build_cache(graph, {17});
  const std::vector<double> row = geodesic_from(graph, 17);
  for (std::size_t v = 0; v < row.size(); ++v) {
    CHECK(cache.row(17)[v] == row[v]);
  }
}

TEST_CASE("cache rows match per-source recomputation on random sources") {
  const EdgeGraph graph = build_edge_graph(make_icosphere(1));
  Rng rng = stage_rng(3, "cache-sources");
  const std::vector<int> sources =
      rng.sample_without_replacement(static_cast<int>(graph.adjacency.size()), 10);
  const GeodesicCache cache = build_cache(graph, sources);
  for (const int src : sources) {
    const std::vector<double> row = geodesic_from(graph, src);
    for (std::size_t v = 0; v < row.size(); ++v) {
      CHECK(cache.row(src)[v] == row[v]);
    }
  }
}

TEST_CASE("cache lookup uses either endpoint's row and reports misses") {
  const EdgeGraph graph = build_edge_graph(make_tetrahedron());
  const GeodesicCache cache = build_cache(graph, {1});
  CHECK(cache.lookup(1, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cache.lookup(3, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(cache.lookup(0, 3), ArgError);
}

TEST_CASE("scale endpoints and midpoint") {
  CHECK(scale_to_cosine_range(0.0, 3.0) == 0.0);
  CHECK(scale_to_cosine_range(3.0, 3.0) == 2.0);
  CHECK(scale_to_cosine_range(0.75, 3.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(scale_to_cosine_range(9.0, 3.0) == 2.0);  // clamped above g_max
  CHECK_THROWS_AS(scale_to_cosine_range(1.0, 0.0), ArgError);
  CHECK_THROWS_AS(scale_to_cosine_range(-0.5, 1.0), ArgError);
}

TEST_CASE("cache persists losslessly at f32 precision and validates the mesh hash") {
  const TriangleMesh mesh = make_icosphere(1);
  const EdgeGraph graph = build_edge_graph(mesh);
  const GeodesicCache cache = build_cache(graph, {0, 5, 9}, mesh_content_hash(mesh));
  const auto path =
      (std::filesystem::temp_directory_path() / "surfcorr_cache_test.bin")
          .string();
  save_cache(cache, path);
  const GeodesicCache back = load_cache(path);
  CHECK(back.mesh_hash == cache.mesh_hash);
  CHECK(back.sources == cache.sources);
  CHECK(back.vertex_count == cache.vertex_count);
  for (const int src : cache.sources) {
    for (int v = 0; v < cache.vertex_count; ++v) {
      CHECK(back.row(src)[v] ==
            doctest::Approx(cache.row(src)[v]).epsilon(1e-6));
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("load_or_build_cache rebuilds on hash mismatch") {
  const TriangleMesh mesh = make_tetrahedron();
  const EdgeGraph graph = build_edge_graph(mesh);
  const auto path =
      (std::filesystem::temp_directory_path() / "surfcorr_cache_rebuild.bin")
          .string();
  GeodesicCache stale = build_cache(graph, {0}, /*mesh_hash=*/12345);
  save_cache(stale, path);

  TriangleMesh scaled = mesh;
  for (auto& v : scaled.vertices) v *= 2.0;
  const EdgeGraph graph2 = build_edge_graph(scaled);
  const GeodesicCache fresh =
      load_or_build_cache(path, graph2, {0}, mesh_content_hash(scaled));
  CHECK(fresh.mesh_hash == mesh_content_hash(scaled));
  CHECK(fresh.row(0)[1] == doctest::Approx(2.0).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("disconnected graphs are rejected by geodesic_from") {
  EdgeGraph graph;
  graph.adjacency.resize(4);
  graph.adjacency[0].push_back({1, 1.0});
  graph.adjacency[1].push_back({0, 1.0});
  graph.adjacency[2].push_back({3, 1.0});
  graph.adjacency[3].push_back({2, 1.0});
  CHECK_THROWS_AS(geodesic_from(graph, 0), ValidationError);
}
