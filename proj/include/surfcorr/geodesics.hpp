#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "surfcorr/mesh.hpp"

namespace surfcorr {

// Source-to-all-vertices geodesic distance rows, in mesh units. Immutable
// once built; rows are independent so construction parallelizes freely.
struct GeodesicCache {
  std::uint64_t mesh_hash = 0;
  std::vector<int> sources;
  int vertex_count = 0;
  std::vector<double> dist;  // |sources| × vertex_count, row-major
  double g_max = 0.0;

  bool has_row(int vertex) const;
  std::span<const double> row(int vertex) const;
  // g(a, b) via the row of a or, failing that, the row of b.
  double lookup(int a, int b) const;
};

// Shortest-path distances over the weighted edge graph (the graph-geodesic
// approximation of surface distance). All entries finite on a connected graph.
std::vector<double> geodesic_from(const EdgeGraph& graph, int source);

GeodesicCache build_cache(const EdgeGraph& graph, std::vector<int> sources,
                          std::uint64_t mesh_hash = 0);

// s(g) = 2·min(g, g_max)/g_max — linear map of geodesic distance into the
// [0, 2] range of the cosine distance, clamped at g_max.
double scale_to_cosine_range(double g, double g_max);

void save_cache(const GeodesicCache& cache, const std::string& path);
GeodesicCache load_cache(const std::string& path);

// Loads `path` if it exists and its stored hash matches `mesh_hash` and its
// sources match; otherwise recomputes and rewrites the file.
GeodesicCache load_or_build_cache(const std::string& path, const EdgeGraph& graph,
                                  std::vector<int> sources, std::uint64_t mesh_hash);

// Worker cap: min(hardware, SURFCORR_THREADS if set).
int worker_count();

}  // namespace surfcorr
