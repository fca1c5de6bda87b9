#include "surfcorr/geodesics.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <thread>

#include "surfcorr/io_util.hpp"

namespace surfcorr {

namespace {
constexpr char kCacheMagic[4] = {'S', 'C', 'G', 'C'};
constexpr std::uint32_t kCacheVersion = 1;
}  // namespace

bool GeodesicCache::has_row(int vertex) const {
  return std::find(sources.begin(), sources.end(), vertex) != sources.end();
}

std::span<const double> GeodesicCache::row(int vertex) const {
  const auto it = std::find(sources.begin(), sources.end(), vertex);
  if (it == sources.end()) {
    throw ArgError("geodesic cache has no row for vertex " + std::to_string(vertex));
  }
  const std::size_t i = static_cast<std::size_t>(it - sources.begin());
  return {dist.data() + i * vertex_count, static_cast<std::size_t>(vertex_count)};
}

double GeodesicCache::lookup(int a, int b) const {
  if (a < 0 || a >= vertex_count || b < 0 || b >= vertex_count) {
    throw ArgError("geodesic lookup: vertex index out of range");
  }
  if (has_row(a)) return row(a)[b];
  return row(b)[a];
}

std::vector<double> geodesic_from(const EdgeGraph& graph, int source) {
  const int n = graph.vertex_count();
  if (source < 0 || source >= n) {
    throw ArgError("geodesic source " + std::to_string(source) +
                   " out of range [0, " + std::to_string(n) + ")");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kInf);
  dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;  // stale entry
    for (const auto& [v, w] : graph.adjacency[u]) {
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  for (double d : dist) {
    if (d == kInf) {
      throw ValidationError("edge graph is disconnected; geodesics undefined");
    }
  }
  return dist;
}

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("SURFCORR_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) hw = std::min(hw, cap);
  }
  return hw;
}

GeodesicCache build_cache(const EdgeGraph& graph, std::vector<int> sources,
                          std::uint64_t mesh_hash) {
  if (sources.empty()) throw ArgError("build_cache: sources must be nonempty");
  const int n = graph.vertex_count();
  for (int s : sources) {
    if (s < 0 || s >= n) {
      throw ArgError("build_cache: source " + std::to_string(s) + " out of range");
    }
  }
  GeodesicCache cache;
  cache.mesh_hash = mesh_hash;
  cache.sources = std::move(sources);
  cache.vertex_count = n;
  cache.dist.resize(cache.sources.size() * static_cast<std::size_t>(n));

  const int workers =
      std::min<int>(worker_count(), static_cast<int>(cache.sources.size()));
  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = geodesic_from(graph, cache.sources[i]);
      std::copy(row.begin(), row.end(), cache.dist.begin() + i * n);
    }
  };
  if (workers <= 1) {
    fill_rows(0, cache.sources.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t per = (cache.sources.size() + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const std::size_t begin = t * per;
      const std::size_t end = std::min(cache.sources.size(), begin + per);
      if (begin >= end) break;
      threads.emplace_back(fill_rows, begin, end);
    }
    for (auto& th : threads) th.join();
  }
  cache.g_max = *std::max_element(cache.dist.begin(), cache.dist.end());
  return cache;
}

double scale_to_cosine_range(double g, double g_max) {
  if (!(g_max > 0.0)) throw ArgError("scale: g_max must be positive");
  if (g < 0.0) throw ArgError("scale: distance must be nonnegative");
  return 2.0 * std::min(g, g_max) / g_max;
}

void save_cache(const GeodesicCache& cache, const std::string& path) {
  atomic_write(path, [&](std::ostream& os) {
    write_magic(os, kCacheMagic);
    write_u32(os, kCacheVersion);
    write_u32(os, static_cast<std::uint32_t>(cache.sources.size()));
    write_u32(os, static_cast<std::uint32_t>(cache.vertex_count));
    write_u64(os, cache.mesh_hash);
    for (int s : cache.sources) write_u32(os, static_cast<std::uint32_t>(s));
    for (double d : cache.dist) write_f32(os, static_cast<float>(d));
  });
}

GeodesicCache load_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  expect_magic(is, kCacheMagic, "geodesic cache");
  const auto version = read_u32(is, "version");
  if (version != kCacheVersion) {
    throw ParseError("unsupported geodesic cache version " + std::to_string(version));
  }
  GeodesicCache cache;
  const auto n_sources = read_u32(is, "source count");
  cache.vertex_count = static_cast<int>(read_u32(is, "vertex count"));
  cache.mesh_hash = read_u64(is, "mesh hash");
  cache.sources.resize(n_sources);
  for (auto& s : cache.sources) s = static_cast<int>(read_u32(is, "source index"));
  cache.dist.resize(static_cast<std::size_t>(n_sources) * cache.vertex_count);
  for (auto& d : cache.dist) d = read_f32(is, "distance row");
  cache.g_max = cache.dist.empty()
                    ? 0.0
                    : *std::max_element(cache.dist.begin(), cache.dist.end());
  return cache;
}

GeodesicCache load_or_build_cache(const std::string& path, const EdgeGraph& graph,
                                  std::vector<int> sources, std::uint64_t mesh_hash) {
  if (std::filesystem::exists(path)) {
    try {
      GeodesicCache cache = load_cache(path);
      if (cache.mesh_hash == mesh_hash && cache.sources == sources &&
          cache.vertex_count == graph.vertex_count()) {
        return cache;
      }
    } catch (const ParseError&) {
      // fall through to rebuild
    }
  }
  GeodesicCache cache = build_cache(graph, std::move(sources), mesh_hash);
  save_cache(cache, path);
  return cache;
}

}  // namespace surfcorr
