#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "surfcorr/errors.hpp"
#include "surfcorr/metrics.hpp"
#include "surfcorr/optimize.hpp"

using namespace surfcorr;

namespace {

GeodesicCache scene_cache(const Scene& scene) {
  const EdgeGraph graph = build_edge_graph(scene.mesh);
  std::vector<int> sources(scene.mesh.vertices.size());
  std::iota(sources.begin(), sources.end(), 0);
  return build_cache(graph, sources, mesh_content_hash(scene.mesh));
}

double view_gps(const Scene& scene, const OptimizeResult& result, int view,
                const GeodesicCache& cache) {
  const VertexMap pred =
      predict_vertices(result.fields[view], result.table);
  return gps(scene.views[view].corrs, pred, cache);
}

double mean_link_cosine(const Scene& scene, const OptimizeResult& result) {
  const auto& links = scene.views[0].corrs.cross_view;
  REQUIRE(!links.empty());
  double total = 0.0;
  for (const CrossViewLink& link : links) {
    total += cosine_distance(result.fields[0].at(link.pixel),
                             result.fields[1].at(link.partner_pixel));
  }
  return total / static_cast<double>(links.size());
}

}  // namespace

TEST_CASE("optimizer is deterministic for a fixed seed") {
  const Scene scene = make_twoview_grid_scene(1);
  const GeodesicCache cache = scene_cache(scene);
  OptimizeConfig config;
  config.dim = 8;
  config.steps = 5;
  config.seed = 42;

  const OptimizeResult a = optimize_embeddings(scene, cache, config);
  const OptimizeResult b = optimize_embeddings(scene, cache, config);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.table == b.table);
  REQUIRE(a.fields.size() == 2);
  for (int i = 0; i < 2; ++i) CHECK(a.fields[i].data == b.fields[i].data);

  config.seed = 43;
  const OptimizeResult c = optimize_embeddings(scene, cache, config);
  CHECK(a.loss_trace != c.loss_trace);
}

TEST_CASE("trace length is steps plus one and the objective descends") {
  const Scene scene = make_twoview_grid_scene(2);
  const GeodesicCache cache = scene_cache(scene);
  OptimizeConfig config;
  config.dim = 16;
  config.steps = 60;
  config.seed = 5;

  const OptimizeResult result = optimize_embeddings(scene, cache, config);
  CHECK_FALSE(result.diverged);
  REQUIRE(result.loss_trace.size() == 61);
  CHECK(result.loss_trace.back() < result.loss_trace.front());
  for (std::size_t i = 10; i + 1 < result.loss_trace.size(); ++i) {
    CHECK(result.loss_trace[i + 1] <= result.loss_trace[i] + 1e-12);
  }
}

TEST_CASE("zero steps reports the initial objective untouched") {
  const Scene scene = make_twoview_grid_scene(3);
  const GeodesicCache cache = scene_cache(scene);
  OptimizeConfig config;
  config.dim = 8;
  config.steps = 0;
  const OptimizeResult result = optimize_embeddings(scene, cache, config);
  CHECK_FALSE(result.diverged);
  REQUIRE(result.loss_trace.size() == 1);
  CHECK(std::isfinite(result.loss_trace[0]));
}

TEST_CASE("runaway learning rate raises the divergence flag") {
  const Scene scene = make_twoview_grid_scene(4);
  const GeodesicCache cache = scene_cache(scene);
  OptimizeConfig config;
  config.dim = 8;
  config.steps = 20;
  config.learning_rate = 1e308;

  const OptimizeResult result = optimize_embeddings(scene, cache, config);
  CHECK(result.diverged);
  CHECK(result.loss_trace.size() < 22);
  CHECK_FALSE(std::isfinite(result.loss_trace.back()));
}

TEST_CASE("sphere training lifts geodesic prediction quality") {
  const Scene scene = make_sphere_scene(7);
  const GeodesicCache cache = scene_cache(scene);

  OptimizeConfig config;
  config.dim = 32;
  config.seed = 7;
  config.steps = 0;
  const OptimizeResult init = optimize_embeddings(scene, cache, config);
  const double gps0_before = view_gps(scene, init, 0, cache);
  const double gps1_before = view_gps(scene, init, 1, cache);
  CHECK(gps0_before < 0.35);
  CHECK(gps1_before < 0.35);

  config.steps = 200;
  const OptimizeResult trained = optimize_embeddings(scene, cache, config);
  CHECK_FALSE(trained.diverged);
  CHECK(view_gps(scene, trained, 0, cache) > 0.6);
  CHECK(view_gps(scene, trained, 1, cache) > 0.6);

  CHECK(mean_link_cosine(scene, init) > 0.2);
  CHECK(mean_link_cosine(scene, trained) < 0.05);
}

TEST_CASE("a single view trains on the geodesic term alone") {
  Scene scene = make_sphere_scene(9);
  scene.views.resize(1);
  const GeodesicCache cache = scene_cache(scene);
  OptimizeConfig config;
  config.dim = 16;
  config.steps = 30;
  const OptimizeResult result = optimize_embeddings(scene, cache, config);
  CHECK_FALSE(result.diverged);
  REQUIRE(result.fields.size() == 1);
  CHECK(result.loss_trace.back() < result.loss_trace.front());
}

TEST_CASE("optimizer rejects malformed configs and scenes") {
  const Scene scene = make_twoview_grid_scene(5);
  const GeodesicCache cache = scene_cache(scene);
  OptimizeConfig config;
  config.dim = 0;
  CHECK_THROWS_AS(optimize_embeddings(scene, cache, config), ArgError);
  config.dim = 8;
  config.steps = -1;
  CHECK_THROWS_AS(optimize_embeddings(scene, cache, config), ArgError);
  config.steps = 1;
  config.learning_rate = 0.0;
  CHECK_THROWS_AS(optimize_embeddings(scene, cache, config), ArgError);
  config.learning_rate = 0.5;
  config.temperature = 0.0;
  CHECK_THROWS_AS(optimize_embeddings(scene, cache, config), ArgError);
  config.temperature = 0.1;

  CHECK_THROWS_AS(optimize_embeddings(Scene{}, cache, config), ArgError);

  Scene empty_view = scene;
  empty_view.views[1].corrs.entries.clear();
  CHECK_THROWS_AS(optimize_embeddings(empty_view, cache, config),
                  ValidationError);
}
