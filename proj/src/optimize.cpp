#include "surfcorr/optimize.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "surfcorr/errors.hpp"
#include "surfcorr/rng.hpp"

namespace surfcorr {

namespace {

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

OptimizeResult optimize_embeddings(const Scene& scene,
                                   const GeodesicCache& cache,
                                   const OptimizeConfig& config) {
  if (config.dim < 1) throw ArgError("embedding dimension must be positive");
  if (config.steps < 0) throw ArgError("step count must be nonnegative");
  if (!(config.learning_rate > 0.0)) {
    throw ArgError("learning rate must be positive");
  }
  if (!(config.temperature > 0.0)) throw ArgError("temperature must be positive");
  if (scene.views.empty()) throw ArgError("scene has no views");
  for (const SceneView& view : scene.views) {
    if (view.corrs.entries.empty()) {
      throw ValidationError("view '" + view.image_id + "' has no annotations");
    }
  }

  const int n_views = static_cast<int>(scene.views.size());
  const int n_vertices = static_cast<int>(scene.mesh.vertices.size());

  OptimizeResult result;
  Rng rng = stage_rng(config.seed, "optimize-init");
  const double init_scale = 0.1;
  result.table = VertexEmbeddingTable(n_vertices, config.dim);
  for (int v = 0; v < n_vertices; ++v) {
    for (int d = 0; d < config.dim; ++d) {
      result.table(v, d) = init_scale * rng.normal();
    }
  }
  for (const SceneView& view : scene.views) {
    EmbeddingField field(view.corrs.height, view.corrs.width, config.dim);
    for (const Correspondence& e : view.corrs.entries) {
      field.mask.at(e.pixel) = 1;
      auto pixel = field.at(e.pixel);
      for (int d = 0; d < config.dim; ++d) pixel[d] = init_scale * rng.normal();
    }
    result.fields.push_back(std::move(field));
  }

  // Consistency runs on the cross-view linked pairs only; each link is
  // stored in both views, so the first view's list covers every pair. The
  // same-image term's |d - s| kink makes plain descent non-monotone, so the
  // toy objective leaves it out.
  std::vector<CrossPair> cross_pairs;
  std::vector<SamePair> same_pairs;
  if (n_views == 2) {
    for (const CrossViewLink& link : scene.views[0].corrs.cross_view) {
      if (link.partner_image != scene.views[1].corrs.image_id) continue;
      cross_pairs.push_back({link.pixel, link.partner_pixel});
    }
  }
  const bool use_consistency = !cross_pairs.empty();

  const double w_geo = config.weights.lambda1;
  const double w_cst = config.weights.lambda1 * config.weights.alpha;

  for (int step = 0; step <= config.steps; ++step) {
    double objective = 0.0;
    std::vector<std::vector<double>> grad_fields;
    grad_fields.reserve(n_views);
    for (const EmbeddingField& field : result.fields) {
      grad_fields.emplace_back(field.data.size(), 0.0);
    }
    std::vector<double> grad_table(
        static_cast<std::size_t>(n_vertices) * config.dim, 0.0);

    for (int i = 0; i < n_views; ++i) {
      const LossReport geo = loss_geodesic(
          result.fields[i], result.table, config.temperature,
          scene.views[i].corrs, cache, GeodesicLossMode::kExpected);
      objective += w_geo * geo.value;
      axpy(grad_fields[i], w_geo, geo.gradients.at("field"));
      axpy(grad_table, w_geo, geo.gradients.at("table"));
    }
    if (use_consistency) {
      const LossReport cst =
          loss_consistency(result.fields[0], result.fields[1], cross_pairs,
                           same_pairs, cache, cache.g_max);
      objective += w_cst * cst.value;
      axpy(grad_fields[0], w_cst, cst.gradients.at("field1"));
      axpy(grad_fields[1], w_cst, cst.gradients.at("field2"));
    }

    result.loss_trace.push_back(objective);
    if (!std::isfinite(objective)) {
      result.diverged = true;
      break;
    }
    if (step == config.steps) break;

    for (int i = 0; i < n_views; ++i) {
      axpy(result.fields[i].data, -config.learning_rate, grad_fields[i]);
    }
    for (int v = 0; v < n_vertices; ++v) {
      for (int d = 0; d < config.dim; ++d) {
        result.table(v, d) -=
            config.learning_rate * grad_table[static_cast<std::size_t>(v) * config.dim + d];
      }
    }
  }
  return result;
}

}  // namespace surfcorr
