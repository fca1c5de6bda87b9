#pragma once

#include <cstdint>
#include <vector>

#include "surfcorr/embedding.hpp"
#include "surfcorr/losses.hpp"
#include "surfcorr/scene.hpp"

namespace surfcorr {

struct OptimizeConfig {
  int dim = 64;
  int steps = 500;
  double learning_rate = 5.0;
  double temperature = 0.2;
  std::uint64_t seed = 0;
  LossWeights weights;
};

struct OptimizeResult {
  std::vector<EmbeddingField> fields;  // one per scene view
  VertexEmbeddingTable table;
  std::vector<double> loss_trace;  // objective before each step + final
  bool diverged = false;
};

// Plain gradient descent on lambda1 * (expected-mode geodesic loss + alpha *
// consistency loss over the cross-view linked pairs) over the per-pixel
// embeddings of every view and the shared vertex table. Annotated pixels
// only; deterministic under seed. Divergence (non-finite objective) stops
// early with diverged set.
OptimizeResult optimize_embeddings(const Scene& scene,
                                   const GeodesicCache& cache,
                                   const OptimizeConfig& config);

}  // namespace surfcorr
