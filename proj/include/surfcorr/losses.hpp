#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "surfcorr/correspondence.hpp"
#include "surfcorr/embedding.hpp"
#include "surfcorr/geodesics.hpp"

namespace surfcorr {

// Probabilities inside log terms are clamped to [kProbClamp, 1-kProbClamp].
inline constexpr double kProbClamp = 1e-7;

struct LossWeights {
  double lambda1 = 0.3;   // correspondence block
  double alpha = 5.0;     // consistency inside the block
  double lambda2 = 1.0;   // identity
  double lambda3 = 0.8;   // triplet
  double triplet_margin = 0.3;
};

// Value, analytic gradients for each differentiated input (flat, layouts
// matching the inputs), and named sub-term breakdown.
struct LossReport {
  double value = 0.0;
  std::map<std::string, std::vector<double>> gradients;
  std::map<std::string, double> terms;
};

// Mean binary cross-entropy over all pixels; gradient w.r.t. pred.
LossReport loss_silhouette(const Grid<double>& pred, const Mask& gt);

enum class GeodesicLossMode {
  kLiteral,   // −(1/N) Σ g(v_p, v̂_p)·log p(v̂_p), v̂ = argmax, raw distances
  kExpected,  // (1/N) Σ_p Σ_v p(v)·s(g(v_p, v)) — smooth surrogate
};

// Geodesic-weighted vertex classification loss. Gradients w.r.t. "field"
// (H·W·D, pixel-major) and "table" (|V|·D, vertex-major); the argmax choice
// is treated as locally constant in literal mode.
LossReport loss_geodesic(const EmbeddingField& field,
                         const VertexEmbeddingTable& table, double temperature,
                         const CorrespondenceSet& corrs,
                         const GeodesicCache& cache, GeodesicLossMode mode);

struct CrossPair {
  Pixel p;  // pixel in field 1
  Pixel q;  // pixel in field 2
};
struct SamePair {
  int field_index = 0;  // 0 or 1
  Pixel a, b;
  int vertex_a = 0, vertex_b = 0;
};

// First term pulls cross-view corresponding pixels together; second keeps
// same-image embedding distances tracking scaled geodesic distances.
// Gradients: "field1", "field2". Either pair list may be empty, not both.
LossReport loss_consistency(const EmbeddingField& field1,
                            const EmbeddingField& field2,
                            std::span<const CrossPair> cross_pairs,
                            std::span<const SamePair> same_pairs,
                            const GeodesicCache& cache, double g_max);

// Mean softmax cross-entropy; gradient w.r.t. "logits" (N·C, row-major).
LossReport loss_id(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

// Batch-hard triplet: per anchor, hardest positive minus hardest negative
// Euclidean distance, plus margin, hinged at 0, averaged. Subgradient w.r.t.
// "features" (N·F, row-major).
LossReport loss_triplet(const Eigen::MatrixXd& features,
                        const std::vector<int>& labels, double margin);

// L = sil + λ1·(geo + α·cst) + λ2·id + λ3·tri. Parts keyed "sil", "geo",
// "cst", "id", "tri"; gradients are merged as "<part>/<tensor>" scaled by the
// part's weight.
LossReport loss_total(const std::map<std::string, LossReport>& parts,
                      const LossWeights& w);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int coords_checked = 0;
};

// Central finite differences on up to n_coords randomly sampled coordinates.
// rel error = |analytic − numeric| / max(|numeric|, 1e-4).
GradCheckResult check_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& analytic_grad,
    double step = 1e-5, int n_coords = 100, std::uint64_t seed = 0);

// Deterministic pairwise tree reduction; also the summation used inside the
// loss means.
double pairwise_sum(std::span<const double> values);

}  // namespace surfcorr
