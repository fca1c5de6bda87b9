#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "surfcorr/grid.hpp"

namespace surfcorr {

// Per-pixel continuous surface embeddings with a foreground mask.
// data is pixel-major: ((row*width + col)*dim + d).
struct EmbeddingField {
  int height = 0, width = 0, dim = 0;
  std::vector<double> data;
  Mask mask;

  EmbeddingField() = default;
  EmbeddingField(int h, int w, int d)
      : height(h), width(w), dim(d),
        data(static_cast<std::size_t>(h) * w * d, 0.0), mask(h, w, 0) {}

  Eigen::Map<const Eigen::VectorXd> at(Pixel p) const {
    return {data.data() + (static_cast<std::size_t>(p.row) * width + p.col) * dim,
            dim};
  }
  Eigen::Map<Eigen::VectorXd> at(Pixel p) {
    return {data.data() + (static_cast<std::size_t>(p.row) * width + p.col) * dim,
            dim};
  }
};

// One embedding row per mesh vertex; logits for pixel-to-vertex
// classification are inner products against these rows.
using VertexEmbeddingTable = Eigen::MatrixXd;  // |V| × D

void validate_field(const EmbeddingField& field);
void validate_table(const VertexEmbeddingTable& table, int vertex_count = -1);

// softmax over (field(p) · table_row / temperature); sums to 1.
Eigen::VectorXd classify_pixel(const EmbeddingField& field, Pixel p,
                               const VertexEmbeddingTable& table,
                               double temperature);

// Per-pixel argmax vertex for masked pixels (-1 elsewhere); ties break to the
// lower vertex index.
VertexMap predict_vertices(const EmbeddingField& field,
                           const VertexEmbeddingTable& table);

// 1 − cos(e1, e2), in [0, 2]. Zero-norm inputs are an error.
double cosine_distance(const Eigen::VectorXd& e1, const Eigen::VectorXd& e2);

struct PcaProjection {
  // Raw component scores per pixel (H×W×3 pixel-major; zero off-mask).
  std::vector<double> scores;
  // Min-max scaled to [0,1] per channel over masked pixels, for image export.
  std::vector<double> image;
  Eigen::MatrixXd basis;   // D×3, orthonormal columns
  Eigen::VectorXd mean;    // D
  Eigen::Vector3d explained_variance;
  int rank = 3;            // < 3 when the masked covariance is degenerate
};

// Principal components of the masked pixel embeddings. Sign convention: the
// largest-magnitude coefficient of each basis column is positive. A rank
// deficit pads the missing channels with zeros and lowers `rank`.
PcaProjection pca_project(const EmbeddingField& field);

// Binary field container: magic, version, H, W, D, f32 payload, mask bitmap.
void save_field(const EmbeddingField& field, const std::string& path);
EmbeddingField load_field(const std::string& path);

// PPM (P6) export of a [0,1] H×W×3 image; off-mask pixels are black.
void write_ppm(const std::vector<double>& rgb, const Mask& mask,
               const std::string& path);

}  // namespace surfcorr
