#include "surfcorr/embedding.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include "surfcorr/errors.hpp"
#include "surfcorr/io_util.hpp"
#include "surfcorr/tensor_io.hpp"

namespace surfcorr {

void validate_field(const EmbeddingField& field) {
  if (field.height <= 0 || field.width <= 0 || field.dim < 1) {
    throw ValidationError("embedding field has empty dimensions");
  }
  const std::size_t expect =
      static_cast<std::size_t>(field.height) * field.width * field.dim;
  if (field.data.size() != expect) {
    throw ValidationError("embedding field payload size mismatch");
  }
  if (field.mask.height != field.height || field.mask.width != field.width) {
    throw ValidationError("embedding field mask size mismatch");
  }
  for (const double v : field.data) {
    if (!std::isfinite(v)) throw ValidationError("embedding field has non-finite values");
  }
}

void validate_table(const VertexEmbeddingTable& table, int vertex_count) {
  if (table.rows() == 0 || table.cols() == 0) {
    throw ValidationError("vertex table is empty");
  }
  if (vertex_count >= 0 && table.rows() != vertex_count) {
    throw ValidationError("vertex table row count does not match the mesh");
  }
  if (!table.allFinite()) {
    throw ValidationError("vertex table has non-finite values");
  }
}

Eigen::VectorXd classify_pixel(const EmbeddingField& field, Pixel p,
                               const VertexEmbeddingTable& table,
                               double temperature) {
  if (!(temperature > 0.0)) throw ArgError("temperature must be positive");
  if (!field.mask.in_bounds(p) || field.mask.at(p) == 0) {
    throw ArgError("pixel outside the foreground mask");
  }
  Eigen::VectorXd logits = table * field.at(p) / temperature;
  const double mx = logits.maxCoeff();
  Eigen::VectorXd probs = (logits.array() - mx).exp();
  probs /= probs.sum();
  return probs;
}

VertexMap predict_vertices(const EmbeddingField& field,
                           const VertexEmbeddingTable& table) {
  VertexMap out(field.height, field.width, -1);
  for (int r = 0; r < field.height; ++r) {
    for (int c = 0; c < field.width; ++c) {
      const Pixel p{r, c};
      if (field.mask.at(p) == 0) continue;
      const Eigen::VectorXd logits = table * field.at(p);
      int best = 0;
      double best_logit = logits[0];
      for (int v = 1; v < logits.size(); ++v) {
        if (logits[v] > best_logit) {
          best_logit = logits[v];
          best = v;
        }
      }
      out.at(p) = best;
    }
  }
  return out;
}

double cosine_distance(const Eigen::VectorXd& e1, const Eigen::VectorXd& e2) {
  const double n1 = e1.norm();
  const double n2 = e2.norm();
  if (n1 == 0.0 || n2 == 0.0) {
    throw ArgError("cosine distance of a zero-norm vector");
  }
  const double cos = std::clamp(e1.dot(e2) / (n1 * n2), -1.0, 1.0);
  return 1.0 - cos;
}

PcaProjection pca_project(const EmbeddingField& field) {
  validate_field(field);
  std::vector<Pixel> pixels;
  for (int r = 0; r < field.height; ++r) {
    for (int c = 0; c < field.width; ++c) {
      if (field.mask.at({r, c}) != 0) pixels.push_back({r, c});
    }
  }
  const int n = static_cast<int>(pixels.size());
  const int d = field.dim;
  if (n < 3) throw ValidationError("PCA needs at least 3 masked pixels");

  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i) x.row(i) = field.at(pixels[i]).transpose();
  const Eigen::VectorXd mean = x.colwise().mean();
  x.rowwise() -= mean.transpose();
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Ascending eigenvalues; take the top three.
  PcaProjection out;
  out.basis = Eigen::MatrixXd::Zero(d, 3);
  out.mean = mean;
  out.explained_variance.setZero();
  const double lead = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double cutoff = lead * 1e-12;
  out.rank = 0;
  for (int k = 0; k < 3 && k < d; ++k) {
    const int idx = d - 1 - k;
    const double lambda = eig.eigenvalues()[idx];
    if (lambda <= cutoff || lambda <= 0.0) break;
    Eigen::VectorXd col = eig.eigenvectors().col(idx);
    int big = 0;
    for (int j = 1; j < d; ++j) {
      if (std::abs(col[j]) > std::abs(col[big])) big = j;
    }
    if (col[big] < 0.0) col = -col;
    out.basis.col(k) = col;
    out.explained_variance[k] = lambda;
    ++out.rank;
  }

  out.scores.assign(static_cast<std::size_t>(field.height) * field.width * 3, 0.0);
  out.image.assign(out.scores.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d s =
        out.basis.transpose() * (field.at(pixels[i]) - mean);
    const std::size_t base =
        (static_cast<std::size_t>(pixels[i].row) * field.width + pixels[i].col) * 3;
    for (int k = 0; k < 3; ++k) out.scores[base + k] = s[k];
  }
  for (int k = 0; k < 3; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Pixel& p : pixels) {
      const double v =
          out.scores[(static_cast<std::size_t>(p.row) * field.width + p.col) * 3 + k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double span = hi - lo;
    for (const Pixel& p : pixels) {
      const std::size_t at =
          (static_cast<std::size_t>(p.row) * field.width + p.col) * 3 + k;
      out.image[at] = span > 0.0 ? (out.scores[at] - lo) / span : 0.0;
    }
  }
  return out;
}

namespace {
constexpr char kFieldMagic[5] = "SCFD";
constexpr std::uint32_t kFieldVersion = 1;
}  // namespace

void save_field(const EmbeddingField& field, const std::string& path) {
  validate_field(field);
  atomic_write(path, [&](std::ostream& out) {
    write_magic(out, kFieldMagic);
    write_u32(out, kFieldVersion);
    write_u32(out, static_cast<std::uint32_t>(field.height));
    write_u32(out, static_cast<std::uint32_t>(field.width));
    write_u32(out, static_cast<std::uint32_t>(field.dim));
    for (const double v : field.data) write_f32(out, static_cast<float>(v));
    for (const std::uint8_t m : field.mask.data) {
      out.put(m ? '\1' : '\0');
    }
  });
}

EmbeddingField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open field file: " + path);
  expect_magic(in, kFieldMagic, "field file");
  const std::uint32_t version = read_u32(in, "field file");
  if (version != kFieldVersion) {
    throw ParseError("unsupported field file version");
  }
  const int h = static_cast<int>(read_u32(in, "field file"));
  const int w = static_cast<int>(read_u32(in, "field file"));
  const int d = static_cast<int>(read_u32(in, "field file"));
  if (h <= 0 || w <= 0 || d <= 0) throw ParseError("field file has empty dimensions");
  EmbeddingField field(h, w, d);
  for (double& v : field.data) v = read_f32(in, "field file");
  for (std::uint8_t& m : field.mask.data) {
    const int ch = in.get();
    if (ch == EOF) throw ParseError("field file truncated in mask");
    m = ch ? 1 : 0;
  }
  return field;
}

void write_ppm(const std::vector<double>& rgb, const Mask& mask,
               const std::string& path) {
  const std::size_t expect =
      static_cast<std::size_t>(mask.height) * mask.width * 3;
  if (rgb.size() != expect) throw ArgError("rgb size does not match the mask");
  std::vector<std::uint8_t> bytes(expect, 0);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at({r, c}) == 0) continue;
      const std::size_t base = (static_cast<std::size_t>(r) * mask.width + c) * 3;
      for (int k = 0; k < 3; ++k) {
        const double v = std::clamp(rgb[base + k], 0.0, 1.0);
        bytes[base + k] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  write_ppm(mask.height, mask.width, bytes, path);
}

}  // namespace surfcorr
