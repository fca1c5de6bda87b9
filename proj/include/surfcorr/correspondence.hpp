#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "surfcorr/grid.hpp"
#include "surfcorr/mesh.hpp"

namespace surfcorr {

struct Correspondence {
  Pixel pixel;
  int vertex = 0;
  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

struct CrossViewLink {
  Pixel pixel;
  std::string partner_image;
  Pixel partner_pixel;
  friend bool operator==(const CrossViewLink&, const CrossViewLink&) = default;
};

// Per-image pixel→vertex annotations plus cross-view pair links.
struct CorrespondenceSet {
  std::string image_id;
  int height = 0, width = 0;
  int person_id = 0, camera_id = 0, clothes_id = 0;
  std::vector<Correspondence> entries;
  std::vector<CrossViewLink> cross_view;
  friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;
};

struct Camera {
  enum class Model { kScaledOrthographic, kPinhole };
  Model model = Model::kScaledOrthographic;

  // scaled orthographic: col = scale_x·X + tx, row = scale_y·Y + ty, depth = Z
  double scale_x = 1.0, scale_y = 1.0, tx = 0.0, ty = 0.0;

  // pinhole: (x,y,z) = R·X + t; col = fx·x/z + cx, row = fy·y/z + cy, depth = z
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Camera scaled_orthographic(double sx, double sy, double tx, double ty);
  static Camera pinhole(double fx, double fy, double cx, double cy,
                        const Eigen::Matrix3d& rotation,
                        const Eigen::Vector3d& translation);
};

struct ProjectedVertex {
  Pixel pixel;
  double depth = 0.0;
  bool visible = false;  // rounded pixel inside the image (and in front, pinhole)
};

// Each vertex mapped to the nearest integer pixel of its projection.
std::vector<ProjectedVertex> project_vertices(const TriangleMesh& mesh,
                                              const Camera& camera, int height,
                                              int width);

// Projection + z-buffer + mask restriction + uniform sample of a count drawn
// from [count_lo, count_hi]. Depth ties break to the lower vertex index.
// Deterministic under (inputs, seed); entries come out sorted by pixel.
CorrespondenceSet generate_pseudo_correspondences(
    const TriangleMesh& mesh, const Camera& camera, const Mask& mask,
    int count_lo, int count_hi, std::uint64_t seed, const std::string& image_id,
    int person_id = 0, int camera_id = 0, int clothes_id = 0);

// Seeded k-means++ initialization, then Lloyd iterations until centroid
// movement < 1e-6 or 100 iterations. The objective never increases.
std::vector<Eigen::Vector2d> kmeans(const std::vector<Eigen::Vector2d>& points,
                                    int k, std::uint64_t seed);

// uniform_n pixels over the union of parts plus per-part k-means centroids,
// k mapped from the part's share of the foreground area into [k_lo, k_hi]
// and each centroid snapped to the nearest in-part pixel.
std::vector<Pixel> sample_annotation_pixels(const PartMap& parts, int uniform_n,
                                            int k_lo, int k_hi,
                                            std::uint64_t seed);

// Links up to n pixel pairs of a and b that map to identical vertex indices,
// lowest vertex indices first. Returns the number of links made.
int link_cross_view(CorrespondenceSet& a, CorrespondenceSet& b, int n);

// JSONL persistence, one image per line. Readers report schema violations
// with their line number.
void write_corrs(const std::vector<CorrespondenceSet>& sets,
                 const std::string& path);
std::vector<CorrespondenceSet> read_corrs(const std::string& path);
// Streaming variant: one set in memory at a time.
void for_each_corr(const std::string& path,
                   const std::function<void(CorrespondenceSet&&)>& fn);

std::string corr_to_json_line(const CorrespondenceSet& set);
CorrespondenceSet corr_from_json_line(const std::string& line, int line_no);

}  // namespace surfcorr
