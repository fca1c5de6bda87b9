#include "surfcorr/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "surfcorr/errors.hpp"
#include "surfcorr/io_util.hpp"
#include "surfcorr/rng.hpp"

namespace surfcorr {

Camera Camera::scaled_orthographic(double sx, double sy, double tx_, double ty_) {
  if (!(sx > 0.0) || !(sy > 0.0)) throw ArgError("camera scale must be positive");
  Camera cam;
  cam.model = Model::kScaledOrthographic;
  cam.scale_x = sx;
  cam.scale_y = sy;
  cam.tx = tx_;
  cam.ty = ty_;
  return cam;
}

Camera Camera::pinhole(double fx_, double fy_, double cx_, double cy_,
                       const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation) {
  if (!(fx_ > 0.0) || !(fy_ > 0.0)) throw ArgError("focal length must be positive");
  Camera cam;
  cam.model = Model::kPinhole;
  cam.fx = fx_;
  cam.fy = fy_;
  cam.cx = cx_;
  cam.cy = cy_;
  cam.rotation = rotation;
  cam.translation = translation;
  return cam;
}

std::vector<ProjectedVertex> project_vertices(const TriangleMesh& mesh,
                                              const Camera& camera, int height,
                                              int width) {
  if (height <= 0 || width <= 0) throw ArgError("image size must be positive");
  std::vector<ProjectedVertex> out(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Eigen::Vector3d& v = mesh.vertices[i];
    double col = 0.0, row = 0.0, depth = 0.0;
    bool in_front = true;
    if (camera.model == Camera::Model::kScaledOrthographic) {
      col = camera.scale_x * v.x() + camera.tx;
      row = camera.scale_y * v.y() + camera.ty;
      depth = v.z();
    } else {
      const Eigen::Vector3d p = camera.rotation * v + camera.translation;
      depth = p.z();
      in_front = depth > 0.0;
      if (in_front) {
        col = camera.fx * p.x() / p.z() + camera.cx;
        row = camera.fy * p.y() / p.z() + camera.cy;
      }
    }
    ProjectedVertex& pv = out[i];
    pv.depth = depth;
    if (!in_front) {
      pv.pixel = {-1, -1};
      pv.visible = false;
      continue;
    }
    pv.pixel = {static_cast<int>(std::lround(row)),
                static_cast<int>(std::lround(col))};
    pv.visible = pv.pixel.row >= 0 && pv.pixel.row < height &&
                 pv.pixel.col >= 0 && pv.pixel.col < width;
  }
  return out;
}

CorrespondenceSet generate_pseudo_correspondences(
    const TriangleMesh& mesh, const Camera& camera, const Mask& mask,
    int count_lo, int count_hi, std::uint64_t seed, const std::string& image_id,
    int person_id, int camera_id, int clothes_id) {
  if (count_lo < 1 || count_hi < count_lo) {
    throw ArgError("correspondence count range is empty");
  }
  bool mask_nonempty = false;
  for (const std::uint8_t m : mask.data) mask_nonempty |= (m != 0);
  if (!mask_nonempty) throw ValidationError("foreground mask is empty");

  const auto projected = project_vertices(mesh, camera, mask.height, mask.width);

  // Z-buffer: per pixel, the nearest vertex wins; ties go to the lower index.
  std::map<Pixel, int> winner;
  for (int i = 0; i < static_cast<int>(projected.size()); ++i) {
    const ProjectedVertex& pv = projected[i];
    if (!pv.visible) continue;
    if (mask.at(pv.pixel) == 0) continue;
    const auto [it, inserted] = winner.try_emplace(pv.pixel, i);
    if (!inserted && pv.depth < projected[it->second].depth) {
      it->second = i;
    }
  }

  std::vector<Correspondence> candidates;
  candidates.reserve(winner.size());
  for (const auto& [pixel, vertex] : winner) {
    candidates.push_back({pixel, vertex});
  }

  Rng rng = stage_rng(seed, "pseudo-corr/" + image_id);
  const int count = rng.uniform_int(count_lo, count_hi);
  if (static_cast<int>(candidates.size()) < count) {
    throw ValidationError(
        "only " + std::to_string(candidates.size()) +
        " candidate pixels available for " + std::to_string(count) +
        " requested correspondences");
  }

  std::vector<int> picks = rng.sample_without_replacement(
      static_cast<int>(candidates.size()), count);
  std::sort(picks.begin(), picks.end());

  CorrespondenceSet set;
  set.image_id = image_id;
  set.height = mask.height;
  set.width = mask.width;
  set.person_id = person_id;
  set.camera_id = camera_id;
  set.clothes_id = clothes_id;
  set.entries.reserve(picks.size());
  for (const int idx : picks) set.entries.push_back(candidates[idx]);
  return set;
}

std::vector<Eigen::Vector2d> kmeans(const std::vector<Eigen::Vector2d>& points,
                                    int k, std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (k < 1) throw ArgError("k must be at least 1");
  if (k > n) throw ArgError("k exceeds the number of points");

  Rng rng = stage_rng(seed, "kmeans");
  std::vector<Eigen::Vector2d> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.below(static_cast<std::uint64_t>(n))]);
  std::vector<double> sq(n, 0.0);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) {
        best = std::min(best, (points[i] - c).squaredNorm());
      }
      sq[i] = best;
      total += best;
    }
    int chosen = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += sq[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.push_back(points[chosen]);
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d = (points[i] - centroids[c]).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      assign[i] = arg;
    }
    double moved = 0.0;
    for (int c = 0; c < k; ++c) {
      Eigen::Vector2d sum = Eigen::Vector2d::Zero();
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (assign[i] == c) {
          sum += points[i];
          ++count;
        }
      }
      if (count == 0) continue;  // empty cluster keeps its centroid
      const Eigen::Vector2d next = sum / count;
      moved = std::max(moved, (next - centroids[c]).norm());
      centroids[c] = next;
    }
    if (moved < 1e-6) break;
  }
  return centroids;
}

std::vector<Pixel> sample_annotation_pixels(const PartMap& parts, int uniform_n,
                                            int k_lo, int k_hi,
                                            std::uint64_t seed) {
  if (uniform_n < 0) throw ArgError("uniform_n must be nonnegative");
  if (k_lo < 1 || k_hi < k_lo) throw ArgError("centroid range is empty");

  std::vector<Pixel> foreground;
  std::map<int, std::vector<Pixel>> by_part;
  for (int r = 0; r < parts.height; ++r) {
    for (int c = 0; c < parts.width; ++c) {
      const int label = parts.at({r, c});
      if (label == 0) continue;
      foreground.push_back({r, c});
      by_part[label].push_back({r, c});
    }
  }
  if (foreground.empty()) throw ValidationError("part map has no foreground");
  if (uniform_n > static_cast<int>(foreground.size())) {
    throw ArgError("uniform_n exceeds the foreground area");
  }

  std::vector<Pixel> out;
  Rng uniform_rng = stage_rng(seed, "annot-uniform");
  for (const int idx : uniform_rng.sample_without_replacement(
           static_cast<int>(foreground.size()), uniform_n)) {
    out.push_back(foreground[idx]);
  }

  for (const auto& [label, pixels] : by_part) {
    const double share =
        static_cast<double>(pixels.size()) / static_cast<double>(foreground.size());
    int k = k_lo + static_cast<int>(std::lround(share * (k_hi - k_lo)));
    k = std::min(k, static_cast<int>(pixels.size()));
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(pixels.size());
    for (const Pixel& p : pixels) {
      pts.emplace_back(static_cast<double>(p.row), static_cast<double>(p.col));
    }
    const auto centroids =
        kmeans(pts, k, fnv1a64("annot-part/" + std::to_string(label)) ^ seed);
    for (const auto& c : centroids) {
      // Snap to the nearest in-part pixel, row-major order breaking ties.
      double best = std::numeric_limits<double>::infinity();
      Pixel snapped = pixels.front();
      for (const Pixel& p : pixels) {
        const double d = (Eigen::Vector2d(p.row, p.col) - c).squaredNorm();
        if (d < best) {
          best = d;
          snapped = p;
        }
      }
      out.push_back(snapped);
    }
  }
  return out;
}

int link_cross_view(CorrespondenceSet& a, CorrespondenceSet& b, int n) {
  if (a.person_id != b.person_id) {
    throw ArgError("cross-view linking requires a shared person id");
  }
  if (n <= 0) return 0;
  std::map<int, Pixel> in_a, in_b;
  for (const Correspondence& e : a.entries) in_a.try_emplace(e.vertex, e.pixel);
  for (const Correspondence& e : b.entries) in_b.try_emplace(e.vertex, e.pixel);

  int made = 0;
  for (const auto& [vertex, pixel_a] : in_a) {
    if (made == n) break;
    const auto it = in_b.find(vertex);
    if (it == in_b.end()) continue;
    a.cross_view.push_back({pixel_a, b.image_id, it->second});
    b.cross_view.push_back({it->second, a.image_id, pixel_a});
    ++made;
  }
  return made;
}

std::string corr_to_json_line(const CorrespondenceSet& set) {
  nlohmann::ordered_json j;
  j["image"] = set.image_id;
  j["h"] = set.height;
  j["w"] = set.width;
  j["pid"] = set.person_id;
  j["cam"] = set.camera_id;
  j["clothes"] = set.clothes_id;
  auto entries = nlohmann::ordered_json::array();
  for (const Correspondence& e : set.entries) {
    entries.push_back({e.pixel.row, e.pixel.col, e.vertex});
  }
  j["entries"] = std::move(entries);
  auto cross = nlohmann::ordered_json::array();
  for (const CrossViewLink& l : set.cross_view) {
    cross.push_back({l.pixel.row, l.pixel.col, l.partner_image,
                     l.partner_pixel.row, l.partner_pixel.col});
  }
  j["cross_view"] = std::move(cross);
  return j.dump();
}

namespace {

[[noreturn]] void schema_error(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

int require_int(const nlohmann::json& j, const char* key, int line_no) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    schema_error(line_no, std::string("missing or non-integer field '") + key + "'");
  }
  return j[key].get<int>();
}

}  // namespace

CorrespondenceSet corr_from_json_line(const std::string& line, int line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    schema_error(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) schema_error(line_no, "record is not an object");
  if (!j.contains("image") || !j["image"].is_string()) {
    schema_error(line_no, "missing or non-string field 'image'");
  }

  CorrespondenceSet set;
  set.image_id = j["image"].get<std::string>();
  set.height = require_int(j, "h", line_no);
  set.width = require_int(j, "w", line_no);
  set.person_id = require_int(j, "pid", line_no);
  set.camera_id = require_int(j, "cam", line_no);
  set.clothes_id = require_int(j, "clothes", line_no);
  if (set.height <= 0 || set.width <= 0) {
    schema_error(line_no, "image size must be positive");
  }

  if (!j.contains("entries") || !j["entries"].is_array()) {
    schema_error(line_no, "missing or non-array field 'entries'");
  }
  for (const auto& e : j["entries"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || !e[2].is_number_integer()) {
      schema_error(line_no, "entry is not a [row, col, vertex] integer triple");
    }
    Correspondence c{{e[0].get<int>(), e[1].get<int>()}, e[2].get<int>()};
    if (c.pixel.row < 0 || c.pixel.row >= set.height || c.pixel.col < 0 ||
        c.pixel.col >= set.width) {
      schema_error(line_no, "entry pixel outside the image");
    }
    if (c.vertex < 0) schema_error(line_no, "entry vertex is negative");
    set.entries.push_back(c);
  }

  if (!j.contains("cross_view") || !j["cross_view"].is_array()) {
    schema_error(line_no, "missing or non-array field 'cross_view'");
  }
  for (const auto& l : j["cross_view"]) {
    if (!l.is_array() || l.size() != 5 || !l[0].is_number_integer() ||
        !l[1].is_number_integer() || !l[2].is_string() ||
        !l[3].is_number_integer() || !l[4].is_number_integer()) {
      schema_error(line_no,
                   "cross_view link is not [row, col, image, row2, col2]");
    }
    set.cross_view.push_back({{l[0].get<int>(), l[1].get<int>()},
                              l[2].get<std::string>(),
                              {l[3].get<int>(), l[4].get<int>()}});
  }
  return set;
}

void write_corrs(const std::vector<CorrespondenceSet>& sets,
                 const std::string& path) {
  atomic_write(path, [&](std::ostream& out) {
    for (const CorrespondenceSet& set : sets) {
      out << corr_to_json_line(set) << '\n';
    }
  });
}

void for_each_corr(const std::string& path,
                   const std::function<void(CorrespondenceSet&&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open correspondence file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    fn(corr_from_json_line(line, line_no));
  }
}

std::vector<CorrespondenceSet> read_corrs(const std::string& path) {
  std::vector<CorrespondenceSet> sets;
  for_each_corr(path, [&](CorrespondenceSet&& set) {
    sets.push_back(std::move(set));
  });
  return sets;
}

}  // namespace surfcorr
