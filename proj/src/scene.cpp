#include "surfcorr/scene.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "surfcorr/errors.hpp"
#include "surfcorr/io_util.hpp"
#include "surfcorr/tensor_io.hpp"

namespace surfcorr {

namespace {

// Filled with 1, the value the PGM reader normalizes to, so a saved and
// reloaded scene compares equal to the constructed one.
Mask full_mask(int height, int width) {
  Mask mask(height, width, std::uint8_t{1});
  return mask;
}

SceneView make_view(const TriangleMesh& mesh, const Camera& camera,
                    int height, int width, std::uint64_t seed,
                    const std::string& image_id, int camera_id) {
  SceneView view;
  view.image_id = image_id;
  view.camera = camera;
  view.mask = full_mask(height, width);
  view.corrs = generate_pseudo_correspondences(mesh, camera, view.mask, 80, 125,
                                               seed, image_id,
                                               /*person_id=*/1, camera_id,
                                               /*clothes_id=*/0);
  return view;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Scene make_sphere_scene(std::uint64_t seed) {
  Scene scene;
  scene.mesh = make_icosphere(2);
  // Radius well under the GPS kernel width, so near-miss predictions a ring
  // or two away still score; the unit sphere would zero them out.
  const double radius = 0.4;
  for (Eigen::Vector3d& v : scene.mesh.vertices) v *= radius;

  const int size = 96;
  const double f = 240.0, c = 48.0;
  const Eigen::Vector3d t(0.0, 0.0, 3.0);

  // Second view rotated about the vertical axis; the angle keeps a wide
  // band of vertices winning the z-buffer in both views so cross-view
  // links are plentiful at any sampling seed.
  const double angle = 0.7;
  Eigen::Matrix3d r1;
  r1 << std::cos(angle), 0.0, std::sin(angle),
        0.0, 1.0, 0.0,
        -std::sin(angle), 0.0, std::cos(angle);

  scene.views.push_back(make_view(
      scene.mesh, Camera::pinhole(f, f, c, c, Eigen::Matrix3d::Identity(), t),
      size, size, seed, "sphere-v0", 0));
  scene.views.push_back(make_view(scene.mesh,
                                  Camera::pinhole(f, f, c, c, r1, t), size,
                                  size, seed, "sphere-v1", 1));
  link_cross_view(scene.views[0].corrs, scene.views[1].corrs, 10);
  return scene;
}

Scene make_twoview_grid_scene(std::uint64_t seed) {
  Scene scene;
  scene.mesh = make_grid(12);

  // Every grid vertex lands on its own in-bounds pixel in both views, so
  // each view has all 144 candidates and any two draws of at least 80
  // entries share at least 16 vertices, enough for the 10 links.
  const int size = 96;
  const Camera cam0 = Camera::scaled_orthographic(7.0, 7.0, 6.0, 6.0);
  const Camera cam1 = Camera::scaled_orthographic(6.0, 6.0, 14.0, 12.0);

  scene.views.push_back(
      make_view(scene.mesh, cam0, size, size, seed, "grid-v0", 0));
  scene.views.push_back(
      make_view(scene.mesh, cam1, size, size, seed, "grid-v1", 1));
  link_cross_view(scene.views[0].corrs, scene.views[1].corrs, 10);
  return scene;
}

Scene make_scene(const std::string& kind, std::uint64_t seed) {
  if (kind == "sphere") return make_sphere_scene(seed);
  if (kind == "twoview-grid") return make_twoview_grid_scene(seed);
  throw ArgError("unknown scene kind '" + kind +
                 "' (expected sphere or twoview-grid)");
}

void save_camera(const Camera& camera, const std::string& path) {
  atomic_write(path, [&](std::ostream& out) {
    if (camera.model == Camera::Model::kScaledOrthographic) {
      out << "model=scaled-orthographic\n";
      out << "scale_x=" << format_double(camera.scale_x) << "\n";
      out << "scale_y=" << format_double(camera.scale_y) << "\n";
      out << "tx=" << format_double(camera.tx) << "\n";
      out << "ty=" << format_double(camera.ty) << "\n";
      return;
    }
    out << "model=pinhole\n";
    out << "fx=" << format_double(camera.fx) << "\n";
    out << "fy=" << format_double(camera.fy) << "\n";
    out << "cx=" << format_double(camera.cx) << "\n";
    out << "cy=" << format_double(camera.cy) << "\n";
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        out << "r" << i << j << "=" << format_double(camera.rotation(i, j))
            << "\n";
      }
    }
    for (int i = 0; i < 3; ++i) {
      out << "t" << i << "=" << format_double(camera.translation[i]) << "\n";
    }
  });
}

Camera load_camera(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open camera file: " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw ParseError(path + ": missing camera key '" + key + "'");
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(it->second, &used);
    } catch (const std::exception&) {
      throw ParseError(path + ": bad number for '" + key + "'");
    }
    if (used != it->second.size()) {
      throw ParseError(path + ": bad number for '" + key + "'");
    }
    return value;
  };

  const auto model_it = kv.find("model");
  if (model_it == kv.end()) throw ParseError(path + ": missing camera model");
  if (model_it->second == "scaled-orthographic") {
    return Camera::scaled_orthographic(get("scale_x"), get("scale_y"),
                                       get("tx"), get("ty"));
  }
  if (model_it->second != "pinhole") {
    throw ParseError(path + ": unknown camera model '" + model_it->second +
                     "'");
  }
  Eigen::Matrix3d rotation;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      rotation(i, j) =
          get("r" + std::to_string(i) + std::to_string(j));
    }
  }
  const Eigen::Vector3d translation(get("t0"), get("t1"), get("t2"));
  return Camera::pinhole(get("fx"), get("fy"), get("cx"), get("cy"), rotation,
                         translation);
}

void save_scene(const Scene& scene, const std::string& dir) {
  if (scene.views.empty()) throw ArgError("scene has no views");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create scene directory: " + dir);

  write_mesh(scene.mesh, dir + "/mesh.obj");
  std::vector<CorrespondenceSet> sets;
  sets.reserve(scene.views.size());
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    const SceneView& view = scene.views[i];
    const std::string stem = dir + "/view" + std::to_string(i);
    save_camera(view.camera, stem + ".cam");
    write_pgm_mask(view.mask, stem + "_mask.pgm");
    sets.push_back(view.corrs);
  }
  write_corrs(sets, dir + "/corrs.jsonl");
}

Scene load_scene(const std::string& dir) {
  Scene scene;
  scene.mesh = load_mesh(dir + "/mesh.obj");
  const std::vector<CorrespondenceSet> sets = read_corrs(dir + "/corrs.jsonl");
  if (sets.empty()) throw ParseError("scene has no correspondence sets: " + dir);

  for (std::size_t i = 0; i < sets.size(); ++i) {
    const std::string stem = dir + "/view" + std::to_string(i);
    SceneView view;
    view.image_id = sets[i].image_id;
    view.camera = load_camera(stem + ".cam");
    view.mask = read_pgm_mask(stem + "_mask.pgm");
    view.corrs = sets[i];
    if (view.mask.height != view.corrs.height ||
        view.mask.width != view.corrs.width) {
      throw ParseError("mask size disagrees with annotations for view " +
                       std::to_string(i));
    }
    scene.views.push_back(std::move(view));
  }
  if (std::filesystem::exists(dir + "/view" +
                              std::to_string(sets.size()) + ".cam")) {
    throw ParseError("more camera files than correspondence sets in " + dir);
  }
  return scene;
}

}  // namespace surfcorr
