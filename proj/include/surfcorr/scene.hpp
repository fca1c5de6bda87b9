#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surfcorr/correspondence.hpp"
#include "surfcorr/grid.hpp"
#include "surfcorr/mesh.hpp"

namespace surfcorr {

// One rendered viewpoint: camera, foreground mask, and the generated
// pixel-to-vertex annotations (with cross-view links into the other view).
struct SceneView {
  std::string image_id;
  Camera camera;
  Mask mask;
  CorrespondenceSet corrs;
};

struct Scene {
  TriangleMesh mesh;
  std::vector<SceneView> views;
};

// Two pinhole views of a subdivided icosphere; annotations from the
// z-buffer generator plus mutual cross-view links.
Scene make_sphere_scene(std::uint64_t seed);

// Two orthographic views of a planar grid mesh; flat geometry keeps every
// vertex visible in both views.
Scene make_twoview_grid_scene(std::uint64_t seed);

Scene make_scene(const std::string& kind, std::uint64_t seed);

// Directory layout: mesh.obj, view<i>.cam, view<i>_mask.pgm, corrs.jsonl.
void save_scene(const Scene& scene, const std::string& dir);
Scene load_scene(const std::string& dir);

// Key=value camera file used by save_scene/load_scene.
void save_camera(const Camera& camera, const std::string& path);
Camera load_camera(const std::string& path);

}  // namespace surfcorr
