#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <string>
#include <vector>

#include "surfcorr/cli.hpp"
#include "surfcorr/correspondence.hpp"
#include "surfcorr/fusion.hpp"
#include "surfcorr/geodesics.hpp"
#include "surfcorr/losses.hpp"
#include "surfcorr/mesh.hpp"
#include "surfcorr/metrics.hpp"
#include "surfcorr/scene.hpp"

namespace py = pybind11;
using namespace surfcorr;

namespace {

TriangleMesh mesh_from_arrays(const Eigen::MatrixXd& vertices,
                              const Eigen::MatrixXi& faces) {
  if (vertices.cols() != 3) throw ArgError("vertices must be (V, 3)");
  if (faces.cols() != 3) throw ArgError("faces must be (F, 3)");
  TriangleMesh mesh;
  mesh.vertices.reserve(vertices.rows());
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    mesh.vertices.emplace_back(vertices(i, 0), vertices(i, 1), vertices(i, 2));
  }
  mesh.faces.reserve(faces.rows());
  for (Eigen::Index i = 0; i < faces.rows(); ++i) {
    mesh.faces.push_back({faces(i, 0), faces(i, 1), faces(i, 2)});
  }
  validate_mesh(mesh);
  return mesh;
}

std::vector<std::vector<double>> matrix_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows[i].resize(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_surfcorr, m) {
  m.doc() = "surface correspondence toolkit";

  py::register_exception<ArgError>(m, "ArgError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv = {"surfcorr"};
        for (const std::string& a : args) argv.push_back(a.c_str());
        const int code = run_cli(static_cast<int>(argv.size()), argv.data());
        // Flush so interleaving with Python-side output stays ordered.
        std::cout.flush();
        std::cerr.flush();
        return code;
      },
      py::arg("args"),
      "Run a toolkit subcommand in-process; returns the exit code "
      "(0 ok, 1 domain error, 2 usage error).");

  m.def(
      "mesh_counts",
      [](const std::string& path) {
        const TriangleMesh mesh = load_mesh(path);
        validate_mesh(mesh);
        const EdgeGraph graph = build_edge_graph(mesh);
        return py::make_tuple(mesh.vertex_count(), mesh.face_count(),
                              graph.edge_count());
      },
      py::arg("path"), "Validate an OBJ file; returns (vertices, faces, edges).");

  m.def(
      "geodesic_matrix",
      [](const Eigen::MatrixXd& vertices, const Eigen::MatrixXi& faces) {
        const TriangleMesh mesh = mesh_from_arrays(vertices, faces);
        const EdgeGraph graph = build_edge_graph(mesh);
        const int n = graph.vertex_count();
        Eigen::MatrixXd out(n, n);
        for (int s = 0; s < n; ++s) {
          const std::vector<double> row = geodesic_from(graph, s);
          for (int j = 0; j < n; ++j) out(s, j) = row[j];
        }
        return out;
      },
      py::arg("vertices"), py::arg("faces"),
      "All-pairs graph-geodesic distances for a triangle mesh.");

  m.def(
      "loss_id",
      [](const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
        const LossReport report = surfcorr::loss_id(logits, labels);
        Eigen::MatrixXd grad(logits.rows(), logits.cols());
        const std::vector<double>& g = report.gradients.at("logits");
        for (Eigen::Index i = 0; i < logits.rows(); ++i)
          for (Eigen::Index j = 0; j < logits.cols(); ++j)
            grad(i, j) = g[i * logits.cols() + j];
        return py::make_tuple(report.value, grad);
      },
      py::arg("logits"), py::arg("labels"),
      "Mean softmax cross-entropy; returns (value, gradient).");

  m.def(
      "loss_triplet",
      [](const Eigen::MatrixXd& features, const std::vector<int>& labels,
         double margin) {
        const LossReport report = surfcorr::loss_triplet(features, labels, margin);
        Eigen::MatrixXd grad(features.rows(), features.cols());
        const std::vector<double>& g = report.gradients.at("features");
        for (Eigen::Index i = 0; i < features.rows(); ++i)
          for (Eigen::Index j = 0; j < features.cols(); ++j)
            grad(i, j) = g[i * features.cols() + j];
        return py::make_tuple(report.value, grad);
      },
      py::arg("features"), py::arg("labels"), py::arg("margin") = 0.3,
      "Batch-hard triplet loss; returns (value, subgradient).");

  m.def(
      "mha",
      [](const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
         const Eigen::MatrixXd& v, int heads, const Eigen::MatrixXd& out_proj) {
        return surfcorr::mha(q, k, v, heads, out_proj);
      },
      py::arg("q"), py::arg("k"), py::arg("v"), py::arg("heads"),
      py::arg("out_proj"),
      "Multi-head scaled dot-product attention over token rows.");

  m.def(
      "reid_eval",
      [](const Eigen::MatrixXd& query_features,
         const std::vector<int>& query_pids, const std::vector<int>& query_cams,
         const std::vector<int>& query_clothes,
         const Eigen::MatrixXd& gallery_features,
         const std::vector<int>& gallery_pids,
         const std::vector<int>& gallery_cams,
         const std::vector<int>& gallery_clothes, const std::string& protocol,
         int max_rank) {
        RetrievalInstance inst;
        inst.query_features = matrix_rows(query_features);
        inst.query_pids = query_pids;
        inst.query_cams = query_cams;
        inst.query_clothes = query_clothes;
        inst.gallery_features = matrix_rows(gallery_features);
        inst.gallery_pids = gallery_pids;
        inst.gallery_cams = gallery_cams;
        inst.gallery_clothes = gallery_clothes;
        const ReidResult r =
            surfcorr::reid_eval(inst, protocol_from_string(protocol), max_rank);
        py::dict out;
        out["mean_ap"] = r.mean_ap;
        out["cmc"] = r.cmc;
        out["queries_evaluated"] = r.queries_evaluated;
        out["queries_skipped"] = r.queries_skipped;
        return out;
      },
      py::arg("query_features"), py::arg("query_pids"), py::arg("query_cams"),
      py::arg("query_clothes"), py::arg("gallery_features"),
      py::arg("gallery_pids"), py::arg("gallery_cams"),
      py::arg("gallery_clothes"), py::arg("protocol") = "standard",
      py::arg("max_rank") = 10,
      "Retrieval evaluation; returns {mean_ap, cmc, queries_evaluated, "
      "queries_skipped}.");

  m.def(
      "make_scene",
      [](const std::string& kind, std::uint64_t seed, const std::string& out) {
        const Scene scene = make_scene(kind, seed);
        save_scene(scene, out);
        std::size_t entries = 0;
        for (const SceneView& view : scene.views)
          entries += view.corrs.entries.size();
        py::dict info;
        info["views"] = scene.views.size();
        info["vertices"] = scene.mesh.vertices.size();
        info["entries"] = entries;
        info["links"] = scene.views[0].corrs.cross_view.size();
        return info;
      },
      py::arg("kind"), py::arg("seed"), py::arg("out"),
      "Write a synthetic scene directory; returns its shape summary.");
}
