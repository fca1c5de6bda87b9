#include "surfcorr/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "surfcorr/correspondence.hpp"
#include "surfcorr/embedding.hpp"
#include "surfcorr/errors.hpp"
#include "surfcorr/geodesics.hpp"
#include "surfcorr/io_util.hpp"
#include "surfcorr/losses.hpp"
#include "surfcorr/mesh.hpp"
#include "surfcorr/metrics.hpp"
#include "surfcorr/optimize.hpp"
#include "surfcorr/rng.hpp"
#include "surfcorr/scene.hpp"
#include "surfcorr/tensor_io.hpp"

namespace surfcorr {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_percent(double fraction, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, 100.0 * fraction);
  return buf;
}

void require_input_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw IoError("input file not found: " + path);
  }
}

std::string file_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw ParseError("file too short: " + path);
  return std::string(magic, 4);
}

// ---- mesh validate ----------------------------------------------------

void cmd_mesh_validate(const std::string& path) {
  require_input_file(path);
  const TriangleMesh mesh = load_mesh(path);
  validate_mesh(mesh);
  const EdgeGraph graph = build_edge_graph(mesh);
  std::cout << mesh.vertices.size() << " vertices, " << mesh.faces.size()
            << " faces, " << graph.edge_count() << " edges, OK\n";
}

// ---- geodesic precompute ----------------------------------------------

std::vector<int> parse_sources(const std::string& spec, int vertex_count) {
  std::vector<int> sources;
  if (spec == "all") {
    sources.resize(vertex_count);
    std::iota(sources.begin(), sources.end(), 0);
    return sources;
  }
  require_input_file(spec);
  std::ifstream in(spec);
  int v = 0;
  while (in >> v) sources.push_back(v);
  if (!in.eof()) throw ParseError("source list has non-integer tokens: " + spec);
  if (sources.empty()) throw ValidationError("source list is empty: " + spec);
  return sources;
}

void cmd_geodesic_precompute(const std::string& mesh_path,
                             const std::string& sources_spec,
                             const std::string& out) {
  require_input_file(mesh_path);
  const TriangleMesh mesh = load_mesh(mesh_path);
  validate_mesh(mesh);
  const EdgeGraph graph = build_edge_graph(mesh);
  const std::vector<int> sources = parse_sources(sources_spec, graph.vertex_count());
  const GeodesicCache cache =
      build_cache(graph, sources, mesh_content_hash(mesh));
  save_cache(cache, out);
  std::cout << "cached " << cache.sources.size() << " sources over "
            << cache.vertex_count << " vertices\n";
}

// ---- corr subcommands -------------------------------------------------

struct CorrGenerateArgs {
  std::string mesh, camera, mask, out, image_id = "image0";
  int count_lo = 80, count_hi = 125;
  int person_id = 0, camera_id = 0, clothes_id = 0;
  std::uint64_t seed = 0;
};

void cmd_corr_generate(const CorrGenerateArgs& a) {
  require_input_file(a.mesh);
  require_input_file(a.camera);
  require_input_file(a.mask);
  const TriangleMesh mesh = load_mesh(a.mesh);
  const Camera camera = load_camera(a.camera);
  const Mask mask = read_pgm_mask(a.mask);
  const CorrespondenceSet set = generate_pseudo_correspondences(
      mesh, camera, mask, a.count_lo, a.count_hi, a.seed, a.image_id,
      a.person_id, a.camera_id, a.clothes_id);
  write_corrs({set}, a.out);
  std::cout << set.entries.size() << " entries\n";
}

struct CorrSampleArgs {
  std::string parts, out;
  int uniform_n = 40, k_lo = 5, k_hi = 10;
  std::uint64_t seed = 0;
};

void cmd_corr_sample_annot(const CorrSampleArgs& a) {
  require_input_file(a.parts);
  const PartMap parts = read_pgm_parts(a.parts);
  const std::vector<Pixel> pixels =
      sample_annotation_pixels(parts, a.uniform_n, a.k_lo, a.k_hi, a.seed);
  atomic_write(a.out, [&](std::ostream& os) {
    os << "row,col\n";
    for (const Pixel& p : pixels) os << p.row << "," << p.col << "\n";
  });
  std::cout << pixels.size() << " pixels\n";
}

void cmd_corr_link(const std::string& corrs_path, int n,
                   const std::string& out) {
  require_input_file(corrs_path);
  std::vector<CorrespondenceSet> sets = read_corrs(corrs_path);
  if (sets.size() < 2) {
    throw ValidationError("cross-view linking needs at least two images, got " +
                          std::to_string(sets.size()));
  }
  const int made = link_cross_view(sets[0], sets[1], n);
  write_corrs(sets, out);
  std::cout << made << " links\n";
}

// ---- loss check-grad --------------------------------------------------

GeodesicCache random_cache(int vertex_count, Rng& rng) {
  GeodesicCache cache;
  cache.vertex_count = vertex_count;
  cache.sources.resize(vertex_count);
  std::iota(cache.sources.begin(), cache.sources.end(), 0);
  cache.dist.assign(static_cast<std::size_t>(vertex_count) * vertex_count, 0.0);
  for (int i = 0; i < vertex_count; ++i) {
    for (int j = i + 1; j < vertex_count; ++j) {
      const double g = 0.1 + rng.uniform();
      cache.dist[static_cast<std::size_t>(i) * vertex_count + j] = g;
      cache.dist[static_cast<std::size_t>(j) * vertex_count + i] = g;
    }
  }
  cache.g_max = *std::max_element(cache.dist.begin(), cache.dist.end());
  return cache;
}

EmbeddingField random_field(int h, int w, int dim, Rng& rng) {
  EmbeddingField field(h, w, dim);
  for (auto& v : field.data) v = rng.normal();
  for (auto& m : field.mask.data) m = 1;
  return field;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

double checked_error(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const Eigen::VectorXd& x0,
                     const std::vector<double>& analytic, std::uint64_t seed) {
  return check_gradient(fn, x0, to_vector(analytic), 1e-5, 100, seed)
      .max_rel_error;
}

double check_grad_for(const std::string& which, std::uint64_t seed) {
  Rng rng = stage_rng(seed, "check-grad/" + which);

  if (which == "sil") {
    Grid<double> pred(6, 7, 0.0);
    for (auto& v : pred.data) v = 0.05 + 0.9 * rng.uniform();
    Mask gt(6, 7, 0);
    for (auto& m : gt.data) m = rng.below(2) ? 1 : 0;
    const LossReport report = loss_silhouette(pred, gt);
    auto fn = [&](const Eigen::VectorXd& x) {
      Grid<double> p(6, 7, 0.0);
      for (int i = 0; i < x.size(); ++i) p.data[i] = x[i];
      return loss_silhouette(p, gt).value;
    };
    return checked_error(fn, to_vector(pred.data), report.gradients.at("pred"),
                         seed);
  }

  if (which == "geo") {
    const int dim = 6, nv = 8;
    EmbeddingField field = random_field(4, 5, dim, rng);
    VertexEmbeddingTable table(nv, dim);
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < dim; ++j) table(i, j) = rng.normal();
    const GeodesicCache cache = random_cache(nv, rng);
    CorrespondenceSet corrs;
    corrs.height = 4;
    corrs.width = 5;
    for (int i = 0; i < 8; ++i) {
      corrs.entries.push_back(
          {{static_cast<int>(rng.below(4)), static_cast<int>(rng.below(5))},
           static_cast<int>(rng.below(nv))});
    }
    const LossReport report = loss_geodesic(field, table, 0.7, corrs, cache,
                                            GeodesicLossMode::kExpected);
    auto fn_field = [&](const Eigen::VectorXd& x) {
      EmbeddingField f = field;
      for (int i = 0; i < x.size(); ++i) f.data[i] = x[i];
      return loss_geodesic(f, table, 0.7, corrs, cache,
                           GeodesicLossMode::kExpected)
          .value;
    };
    auto fn_table = [&](const Eigen::VectorXd& x) {
      VertexEmbeddingTable t(nv, dim);
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j < dim; ++j) t(i, j) = x[i * dim + j];
      return loss_geodesic(field, t, 0.7, corrs, cache,
                           GeodesicLossMode::kExpected)
          .value;
    };
    Eigen::VectorXd t0(nv * dim);
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < dim; ++j) t0[i * dim + j] = table(i, j);
    return std::max(checked_error(fn_field, to_vector(field.data),
                                  report.gradients.at("field"), seed),
                    checked_error(fn_table, t0, report.gradients.at("table"),
                                  seed + 1));
  }

  if (which == "cst") {
    const int dim = 6, nv = 8;
    EmbeddingField f1 = random_field(4, 5, dim, rng);
    EmbeddingField f2 = random_field(4, 5, dim, rng);
    const GeodesicCache cache = random_cache(nv, rng);
    std::vector<CrossPair> cross;
    std::vector<SamePair> same;
    for (int i = 0; i < 6; ++i) {
      cross.push_back(
          {{static_cast<int>(rng.below(4)), static_cast<int>(rng.below(5))},
           {static_cast<int>(rng.below(4)), static_cast<int>(rng.below(5))}});
      same.push_back(
          {static_cast<int>(rng.below(2)),
           {static_cast<int>(rng.below(4)), static_cast<int>(rng.below(5))},
           {static_cast<int>(rng.below(4)), static_cast<int>(rng.below(5))},
           static_cast<int>(rng.below(nv)),
           static_cast<int>(rng.below(nv))});
    }
    const LossReport report =
        loss_consistency(f1, f2, cross, same, cache, cache.g_max);
    auto fn1 = [&](const Eigen::VectorXd& x) {
      EmbeddingField f = f1;
      for (int i = 0; i < x.size(); ++i) f.data[i] = x[i];
      return loss_consistency(f, f2, cross, same, cache, cache.g_max).value;
    };
    auto fn2 = [&](const Eigen::VectorXd& x) {
      EmbeddingField f = f2;
      for (int i = 0; i < x.size(); ++i) f.data[i] = x[i];
      return loss_consistency(f1, f, cross, same, cache, cache.g_max).value;
    };
    return std::max(checked_error(fn1, to_vector(f1.data),
                                  report.gradients.at("field1"), seed),
                    checked_error(fn2, to_vector(f2.data),
                                  report.gradients.at("field2"), seed + 1));
  }

  if (which == "id") {
    const int n = 6, classes = 5;
    Eigen::MatrixXd logits(n, classes);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.below(classes));
      for (int j = 0; j < classes; ++j) logits(i, j) = rng.normal();
    }
    const LossReport report = loss_id(logits, labels);
    auto fn = [&](const Eigen::VectorXd& x) {
      Eigen::MatrixXd l(n, classes);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < classes; ++j) l(i, j) = x[i * classes + j];
      return loss_id(l, labels).value;
    };
    Eigen::VectorXd x0(n * classes);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < classes; ++j) x0[i * classes + j] = logits(i, j);
    return checked_error(fn, x0, report.gradients.at("logits"), seed);
  }

  if (which == "tri") {
    const int n = 8, dim = 4;
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2, 0, 1};
    Eigen::MatrixXd features(n, dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < dim; ++j) features(i, j) = rng.normal();
    const LossReport report = loss_triplet(features, labels, 0.3);
    auto fn = [&](const Eigen::VectorXd& x) {
      Eigen::MatrixXd f(n, dim);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) f(i, j) = x[i * dim + j];
      return loss_triplet(f, labels, 0.3).value;
    };
    Eigen::VectorXd x0(n * dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < dim; ++j) x0[i * dim + j] = features(i, j);
    return checked_error(fn, x0, report.gradients.at("features"), seed);
  }

  throw ArgError("unknown loss '" + which +
                 "' (expected geo, cst, sil, id, or tri)");
}

void cmd_loss_check_grad(const std::string& which, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", check_grad_for(which, seed));
  std::cout << "max relative error: " << buf << "\n";
}

// ---- train-toy --------------------------------------------------------

GeodesicCache full_scene_cache(const Scene& scene) {
  const EdgeGraph graph = build_edge_graph(scene.mesh);
  std::vector<int> sources(scene.mesh.vertices.size());
  std::iota(sources.begin(), sources.end(), 0);
  return build_cache(graph, sources, mesh_content_hash(scene.mesh));
}

struct TrainToyArgs {
  std::string scene, out;
  int steps = 500, dim = 64;
  double lr = 5.0, temperature = 0.2;
  double lambda1 = LossWeights{}.lambda1, alpha = LossWeights{}.alpha;
  std::uint64_t seed = 0;
};

void cmd_train_toy(const TrainToyArgs& a) {
  Scene scene;
  if (std::filesystem::is_directory(a.scene)) {
    scene = load_scene(a.scene);
  } else {
    scene = make_scene(a.scene, a.seed);
  }
  const GeodesicCache cache = full_scene_cache(scene);

  OptimizeConfig config;
  config.dim = a.dim;
  config.steps = a.steps;
  config.learning_rate = a.lr;
  config.temperature = a.temperature;
  config.seed = a.seed;
  config.weights.lambda1 = a.lambda1;
  config.weights.alpha = a.alpha;
  const OptimizeResult result = optimize_embeddings(scene, cache, config);

  std::error_code ec;
  std::filesystem::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create output directory: " + a.out);
  for (std::size_t i = 0; i < result.fields.size(); ++i) {
    save_field(result.fields[i],
               a.out + "/field" + std::to_string(i) + ".bin");
    save_vertex_map(predict_vertices(result.fields[i], result.table),
                    a.out + "/" + scene.views[i].corrs.image_id + ".vmap");
  }
  NamedTensor table;
  table.name = "table";
  table.shape = {static_cast<std::uint32_t>(result.table.rows()),
                 static_cast<std::uint32_t>(result.table.cols())};
  for (Eigen::Index r = 0; r < result.table.rows(); ++r)
    for (Eigen::Index c = 0; c < result.table.cols(); ++c)
      table.values.push_back(result.table(r, c));
  save_tensors({table}, a.out + "/table.bin");
  atomic_write(a.out + "/trace.csv", [&](std::ostream& os) {
    os << "step,loss\n";
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
      os << i << "," << fmt17(result.loss_trace[i]) << "\n";
    }
  });

  if (result.diverged) {
    throw ValidationError("toy optimization diverged; trace written to " +
                          a.out + "/trace.csv");
  }
  std::cout << "final loss " << fmt17(result.loss_trace.back()) << "\n";
}

// ---- eval gps ---------------------------------------------------------

struct EvalGpsArgs {
  std::string gt, pred, cache, table;
  double sigma = kGpsSigma;
  double lo = 0.50, hi = 0.95, step = 0.05;
};

VertexMap load_prediction(const std::string& path, const std::string& table) {
  const std::string magic = file_magic(path);
  if (magic == std::string("SCVM")) return load_vertex_map(path);
  if (magic == std::string("SCFD")) {
    if (table.empty()) {
      throw ArgError("a field prediction needs --table to classify pixels");
    }
    require_input_file(table);
    const EmbeddingField field = load_field(path);
    const std::vector<NamedTensor> tensors = load_tensors(table);
    const NamedTensor& t = find_tensor(tensors, "table");
    if (t.shape.size() != 2) throw ParseError("table tensor must be 2-d");
    VertexEmbeddingTable vt(t.shape[0], t.shape[1]);
    for (std::uint32_t r = 0; r < t.shape[0]; ++r)
      for (std::uint32_t c = 0; c < t.shape[1]; ++c)
        vt(r, c) = t.values[static_cast<std::size_t>(r) * t.shape[1] + c];
    return predict_vertices(field, vt);
  }
  throw ParseError("unrecognized prediction file format: " + path);
}

void cmd_eval_gps(const EvalGpsArgs& a) {
  require_input_file(a.gt);
  require_input_file(a.cache);
  const std::vector<CorrespondenceSet> sets = read_corrs(a.gt);
  const GeodesicCache cache = load_cache(a.cache);

  std::vector<std::pair<CorrespondenceSet, std::optional<VertexMap>>> dataset;
  if (std::filesystem::is_directory(a.pred)) {
    for (const CorrespondenceSet& set : sets) {
      const std::string path = a.pred + "/" + set.image_id + ".vmap";
      if (std::filesystem::is_regular_file(path)) {
        dataset.emplace_back(set, load_prediction(path, a.table));
      } else {
        dataset.emplace_back(set, std::nullopt);
      }
    }
  } else {
    require_input_file(a.pred);
    if (sets.size() != 1) {
      throw ArgError(
          "a single prediction file needs a single-image ground truth; pass "
          "a directory of per-image predictions instead");
    }
    dataset.emplace_back(sets[0], load_prediction(a.pred, a.table));
  }

  GpsConfig config;
  config.threshold_lo = a.lo;
  config.threshold_hi = a.hi;
  config.threshold_step = a.step;
  config.sigma = a.sigma;
  const GpsTable table = gps_ap_ar(dataset, cache, config);

  std::cout << "threshold,ap,ar\n";
  char t[16];
  for (const GpsThresholdRow& row : table.rows) {
    std::snprintf(t, sizeof(t), "%.2f", row.threshold);
    std::cout << t << "," << fmt_percent(row.ap, 1) << ","
              << fmt_percent(row.ar, 1) << "\n";
  }
  std::cout << "mean," << fmt_percent(table.mean_ap, 1) << ","
            << fmt_percent(table.mean_ar, 1) << "\n";
}

// ---- eval reid --------------------------------------------------------

struct EvalReidArgs {
  std::string features, labels, protocol = "standard";
  int max_rank = 10;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

void cmd_eval_reid(const EvalReidArgs& a) {
  require_input_file(a.features);
  require_input_file(a.labels);
  const Protocol protocol = protocol_from_string(a.protocol);

  RetrievalInstance instance;
  {
    std::ifstream in(a.labels);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) !=
        std::vector<std::string>{"set", "pid", "cam", "clothes"}) {
      throw ParseError("labels file must start with 'set,pid,cam,clothes': " +
                       a.labels);
    }
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      if (fields.size() != 4) {
        throw ParseError(a.labels + ":" + std::to_string(line_no) +
                         ": expected 4 comma-separated fields");
      }
      int pid = 0, cam = 0, clothes = 0;
      try {
        pid = std::stoi(fields[1]);
        cam = std::stoi(fields[2]);
        clothes = std::stoi(fields[3]);
      } catch (const std::exception&) {
        throw ParseError(a.labels + ":" + std::to_string(line_no) +
                         ": malformed integer label");
      }
      if (fields[0] == "query") {
        instance.query_pids.push_back(pid);
        instance.query_cams.push_back(cam);
        instance.query_clothes.push_back(clothes);
      } else if (fields[0] == "gallery") {
        instance.gallery_pids.push_back(pid);
        instance.gallery_cams.push_back(cam);
        instance.gallery_clothes.push_back(clothes);
      } else {
        throw ParseError(a.labels + ":" + std::to_string(line_no) +
                         ": set must be 'query' or 'gallery'");
      }
    }
  }

  const std::vector<NamedTensor> tensors = load_tensors(a.features);
  auto matrix_rows = [&](const char* name,
                         std::size_t expected) -> std::vector<std::vector<double>> {
    const NamedTensor& t = find_tensor(tensors, name);
    if (t.shape.size() != 2) {
      throw ParseError(std::string(name) + " tensor must be 2-d");
    }
    if (t.shape[0] != expected) {
      throw ValidationError(std::string(name) + " has " +
                            std::to_string(t.shape[0]) + " rows but " +
                            std::to_string(expected) + " label lines");
    }
    std::vector<std::vector<double>> rows(t.shape[0]);
    for (std::uint32_t r = 0; r < t.shape[0]; ++r) {
      rows[r].assign(
          t.values.begin() + static_cast<std::ptrdiff_t>(r) * t.shape[1],
          t.values.begin() + static_cast<std::ptrdiff_t>(r + 1) * t.shape[1]);
    }
    return rows;
  };
  instance.query_features = matrix_rows("query", instance.query_pids.size());
  instance.gallery_features =
      matrix_rows("gallery", instance.gallery_pids.size());

  const ReidResult result = reid_eval(instance, protocol, a.max_rank);
  std::cout << "mAP " << fmt_percent(result.mean_ap, 2) << "\n";
  for (const int k : {1, 5, 10}) {
    if (k <= static_cast<int>(result.cmc.size())) {
      std::cout << "CMC@" << k << " " << fmt_percent(result.cmc[k - 1], 2)
                << "\n";
    }
  }
  std::cout << "evaluated " << result.queries_evaluated << " skipped "
            << result.queries_skipped << "\n";
}

// ---- viz pca ----------------------------------------------------------

void cmd_viz_pca(const std::string& field_path, const std::string& out) {
  require_input_file(field_path);
  const EmbeddingField field = load_field(field_path);
  const PcaProjection projection = pca_project(field);
  write_ppm(projection.image, field.mask, out);
}

// ---- synth-scene ------------------------------------------------------

void cmd_synth_scene(const std::string& kind, std::uint64_t seed,
                     const std::string& out) {
  const Scene scene = make_scene(kind, seed);
  save_scene(scene, out);
  std::size_t entries = 0;
  for (const SceneView& view : scene.views) entries += view.corrs.entries.size();
  std::cout << scene.views.size() << " views, " << entries << " entries, "
            << scene.views[0].corrs.cross_view.size() << " links\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"surface correspondence toolkit"};
  app.require_subcommand(1);
  // Flags beat config-file values beat defaults. Sections inside the file
  // name the subcommand they configure, e.g. [train-toy] or [eval.gps].
  app.set_config("--config", "",
                 "key=value config file; sections name subcommands");
  app.fallthrough();

  // mesh validate
  auto* mesh_cmd = app.add_subcommand("mesh", "mesh inspection");
  mesh_cmd->require_subcommand(1);
  auto* mesh_validate =
      mesh_cmd->add_subcommand("validate", "check a mesh and print counts");
  std::string mesh_path;
  mesh_validate->add_option("path", mesh_path, "OBJ file")->required();

  // geodesic precompute
  auto* geo_cmd = app.add_subcommand("geodesic", "geodesic distance tools");
  geo_cmd->require_subcommand(1);
  auto* geo_pre = geo_cmd->add_subcommand(
      "precompute", "build and save a distance cache");
  std::string geo_mesh, geo_sources = "all", geo_out;
  geo_pre->add_option("--mesh", geo_mesh, "OBJ file")->required();
  geo_pre->add_option("--sources", geo_sources,
                      "'all' or a file of vertex ids");
  geo_pre->add_option("--out", geo_out, "cache file")->required();

  // corr generate | sample-annot | link
  auto* corr_cmd = app.add_subcommand("corr", "pseudo-correspondence tools");
  corr_cmd->require_subcommand(1);
  auto* corr_gen = corr_cmd->add_subcommand(
      "generate", "z-buffer pseudo-correspondences for one image");
  CorrGenerateArgs gen;
  corr_gen->add_option("--mesh", gen.mesh, "OBJ file")->required();
  corr_gen->add_option("--camera", gen.camera, "camera file")->required();
  corr_gen->add_option("--mask", gen.mask, "foreground PGM")->required();
  corr_gen->add_option("--out", gen.out, "output JSONL")->required();
  corr_gen->add_option("--image-id", gen.image_id, "image identifier");
  corr_gen->add_option("--count-lo", gen.count_lo, "minimum entries");
  corr_gen->add_option("--count-hi", gen.count_hi, "maximum entries");
  corr_gen->add_option("--pid", gen.person_id, "person id");
  corr_gen->add_option("--cam", gen.camera_id, "camera id");
  corr_gen->add_option("--clothes", gen.clothes_id, "clothes id");
  corr_gen->add_option("--seed", gen.seed, "rng seed");

  auto* corr_sample = corr_cmd->add_subcommand(
      "sample-annot", "annotation pixels from a part map");
  CorrSampleArgs sample;
  corr_sample->add_option("--parts", sample.parts, "part-label PGM")->required();
  corr_sample->add_option("--out", sample.out, "output CSV")->required();
  corr_sample->add_option("--uniform-n", sample.uniform_n,
                          "uniform sample count");
  corr_sample->add_option("--k-lo", sample.k_lo, "min centroids per part");
  corr_sample->add_option("--k-hi", sample.k_hi, "max centroids per part");
  corr_sample->add_option("--seed", sample.seed, "rng seed");

  auto* corr_link =
      corr_cmd->add_subcommand("link", "link shared vertices across two images");
  std::string link_corrs, link_out;
  int link_n = 10;
  corr_link->add_option("--corrs", link_corrs, "JSONL with two images")
      ->required();
  corr_link->add_option("--n", link_n, "links to make");
  corr_link->add_option("--out", link_out, "output JSONL")->required();

  // loss check-grad
  auto* loss_cmd = app.add_subcommand("loss", "loss utilities");
  loss_cmd->require_subcommand(1);
  auto* loss_check = loss_cmd->add_subcommand(
      "check-grad", "finite-difference check of an analytic gradient");
  std::string which;
  std::uint64_t loss_seed = 0;
  loss_check->add_option("--which", which, "geo|cst|sil|id|tri")->required();
  loss_check->add_option("--seed", loss_seed, "rng seed");

  // train-toy
  auto* train = app.add_subcommand(
      "train-toy", "gradient-descent demo on a synthetic scene");
  TrainToyArgs toy;
  train->add_option("--scene", toy.scene, "scene directory or kind name")
      ->required();
  train->add_option("--out", toy.out, "output directory")->required();
  train->add_option("--steps", toy.steps, "descent steps");
  train->add_option("--lr", toy.lr, "learning rate");
  train->add_option("--dim", toy.dim, "embedding dimension");
  train->add_option("--temperature", toy.temperature, "softmax temperature");
  train->add_option("--lambda1", toy.lambda1, "correspondence block weight");
  train->add_option("--alpha", toy.alpha, "consistency weight inside block");
  train->add_option("--seed", toy.seed, "rng seed");

  // eval gps | reid
  auto* eval_cmd = app.add_subcommand("eval", "metrics");
  eval_cmd->require_subcommand(1);
  auto* eval_gps = eval_cmd->add_subcommand("gps", "geodesic point similarity");
  EvalGpsArgs gps_args;
  eval_gps->add_option("--gt", gps_args.gt, "ground-truth JSONL")->required();
  eval_gps
      ->add_option("--pred", gps_args.pred,
                   "vertex-map/field file, or directory of <image>.vmap")
      ->required();
  eval_gps->add_option("--cache", gps_args.cache, "geodesic cache")->required();
  eval_gps->add_option("--table", gps_args.table,
                       "vertex table tensors (for field predictions)");
  eval_gps->add_option("--sigma", gps_args.sigma, "GPS kernel width");
  eval_gps->add_option("--lo", gps_args.lo, "lowest threshold");
  eval_gps->add_option("--hi", gps_args.hi, "highest threshold");
  eval_gps->add_option("--step", gps_args.step, "threshold step");

  auto* eval_reid = eval_cmd->add_subcommand("reid", "retrieval metrics");
  EvalReidArgs reid_args;
  eval_reid->add_option("--features", reid_args.features,
                        "tensors file with 'query' and 'gallery'")
      ->required();
  eval_reid->add_option("--labels", reid_args.labels,
                        "CSV: set,pid,cam,clothes")
      ->required();
  eval_reid->add_option("--protocol", reid_args.protocol,
                        "standard|cloth-changing|same-clothes");
  eval_reid->add_option("--max-rank", reid_args.max_rank, "CMC depth");

  // viz pca
  auto* viz_cmd = app.add_subcommand("viz", "visualization");
  viz_cmd->require_subcommand(1);
  auto* viz_pca = viz_cmd->add_subcommand("pca", "project a field to RGB");
  std::string viz_field, viz_out;
  viz_pca->add_option("--field", viz_field, "field file")->required();
  viz_pca->add_option("--out", viz_out, "output PPM")->required();

  // synth-scene
  auto* synth = app.add_subcommand("synth-scene", "write a synthetic scene");
  std::string synth_kind, synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("--kind", synth_kind, "sphere|twoview-grid")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (mesh_validate->parsed()) {
      cmd_mesh_validate(mesh_path);
    } else if (geo_pre->parsed()) {
      cmd_geodesic_precompute(geo_mesh, geo_sources, geo_out);
    } else if (corr_gen->parsed()) {
      cmd_corr_generate(gen);
    } else if (corr_sample->parsed()) {
      cmd_corr_sample_annot(sample);
    } else if (corr_link->parsed()) {
      cmd_corr_link(link_corrs, link_n, link_out);
    } else if (loss_check->parsed()) {
      cmd_loss_check_grad(which, loss_seed);
    } else if (train->parsed()) {
      cmd_train_toy(toy);
    } else if (eval_gps->parsed()) {
      cmd_eval_gps(gps_args);
    } else if (eval_reid->parsed()) {
      cmd_eval_reid(reid_args);
    } else if (viz_pca->parsed()) {
      cmd_viz_pca(viz_field, viz_out);
    } else if (synth->parsed()) {
      cmd_synth_scene(synth_kind, synth_seed, synth_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace surfcorr
