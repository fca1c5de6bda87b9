#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "surfcorr/cli.hpp"
#include "surfcorr/correspondence.hpp"
#include "surfcorr/geodesics.hpp"
#include "surfcorr/metrics.hpp"
#include "surfcorr/tensor_io.hpp"

using namespace surfcorr;

namespace {

// Streams swapped for the duration of one CLI call; tests assert on text.
struct Capture {
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  ~Capture() {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
  }
};

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult run(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"surfcorr"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  Capture cap;
  CliResult r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data());
  r.out = cap.out.str();
  r.err = cap.err.str();
  return r;
}

std::filesystem::path temp_dir() {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("surfcorr_cli_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string tetra_obj() {
  return "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
         "f 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n";
}

bool dirs_equal(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::string> names_a, names_b;
  for (const auto& e : std::filesystem::directory_iterator(a))
    names_a.push_back(e.path().filename().string());
  for (const auto& e : std::filesystem::directory_iterator(b))
    names_b.push_back(e.path().filename().string());
  std::sort(names_a.begin(), names_a.end());
  std::sort(names_b.begin(), names_b.end());
  if (names_a != names_b) return false;
  for (const std::string& name : names_a) {
    if (slurp(a / name) != slurp(b / name)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("cli mesh validate prints counts") {
  const auto dir = temp_dir();
  write_file(dir / "tetra.obj", tetra_obj());
  const CliResult r = run({"mesh", "validate", (dir / "tetra.obj").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "4 vertices, 4 faces, 6 edges, OK\n");
}

TEST_CASE("cli exit codes separate usage from domain errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"mesh"}).code == 2);
  CHECK(run({"mesh", "validate"}).code == 2);          // missing path
  CHECK(run({"synth-scene", "--out", "x"}).code == 2); // missing --kind
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"mesh", "validate", "--help"}).code == 0);

  const CliResult missing = run({"mesh", "validate", "/no/such/file.obj"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error:") == 0);

  const auto dir = temp_dir();
  const CliResult kind =
      run({"synth-scene", "--kind", "cube", "--out", (dir / "s").string()});
  CHECK(kind.code == 1);
  CHECK(kind.err.find("cube") != std::string::npos);
}

TEST_CASE("cli check-grad reports small errors for every loss") {
  for (const std::string which : {"geo", "cst", "sil", "id", "tri"}) {
    for (const std::string seed : {"0", "4"}) {
      const CliResult r = run({"loss", "check-grad", "--which", which,
                               "--seed", seed});
      REQUIRE(r.code == 0);
      REQUIRE(r.out.rfind("max relative error: ", 0) == 0);
      const double err = std::stod(r.out.substr(20));
      CHECK(err < 1e-5);
    }
  }
  CHECK(run({"loss", "check-grad", "--which", "huber"}).code == 1);
}

TEST_CASE("cli geodesic precompute writes a loadable cache") {
  const auto dir = temp_dir();
  write_file(dir / "tetra.obj", tetra_obj());
  const std::string cache_path = (dir / "cache.bin").string();

  SUBCASE("all sources") {
    const CliResult r = run({"geodesic", "precompute", "--mesh",
                             (dir / "tetra.obj").string(), "--sources", "all",
                             "--out", cache_path});
    CHECK(r.code == 0);
    CHECK(r.out == "cached 4 sources over 4 vertices\n");
    const GeodesicCache cache = load_cache(cache_path);
    CHECK(cache.sources == std::vector<int>{0, 1, 2, 3});
    CHECK(cache.lookup(0, 0) == 0.0);
  }

  SUBCASE("source list file") {
    write_file(dir / "sources.txt", "2\n0\n");
    const CliResult r = run({"geodesic", "precompute", "--mesh",
                             (dir / "tetra.obj").string(), "--sources",
                             (dir / "sources.txt").string(), "--out",
                             cache_path});
    CHECK(r.code == 0);
    CHECK(load_cache(cache_path).sources == std::vector<int>{2, 0});
  }

  SUBCASE("junk source list is a domain error") {
    write_file(dir / "sources.txt", "2\nbanana\n");
    const CliResult r = run({"geodesic", "precompute", "--mesh",
                             (dir / "tetra.obj").string(), "--sources",
                             (dir / "sources.txt").string(), "--out",
                             cache_path});
    CHECK(r.code == 1);
  }
}

TEST_CASE("cli synth-scene is deterministic and linked") {
  const auto dir = temp_dir();
  const CliResult r1 = run({"synth-scene", "--kind", "sphere", "--seed", "3",
                            "--out", (dir / "a").string()});
  REQUIRE(r1.code == 0);
  CHECK(r1.out.find("2 views") != std::string::npos);
  CHECK(r1.out.find("10 links") != std::string::npos);

  const CliResult r2 = run({"synth-scene", "--kind", "sphere", "--seed", "3",
                            "--out", (dir / "b").string()});
  REQUIRE(r2.code == 0);
  CHECK(dirs_equal(dir / "a", dir / "b"));

  const CliResult r3 = run({"synth-scene", "--kind", "sphere", "--seed", "4",
                            "--out", (dir / "c").string()});
  REQUIRE(r3.code == 0);
  CHECK(!dirs_equal(dir / "a", dir / "c"));
}

TEST_CASE("cli corr pipeline generates, samples, and links") {
  const auto dir = temp_dir();
  REQUIRE(run({"synth-scene", "--kind", "sphere", "--seed", "1", "--out",
               (dir / "s").string()})
              .code == 0);

  const CliResult gen = run(
      {"corr", "generate", "--mesh", (dir / "s/mesh.obj").string(), "--camera",
       (dir / "s/view0.cam").string(), "--mask",
       (dir / "s/view0_mask.pgm").string(), "--out", (dir / "g0.jsonl").string(),
       "--image-id", "img-a", "--seed", "21"});
  REQUIRE(gen.code == 0);
  const std::vector<CorrespondenceSet> sets0 = read_corrs((dir / "g0.jsonl").string());
  REQUIRE(sets0.size() == 1);
  CHECK(sets0[0].image_id == "img-a");
  CHECK(sets0[0].entries.size() >= 80);
  CHECK(sets0[0].entries.size() <= 125);
  CHECK(gen.out == std::to_string(sets0[0].entries.size()) + " entries\n");

  REQUIRE(run({"corr", "generate", "--mesh", (dir / "s/mesh.obj").string(),
               "--camera", (dir / "s/view1.cam").string(), "--mask",
               (dir / "s/view1_mask.pgm").string(), "--out",
               (dir / "g1.jsonl").string(), "--image-id", "img-b", "--seed",
               "22"})
              .code == 0);
  write_file(dir / "both.jsonl",
             slurp(dir / "g0.jsonl") + slurp(dir / "g1.jsonl"));

  const CliResult link = run({"corr", "link", "--corrs",
                              (dir / "both.jsonl").string(), "--n", "10",
                              "--out", (dir / "linked.jsonl").string()});
  REQUIRE(link.code == 0);
  CHECK(link.out == "10 links\n");
  const auto linked = read_corrs((dir / "linked.jsonl").string());
  REQUIRE(linked.size() == 2);
  CHECK(linked[0].cross_view.size() == 10);
  CHECK(linked[1].cross_view.size() == 10);

  const CliResult single = run({"corr", "link", "--corrs",
                                (dir / "g0.jsonl").string(), "--out",
                                (dir / "x.jsonl").string()});
  CHECK(single.code == 1);
}

TEST_CASE("cli sample-annot matches the library sampler") {
  const auto dir = temp_dir();
  std::string pgm = "P5\n8 6\n255\n";
  PartMap parts(6, 8, 0);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 8; ++c) {
      const int label = r == 0 ? 0 : (c < 4 ? 1 : 3);
      parts.at(r, c) = label;
      pgm.push_back(static_cast<char>(label));
    }
  }
  write_file(dir / "parts.pgm", pgm);

  const CliResult r = run({"corr", "sample-annot", "--parts",
                           (dir / "parts.pgm").string(), "--out",
                           (dir / "annot.csv").string(), "--uniform-n", "7",
                           "--k-lo", "1", "--k-hi", "3", "--seed", "12"});
  REQUIRE(r.code == 0);

  const std::vector<Pixel> expected = sample_annotation_pixels(parts, 7, 1, 3, 12);
  std::string csv = "row,col\n";
  for (const Pixel& p : expected) {
    csv += std::to_string(p.row) + "," + std::to_string(p.col) + "\n";
  }
  CHECK(slurp(dir / "annot.csv") == csv);
  CHECK(r.out == std::to_string(expected.size()) + " pixels\n");
}

TEST_CASE("cli train-toy same seed twice is byte-identical") {
  const auto dir = temp_dir();
  const std::vector<std::string> args = {"train-toy", "--scene", "sphere",
                                         "--steps", "25",  "--dim", "12",
                                         "--seed",  "7"};
  auto with_out = [&](const std::string& out) {
    std::vector<std::string> a = args;
    a.push_back("--out");
    a.push_back(out);
    return a;
  };
  const CliResult r1 = run(with_out((dir / "a").string()));
  REQUIRE(r1.code == 0);
  CHECK(r1.out.rfind("final loss ", 0) == 0);
  REQUIRE(run(with_out((dir / "b").string())).code == 0);
  CHECK(dirs_equal(dir / "a", dir / "b"));

  for (const char* name :
       {"field0.bin", "field1.bin", "table.bin", "trace.csv",
        "sphere-v0.vmap", "sphere-v1.vmap"}) {
    CHECK(std::filesystem::is_regular_file(dir / "a" / name));
  }

  std::istringstream trace(slurp(dir / "a" / "trace.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(trace, line)) ++rows;
  CHECK(rows == 27);  // header + loss before each of 25 steps + final loss
}

TEST_CASE("cli train-toy divergence exits 1 but keeps the trace") {
  const auto dir = temp_dir();
  const CliResult r =
      run({"train-toy", "--scene", "sphere", "--steps", "30", "--dim", "8",
           "--lr", "1e308", "--out", (dir / "t").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("diverged") != std::string::npos);
  CHECK(std::filesystem::is_regular_file(dir / "t" / "trace.csv"));
}

TEST_CASE("cli eval gps scores perfect predictions at 100") {
  const auto dir = temp_dir();
  REQUIRE(run({"synth-scene", "--kind", "sphere", "--seed", "5", "--out",
               (dir / "s").string()})
              .code == 0);
  REQUIRE(run({"geodesic", "precompute", "--mesh",
               (dir / "s/mesh.obj").string(), "--sources", "all", "--out",
               (dir / "cache.bin").string()})
              .code == 0);

  const auto sets = read_corrs((dir / "s/corrs.jsonl").string());
  REQUIRE(sets.size() == 2);
  std::filesystem::create_directories(dir / "pred");
  for (const CorrespondenceSet& set : sets) {
    VertexMap map(set.height, set.width, -1);
    for (const Correspondence& e : set.entries) map.at(e.pixel) = e.vertex;
    save_vertex_map(map, (dir / "pred" / (set.image_id + ".vmap")).string());
  }

  const CliResult r = run({"eval", "gps", "--gt",
                           (dir / "s/corrs.jsonl").string(), "--pred",
                           (dir / "pred").string(), "--cache",
                           (dir / "cache.bin").string()});
  REQUIRE(r.code == 0);
  std::istringstream out(r.out);
  std::string line;
  REQUIRE(std::getline(out, line));
  CHECK(line == "threshold,ap,ar");
  int rows = 0;
  while (std::getline(out, line)) {
    ++rows;
    const auto second_comma = line.find(',', line.find(',') + 1);
    CHECK(line.substr(line.find(',') + 1) == "100.0,100.0");
    CHECK(second_comma != std::string::npos);
  }
  CHECK(rows == 11);  // ten thresholds plus the mean row

  SUBCASE("missing prediction file drops AR but not AP") {
    std::filesystem::remove(dir / "pred" / (sets[1].image_id + ".vmap"));
    const CliResult partial = run({"eval", "gps", "--gt",
                                   (dir / "s/corrs.jsonl").string(), "--pred",
                                   (dir / "pred").string(), "--cache",
                                   (dir / "cache.bin").string()});
    REQUIRE(partial.code == 0);
    CHECK(partial.out.find("0.50,100.0,50.0\n") != std::string::npos);
  }
}

TEST_CASE("cli eval gps classifies a trained field against a table") {
  const auto dir = temp_dir();
  REQUIRE(run({"synth-scene", "--kind", "sphere", "--seed", "2", "--out",
               (dir / "s").string()})
              .code == 0);
  REQUIRE(run({"geodesic", "precompute", "--mesh",
               (dir / "s/mesh.obj").string(), "--sources", "all", "--out",
               (dir / "cache.bin").string()})
              .code == 0);
  REQUIRE(run({"train-toy", "--scene", (dir / "s").string(), "--steps", "10",
               "--dim", "8", "--out", (dir / "t").string()})
              .code == 0);

  const auto sets = read_corrs((dir / "s/corrs.jsonl").string());
  write_corrs({sets[0]}, (dir / "v0.jsonl").string());

  const CliResult r = run({"eval", "gps", "--gt", (dir / "v0.jsonl").string(),
                           "--pred", (dir / "t/field0.bin").string(),
                           "--table", (dir / "t/table.bin").string(),
                           "--cache", (dir / "cache.bin").string()});
  REQUIRE(r.code == 0);

  // The field+table route must agree with the vmap train-toy wrote itself.
  const CliResult via_map =
      run({"eval", "gps", "--gt", (dir / "v0.jsonl").string(), "--pred",
           (dir / "t" / (sets[0].image_id + ".vmap")).string(), "--cache",
           (dir / "cache.bin").string()});
  REQUIRE(via_map.code == 0);
  CHECK(r.out == via_map.out);

  SUBCASE("field prediction without a table is rejected") {
    const CliResult no_table =
        run({"eval", "gps", "--gt", (dir / "v0.jsonl").string(), "--pred",
             (dir / "t/field0.bin").string(), "--cache",
             (dir / "cache.bin").string()});
    CHECK(no_table.code == 1);
  }

  SUBCASE("two-image ground truth rejects a single prediction file") {
    const CliResult two = run({"eval", "gps", "--gt",
                               (dir / "s/corrs.jsonl").string(), "--pred",
                               (dir / "t/field0.bin").string(), "--table",
                               (dir / "t/table.bin").string(), "--cache",
                               (dir / "cache.bin").string()});
    CHECK(two.code == 1);
  }
}

TEST_CASE("cli eval reid matches the library on a small instance") {
  const auto dir = temp_dir();
  RetrievalInstance inst;
  inst.query_features = {{0.0, 0.0}, {4.0, 4.0}};
  inst.query_pids = {1, 2};
  inst.query_cams = {0, 0};
  inst.query_clothes = {0, 1};
  inst.gallery_features = {{0.1, 0.0}, {3.9, 4.0}, {2.0, 2.0}, {0.0, 0.2}};
  inst.gallery_pids = {1, 2, 2, 3};
  inst.gallery_cams = {1, 1, 2, 1};
  inst.gallery_clothes = {1, 1, 0, 0};

  NamedTensor q, g;
  q.name = "query";
  q.shape = {2, 2};
  for (const auto& row : inst.query_features)
    q.values.insert(q.values.end(), row.begin(), row.end());
  g.name = "gallery";
  g.shape = {4, 2};
  for (const auto& row : inst.gallery_features)
    g.values.insert(g.values.end(), row.begin(), row.end());
  save_tensors({q, g}, (dir / "feat.bin").string());

  std::string csv = "set,pid,cam,clothes\n";
  for (int i = 0; i < 2; ++i) {
    csv += "query," + std::to_string(inst.query_pids[i]) + "," +
           std::to_string(inst.query_cams[i]) + "," +
           std::to_string(inst.query_clothes[i]) + "\n";
  }
  for (int i = 0; i < 4; ++i) {
    csv += "gallery," + std::to_string(inst.gallery_pids[i]) + "," +
           std::to_string(inst.gallery_cams[i]) + "," +
           std::to_string(inst.gallery_clothes[i]) + "\n";
  }
  write_file(dir / "labels.csv", csv);

  for (const std::string protocol :
       {"standard", "cloth-changing", "same-clothes"}) {
    const CliResult r = run({"eval", "reid", "--features",
                             (dir / "feat.bin").string(), "--labels",
                             (dir / "labels.csv").string(), "--protocol",
                             protocol});
    REQUIRE(r.code == 0);
    const ReidResult expected =
        reid_eval(inst, protocol_from_string(protocol), 10);
    char head[64];
    std::snprintf(head, sizeof(head), "mAP %.2f\n", 100.0 * expected.mean_ap);
    CHECK(r.out.rfind(head, 0) == 0);
    std::snprintf(head, sizeof(head), "evaluated %d skipped %d\n",
                  expected.queries_evaluated, expected.queries_skipped);
    CHECK(r.out.find(head) != std::string::npos);
    CHECK(r.out.find("CMC@1 ") != std::string::npos);
    CHECK(r.out.find("CMC@10 ") != std::string::npos);
  }

  SUBCASE("row count mismatch between tensors and labels") {
    write_file(dir / "short.csv",
               "set,pid,cam,clothes\nquery,1,0,0\ngallery,1,1,1\n");
    const CliResult r = run({"eval", "reid", "--features",
                             (dir / "feat.bin").string(), "--labels",
                             (dir / "short.csv").string()});
    CHECK(r.code == 1);
  }

  SUBCASE("malformed header") {
    write_file(dir / "bad.csv", "pid,cam\n");
    const CliResult r = run({"eval", "reid", "--features",
                             (dir / "feat.bin").string(), "--labels",
                             (dir / "bad.csv").string()});
    CHECK(r.code == 1);
  }
}

TEST_CASE("cli viz pca writes a PPM sized to the field") {
  const auto dir = temp_dir();
  REQUIRE(run({"train-toy", "--scene", "sphere", "--steps", "2", "--dim", "6",
               "--out", (dir / "t").string()})
              .code == 0);
  const CliResult r =
      run({"viz", "pca", "--field", (dir / "t/field0.bin").string(), "--out",
           (dir / "view.ppm").string()});
  REQUIRE(r.code == 0);
  const std::string ppm = slurp(dir / "view.ppm");
  CHECK(ppm.rfind("P6\n96 96\n255\n", 0) == 0);
  CHECK(ppm.size() == std::string("P6\n96 96\n255\n").size() + 96 * 96 * 3);
}

TEST_CASE("cli config file fills gaps and flags beat it") {
  const auto dir = temp_dir();
  write_file(dir / "run.cfg", "[synth-scene]\nseed=5\nkind=sphere\n");

  REQUIRE(run({"synth-scene", "--config", (dir / "run.cfg").string(), "--out",
               (dir / "from_cfg").string()})
              .code == 0);
  REQUIRE(run({"synth-scene", "--kind", "sphere", "--seed", "5", "--out",
               (dir / "from_flags").string()})
              .code == 0);
  CHECK(dirs_equal(dir / "from_cfg", dir / "from_flags"));

  REQUIRE(run({"synth-scene", "--config", (dir / "run.cfg").string(), "--seed",
               "6", "--out", (dir / "override").string()})
              .code == 0);
  REQUIRE(run({"synth-scene", "--kind", "sphere", "--seed", "6", "--out",
               (dir / "flags6").string()})
              .code == 0);
  CHECK(dirs_equal(dir / "override", dir / "flags6"));
  CHECK(!dirs_equal(dir / "override", dir / "from_cfg"));
}
