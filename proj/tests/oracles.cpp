#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<std::vector<double>> all_pairs_geodesics(
    const surfcorr::EdgeGraph& g) {
  const int n = static_cast<int>(g.adjacency.size());
  std::vector<std::vector<double>> weight(n, std::vector<double>(n, kInf));
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, kInf));
  std::vector<std::vector<int>> next(n, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i) {
    dist[i][i] = 0.0;
    weight[i][i] = 0.0;
  }
  for (int u = 0; u < n; ++u) {
    for (const auto& [v, w] : g.adjacency[u]) {
      weight[u][v] = w;
      if (w < dist[u][v]) {
        dist[u][v] = w;
        next[u][v] = v;
      }
    }
  }

  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (dist[i][k] == kInf) continue;
      for (int j = 0; j < n; ++j) {
        const double through = dist[i][k] + dist[k][j];
        if (through < dist[i][j]) {
          dist[i][j] = through;
          next[i][j] = next[i][k];
        }
      }
    }
  }

  // Re-sum each selected path edge by edge so every entry is a
  // left-to-right float sum over an actual path.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || next[i][j] == -1) continue;
      double s = 0.0;
      int u = i;
      while (u != j) {
        const int v = next[u][j];
        s = s + weight[u][v];
        u = v;
      }
      dist[i][j] = s;
    }
  }

  // Relaxation sweeps to a fixpoint: the result is the exact minimum over
  // paths of the edge-ordered float sum, which is what a single-source
  // sweep with the same accumulation produces.
  for (int i = 0; i < n; ++i) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int u = 0; u < n; ++u) {
        if (dist[i][u] == kInf) continue;
        for (const auto& [v, w] : g.adjacency[u]) {
          const double cand = dist[i][u] + w;
          if (cand < dist[i][v]) {
            dist[i][v] = cand;
            changed = true;
          }
        }
      }
    }
  }
  return dist;
}

surfcorr::TokenMap conv2d_same(const surfcorr::TokenMap& in,
                               const surfcorr::ConvKernel& kernel) {
  surfcorr::TokenMap out(in.h, in.w, kernel.c_out);
  const int off = kernel.k / 2;
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      for (int co = 0; co < kernel.c_out; ++co) {
        double sum = 0.0;
        for (int ky = 0; ky < kernel.k; ++ky) {
          for (int kx = 0; kx < kernel.k; ++kx) {
            const int yy = y + ky - off;
            const int xx = x + kx - off;
            if (yy < 0 || yy >= in.h || xx < 0 || xx >= in.w) continue;
            for (int ci = 0; ci < kernel.c_in; ++ci) {
              sum += in.at(yy, xx, ci) * kernel.at(ky, kx, ci, co);
            }
          }
        }
        out.at(y, x, co) = sum;
      }
    }
  }
  return out;
}

Eigen::MatrixXd attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                          const Eigen::MatrixXd& v, int heads,
                          const Eigen::MatrixXd& out_proj) {
  const int tq = static_cast<int>(q.rows());
  const int tk = static_cast<int>(k.rows());
  const int c = static_cast<int>(q.cols());
  const int hd = c / heads;
  Eigen::MatrixXd concat(tq, c);
  for (int h = 0; h < heads; ++h) {
    const int base = h * hd;
    for (int i = 0; i < tq; ++i) {
      std::vector<double> score(tk, 0.0);
      for (int j = 0; j < tk; ++j) {
        double dot = 0.0;
        for (int d = 0; d < hd; ++d) dot += q(i, base + d) * k(j, base + d);
        score[j] = dot / std::sqrt(static_cast<double>(hd));
      }
      double mx = -kInf;
      for (double s : score) mx = std::max(mx, s);
      double z = 0.0;
      for (double& s : score) {
        s = std::exp(s - mx);
        z += s;
      }
      for (int d = 0; d < hd; ++d) {
        double acc = 0.0;
        for (int j = 0; j < tk; ++j) acc += (score[j] / z) * v(j, base + d);
        concat(i, base + d) = acc;
      }
    }
  }
  Eigen::MatrixXd out(tq, static_cast<int>(out_proj.cols()));
  for (int i = 0; i < tq; ++i) {
    for (int co = 0; co < out_proj.cols(); ++co) {
      double acc = 0.0;
      for (int ci = 0; ci < c; ++ci) acc += concat(i, ci) * out_proj(ci, co);
      out(i, co) = acc;
    }
  }
  return out;
}

surfcorr::ReidResult reid_bruteforce(const surfcorr::RetrievalInstance& inst,
                                     surfcorr::Protocol protocol,
                                     int max_rank) {
  surfcorr::ReidResult result;
  result.cmc.assign(max_rank, 0.0);
  const int nq = static_cast<int>(inst.query_features.size());
  const int ng = static_cast<int>(inst.gallery_features.size());
  for (int qi = 0; qi < nq; ++qi) {
    struct Row {
      double dist;
      int index;
      bool positive;
    };
    std::vector<Row> rows;
    for (int gi = 0; gi < ng; ++gi) {
      const bool same_id = inst.gallery_pids[gi] == inst.query_pids[qi];
      const bool same_cam = inst.gallery_cams[gi] == inst.query_cams[qi];
      const bool same_clothes =
          inst.gallery_clothes[gi] == inst.query_clothes[qi];
      if (same_id && same_cam) continue;
      bool positive = false;
      switch (protocol) {
        case surfcorr::Protocol::kStandard:
          positive = same_id;
          break;
        case surfcorr::Protocol::kClothChanging:
          if (same_id && same_clothes) continue;
          positive = same_id;
          break;
        case surfcorr::Protocol::kSameClothes:
          if (same_id && !same_clothes) continue;
          positive = same_id && same_clothes;
          break;
      }
      double sq = 0.0;
      for (std::size_t d = 0; d < inst.query_features[qi].size(); ++d) {
        const double diff =
            inst.query_features[qi][d] - inst.gallery_features[gi][d];
        sq += diff * diff;
      }
      rows.push_back({std::sqrt(sq), gi, positive});
    }
    int positives = 0;
    for (const Row& r : rows) positives += r.positive ? 1 : 0;
    if (positives == 0) {
      ++result.queries_skipped;
      continue;
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      return a.index < b.index;
    });
    double ap = 0.0;
    int hit = 0;
    int first_rank = -1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].positive) continue;
      ++hit;
      ap += static_cast<double>(hit) / static_cast<double>(r + 1);
      if (first_rank < 0) first_rank = static_cast<int>(r) + 1;
    }
    ap /= positives;
    result.mean_ap += ap;
    for (int k = first_rank; k <= max_rank; ++k) result.cmc[k - 1] += 1.0;
    ++result.queries_evaluated;
  }
  if (result.queries_evaluated > 0) {
    result.mean_ap /= result.queries_evaluated;
    for (double& c : result.cmc) c /= result.queries_evaluated;
  }
  return result;
}

surfcorr::TriangleMesh random_mesh(surfcorr::Rng& rng) {
  const int kind = rng.uniform_int(0, 2);
  surfcorr::TriangleMesh mesh;
  if (kind == 0) {
    mesh = surfcorr::make_tetrahedron();
  } else if (kind == 1) {
    mesh = surfcorr::make_icosphere(1);  // 42 vertices
  } else {
    mesh = surfcorr::make_grid(rng.uniform_int(3, 14));
  }
  const double scale = rng.uniform(0.5, 2.0);
  const double jitter = 0.02;
  for (auto& v : mesh.vertices) {
    v *= scale;
    v.x() += jitter * rng.normal();
    v.y() += jitter * rng.normal();
    v.z() += jitter * rng.normal();
  }
  return mesh;
}

}  // namespace oracle
