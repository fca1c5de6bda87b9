#include "surfcorr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "surfcorr/errors.hpp"
#include "surfcorr/rng.hpp"

namespace surfcorr {

namespace {

double softplus(double x) { return std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Softmax of table·e/temperature with the shared max-shift; logits are not
// kept, only the probabilities.
Eigen::VectorXd pixel_softmax(const EmbeddingField& field, Pixel p,
                              const VertexEmbeddingTable& table,
                              double temperature) {
  Eigen::VectorXd logits = table * field.at(p) / temperature;
  const double mx = logits.maxCoeff();
  Eigen::VectorXd probs = (logits.array() - mx).exp();
  probs /= probs.sum();
  return probs;
}

std::size_t field_offset(const EmbeddingField& field, Pixel p) {
  return (static_cast<std::size_t>(p.row) * field.width + p.col) * field.dim;
}

// Adds w · v into a flat gradient array at a pixel's slot.
void add_at(std::vector<double>& grad, const EmbeddingField& field, Pixel p,
            const Eigen::VectorXd& v, double w = 1.0) {
  const std::size_t base = field_offset(field, p);
  for (int d = 0; d < field.dim; ++d) grad[base + d] += w * v[d];
}

// d(1 − cos(a,b))/da and /db at nonzero-norm a, b.
void cosine_distance_grads(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           double& dist, Eigen::VectorXd& da,
                           Eigen::VectorXd& db) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ArgError("cosine distance of a zero-norm vector");
  }
  const double cosv = a.dot(b) / (na * nb);
  dist = 1.0 - std::clamp(cosv, -1.0, 1.0);
  da = -(b / (na * nb) - cosv * a / (na * na));
  db = -(a / (na * nb) - cosv * b / (nb * nb));
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double s = 0.0;
    for (const double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

LossReport loss_silhouette(const Grid<double>& pred, const Mask& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw ArgError("silhouette prediction and mask sizes differ");
  }
  const std::size_t n = pred.data.size();
  if (n == 0) throw ArgError("silhouette loss on an empty image");

  LossReport report;
  std::vector<double> terms(n);
  std::vector<double> grad(n, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = gt.data[i] ? 1.0 : 0.0;
    const double p = std::clamp(pred.data[i], kProbClamp, 1.0 - kProbClamp);
    terms[i] = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    const bool clamped = pred.data[i] < kProbClamp ||
                         pred.data[i] > 1.0 - kProbClamp;
    if (!clamped) {
      grad[i] = inv_n * (-(y / p) + (1.0 - y) / (1.0 - p));
    }
  }
  report.value = pairwise_sum(terms) * inv_n;
  report.gradients["pred"] = std::move(grad);
  report.terms["sil"] = report.value;
  return report;
}

LossReport loss_geodesic(const EmbeddingField& field,
                         const VertexEmbeddingTable& table, double temperature,
                         const CorrespondenceSet& corrs,
                         const GeodesicCache& cache, GeodesicLossMode mode) {
  if (corrs.entries.empty()) throw ArgError("geodesic loss on an empty set");
  if (!(temperature > 0.0)) throw ArgError("temperature must be positive");
  const int nv = static_cast<int>(table.rows());
  const std::size_t n = corrs.entries.size();

  LossReport report;
  std::vector<double> grad_field(field.data.size(), 0.0);
  std::vector<double> grad_table(static_cast<std::size_t>(nv) * table.cols(), 0.0);
  std::vector<double> terms(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Correspondence& e = corrs.entries[i];
    if (!field.mask.in_bounds(e.pixel) || field.mask.at(e.pixel) == 0) {
      throw ArgError("correspondence pixel outside the foreground mask");
    }
    if (e.vertex < 0 || e.vertex >= nv) {
      throw ArgError("correspondence vertex outside the table");
    }
    const Eigen::VectorXd probs = pixel_softmax(field, e.pixel, table, temperature);

    // d(term)/d(logit_k), accumulated to field and table below.
    Eigen::VectorXd dlogits(nv);
    if (mode == GeodesicLossMode::kLiteral) {
      int arg = 0;
      for (int v = 1; v < nv; ++v) {
        if (probs[v] > probs[arg]) arg = v;
      }
      const double g = cache.lookup(e.vertex, arg);
      const double p_hat = probs[arg];
      terms[i] = -(g * std::log(std::clamp(p_hat, kProbClamp, 1.0 - kProbClamp)));
      if (p_hat > kProbClamp && p_hat < 1.0 - kProbClamp) {
        // −g·dlog(p_arg)/dlogit = −g·(δ − p)
        dlogits = g * probs;
        dlogits[arg] -= g;
      } else {
        dlogits.setZero();
      }
    } else {
      const std::span<const double> row = cache.row(e.vertex);
      Eigen::VectorXd s(nv);
      for (int v = 0; v < nv; ++v) {
        s[v] = scale_to_cosine_range(row[v], cache.g_max);
      }
      const double expectation = probs.dot(s);
      terms[i] = expectation;
      dlogits = probs.cwiseProduct(s - Eigen::VectorXd::Constant(nv, expectation));
    }

    const Eigen::VectorXd e_vec = field.at(e.pixel);
    const Eigen::VectorXd dfield = (table.transpose() * dlogits) / temperature;
    add_at(grad_field, field, e.pixel, dfield, inv_n);
    for (int v = 0; v < nv; ++v) {
      if (dlogits[v] == 0.0) continue;
      const double w = inv_n * dlogits[v] / temperature;
      for (int d = 0; d < table.cols(); ++d) {
        grad_table[static_cast<std::size_t>(v) * table.cols() + d] += w * e_vec[d];
      }
    }
  }

  report.value = pairwise_sum(terms) * inv_n;
  report.gradients["field"] = std::move(grad_field);
  report.gradients["table"] = std::move(grad_table);
  report.terms["geo"] = report.value;
  return report;
}

LossReport loss_consistency(const EmbeddingField& field1,
                            const EmbeddingField& field2,
                            std::span<const CrossPair> cross_pairs,
                            std::span<const SamePair> same_pairs,
                            const GeodesicCache& cache, double g_max) {
  if (cross_pairs.empty() && same_pairs.empty()) {
    throw ArgError("consistency loss needs at least one pair");
  }

  LossReport report;
  std::vector<double> grad1(field1.data.size(), 0.0);
  std::vector<double> grad2(field2.data.size(), 0.0);

  double cross_value = 0.0;
  if (!cross_pairs.empty()) {
    std::vector<double> terms(cross_pairs.size());
    const double inv = 1.0 / static_cast<double>(cross_pairs.size());
    for (std::size_t i = 0; i < cross_pairs.size(); ++i) {
      const CrossPair& pair = cross_pairs[i];
      if (!field1.mask.in_bounds(pair.p) || !field2.mask.in_bounds(pair.q)) {
        throw ArgError("cross-view pair pixel out of bounds");
      }
      double dist = 0.0;
      Eigen::VectorXd da, db;
      cosine_distance_grads(field1.at(pair.p), field2.at(pair.q), dist, da, db);
      terms[i] = softplus(dist);
      const double w = inv * sigmoid(dist);
      add_at(grad1, field1, pair.p, da, w);
      add_at(grad2, field2, pair.q, db, w);
    }
    cross_value = pairwise_sum(terms) / static_cast<double>(cross_pairs.size());
  }

  double same_value = 0.0;
  if (!same_pairs.empty()) {
    std::vector<double> terms(same_pairs.size());
    const double inv = 1.0 / static_cast<double>(same_pairs.size());
    for (std::size_t i = 0; i < same_pairs.size(); ++i) {
      const SamePair& pair = same_pairs[i];
      if (pair.field_index != 0 && pair.field_index != 1) {
        throw ArgError("same-image pair field index must be 0 or 1");
      }
      const EmbeddingField& field = pair.field_index == 0 ? field1 : field2;
      std::vector<double>& grad = pair.field_index == 0 ? grad1 : grad2;
      if (!field.mask.in_bounds(pair.a) || !field.mask.in_bounds(pair.b)) {
        throw ArgError("same-image pair pixel out of bounds");
      }
      double dist = 0.0;
      Eigen::VectorXd da, db;
      cosine_distance_grads(field.at(pair.a), field.at(pair.b), dist, da, db);
      const double target =
          scale_to_cosine_range(cache.lookup(pair.vertex_a, pair.vertex_b), g_max);
      const double gap = dist - target;
      terms[i] = softplus(std::abs(gap));
      const double sign = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
      const double w = inv * sigmoid(std::abs(gap)) * sign;
      add_at(grad, field, pair.a, da, w);
      add_at(grad, field, pair.b, db, w);
    }
    same_value = pairwise_sum(terms) / static_cast<double>(same_pairs.size());
  }

  report.value = cross_value + same_value;
  report.gradients["field1"] = std::move(grad1);
  report.gradients["field2"] = std::move(grad2);
  report.terms["cross"] = cross_value;
  report.terms["same"] = same_value;
  return report;
}

LossReport loss_id(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  const int n = static_cast<int>(logits.rows());
  const int c = static_cast<int>(logits.cols());
  if (n == 0 || c == 0) throw ArgError("identity loss on an empty batch");
  if (static_cast<int>(labels.size()) != n) {
    throw ArgError("identity loss label count mismatch");
  }

  LossReport report;
  std::vector<double> grad(static_cast<std::size_t>(n) * c, 0.0);
  std::vector<double> terms(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= c) throw ArgError("identity label out of range");
    const double mx = logits.row(i).maxCoeff();
    Eigen::VectorXd p = (logits.row(i).array() - mx).exp();
    p /= p.sum();
    terms[i] = -std::log(std::clamp(p[y], kProbClamp, 1.0 - kProbClamp));
    if (p[y] > kProbClamp && p[y] < 1.0 - kProbClamp) {
      for (int k = 0; k < c; ++k) {
        grad[static_cast<std::size_t>(i) * c + k] =
            inv_n * (p[k] - (k == y ? 1.0 : 0.0));
      }
    }
  }
  report.value = pairwise_sum(terms) * inv_n;
  report.gradients["logits"] = std::move(grad);
  report.terms["id"] = report.value;
  return report;
}

LossReport loss_triplet(const Eigen::MatrixXd& features,
                        const std::vector<int>& labels, double margin) {
  const int n = static_cast<int>(features.rows());
  const int f = static_cast<int>(features.cols());
  if (n == 0) throw ArgError("triplet loss on an empty batch");
  if (static_cast<int>(labels.size()) != n) {
    throw ArgError("triplet loss label count mismatch");
  }
  if (margin < 0.0) throw ArgError("triplet margin must be nonnegative");

  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = (features.row(i) - features.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }

  LossReport report;
  std::vector<double> grad(static_cast<std::size_t>(n) * f, 0.0);
  std::vector<double> terms(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  auto add_row = [&](int row, const Eigen::RowVectorXd& v, double w) {
    for (int k = 0; k < f; ++k) grad[static_cast<std::size_t>(row) * f + k] += w * v[k];
  };

  for (int i = 0; i < n; ++i) {
    int hardest_pos = -1, hardest_neg = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (labels[j] == labels[i]) {
        if (hardest_pos < 0 || dist(i, j) > dist(i, hardest_pos)) hardest_pos = j;
      } else {
        if (hardest_neg < 0 || dist(i, j) < dist(i, hardest_neg)) hardest_neg = j;
      }
    }
    if (hardest_pos < 0) {
      throw ValidationError("triplet batch anchor lacks a positive");
    }
    if (hardest_neg < 0) {
      throw ValidationError("triplet batch anchor lacks a negative");
    }
    const double d_pos = dist(i, hardest_pos);
    const double d_neg = dist(i, hardest_neg);
    const double hinge = d_pos - d_neg + margin;
    terms[i] = std::max(0.0, hinge);
    if (hinge <= 0.0) continue;

    if (d_pos > 0.0) {
      const Eigen::RowVectorXd dir =
          (features.row(i) - features.row(hardest_pos)) / d_pos;
      add_row(i, dir, inv_n);
      add_row(hardest_pos, dir, -inv_n);
    }
    if (d_neg > 0.0) {
      const Eigen::RowVectorXd dir =
          (features.row(i) - features.row(hardest_neg)) / d_neg;
      add_row(i, dir, -inv_n);
      add_row(hardest_neg, dir, inv_n);
    }
  }
  report.value = pairwise_sum(terms) * inv_n;
  report.gradients["features"] = std::move(grad);
  report.terms["tri"] = report.value;
  return report;
}

LossReport loss_total(const std::map<std::string, LossReport>& parts,
                      const LossWeights& w) {
  const std::map<std::string, double> weights = {
      {"sil", 1.0},
      {"geo", w.lambda1},
      {"cst", w.lambda1 * w.alpha},
      {"id", w.lambda2},
      {"tri", w.lambda3},
  };
  LossReport report;
  double total = 0.0;
  for (const auto& [name, weight] : weights) {
    const auto it = parts.find(name);
    if (it == parts.end()) throw ArgError("loss_total is missing part '" + name + "'");
    if (!std::isfinite(it->second.value)) {
      throw ArgError("loss part '" + name + "' is not finite");
    }
    total += weight * it->second.value;
    report.terms[name] = it->second.value;
    for (const auto& [tensor, grad] : it->second.gradients) {
      std::vector<double> scaled(grad.size());
      for (std::size_t i = 0; i < grad.size(); ++i) scaled[i] = weight * grad[i];
      report.gradients[name + "/" + tensor] = std::move(scaled);
    }
  }
  report.value = total;
  return report;
}

GradCheckResult check_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& analytic_grad,
    double step, int n_coords, std::uint64_t seed) {
  if (x0.size() != analytic_grad.size()) {
    throw ArgError("gradient length does not match the input");
  }
  const int dim = static_cast<int>(x0.size());
  Rng rng = stage_rng(seed, "grad-check");
  std::vector<int> coords;
  if (dim <= n_coords) {
    coords.resize(dim);
    for (int i = 0; i < dim; ++i) coords[i] = i;
  } else {
    coords = rng.sample_without_replacement(dim, n_coords);
  }

  GradCheckResult result;
  Eigen::VectorXd x = x0;
  for (const int i : coords) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw ValidationError("loss is not finite at a perturbed point");
    }
    const double numeric = (up - down) / (2.0 * step);
    const double rel = std::abs(analytic_grad[i] - numeric) /
                       std::max(std::abs(numeric), 1e-4);
    result.max_rel_error = std::max(result.max_rel_error, rel);
    ++result.coords_checked;
  }
  return result;
}

}  // namespace surfcorr
