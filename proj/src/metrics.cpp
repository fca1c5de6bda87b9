#include "surfcorr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surfcorr/errors.hpp"
#include "surfcorr/losses.hpp"

namespace surfcorr {

double gps(const CorrespondenceSet& gt, const VertexMap& pred,
           const GeodesicCache& cache, double sigma) {
  if (!(sigma > 0.0)) throw ArgError("gps sigma must be positive");
  if (gt.entries.empty()) throw ArgError("gps needs at least one annotated pixel");

  const double denom = 2.0 * sigma * sigma;
  std::vector<double> kernels;
  kernels.reserve(gt.entries.size());
  for (const Correspondence& entry : gt.entries) {
    if (!pred.in_bounds(entry.pixel)) {
      throw ValidationError("annotated pixel lies outside the prediction map");
    }
    const int predicted = pred.at(entry.pixel);
    if (predicted < 0) {
      throw ValidationError("missing prediction at an annotated pixel");
    }
    if (!cache.has_row(entry.vertex) && !cache.has_row(predicted)) {
      throw ValidationError("annotated vertex has no cached geodesic row");
    }
    const double g = cache.lookup(entry.vertex, predicted);
    kernels.push_back(std::exp(-(g * g) / denom));
  }
  return pairwise_sum(kernels) / static_cast<double>(kernels.size());
}

namespace {

std::vector<double> config_thresholds(const GpsConfig& config) {
  if (!(config.threshold_lo > 0.0) || config.threshold_hi > 1.0 ||
      config.threshold_lo > config.threshold_hi || !(config.threshold_step > 0.0)) {
    throw ArgError("gps thresholds must be increasing within (0, 1]");
  }
  const int count = static_cast<int>(std::floor(
                        (config.threshold_hi - config.threshold_lo) /
                            config.threshold_step +
                        1e-9)) +
                    1;
  std::vector<double> thresholds(count);
  for (int i = 0; i < count; ++i) {
    thresholds[i] = config.threshold_lo + i * config.threshold_step;
  }
  return thresholds;
}

}  // namespace

GpsTable gps_ap_ar(const std::vector<std::optional<double>>& per_image_gps,
                   const GpsConfig& config) {
  if (per_image_gps.empty()) throw ArgError("gps evaluation needs images");

  GpsTable table;
  table.images_annotated = static_cast<int>(per_image_gps.size());
  for (const std::optional<double>& s : per_image_gps) {
    if (s.has_value()) ++table.images_predicted;
  }

  for (const double t : config_thresholds(config)) {
    int correct = 0;
    for (const std::optional<double>& s : per_image_gps) {
      // Accumulated threshold steps carry float rounding; scores within 1e-12
      // of a threshold count as reaching it.
      if (s.has_value() && *s >= t - 1e-12) ++correct;
    }
    GpsThresholdRow row;
    row.threshold = t;
    row.ap = table.images_predicted > 0
                 ? static_cast<double>(correct) / table.images_predicted
                 : 0.0;
    row.ar = static_cast<double>(correct) / table.images_annotated;
    table.rows.push_back(row);
  }

  for (const GpsThresholdRow& row : table.rows) {
    table.mean_ap += row.ap;
    table.mean_ar += row.ar;
  }
  table.mean_ap /= static_cast<double>(table.rows.size());
  table.mean_ar /= static_cast<double>(table.rows.size());
  return table;
}

GpsTable gps_ap_ar(
    const std::vector<std::pair<CorrespondenceSet, std::optional<VertexMap>>>&
        dataset,
    const GeodesicCache& cache, const GpsConfig& config) {
  std::vector<std::optional<double>> scores;
  scores.reserve(dataset.size());
  for (const auto& [gt, pred] : dataset) {
    if (pred.has_value()) {
      scores.push_back(gps(gt, *pred, cache, config.sigma));
    } else {
      scores.push_back(std::nullopt);
    }
  }
  return gps_ap_ar(scores, config);
}

Protocol protocol_from_string(const std::string& name) {
  if (name == "standard") return Protocol::kStandard;
  if (name == "cloth-changing") return Protocol::kClothChanging;
  if (name == "same-clothes") return Protocol::kSameClothes;
  throw ArgError("unknown protocol '" + name +
                 "' (expected standard, cloth-changing, or same-clothes)");
}

namespace {

void check_instance(const RetrievalInstance& inst) {
  const std::size_t nq = inst.query_features.size();
  const std::size_t ng = inst.gallery_features.size();
  if (nq == 0 || ng == 0) throw ArgError("retrieval needs queries and a gallery");
  if (inst.query_pids.size() != nq || inst.query_cams.size() != nq ||
      inst.query_clothes.size() != nq || inst.gallery_pids.size() != ng ||
      inst.gallery_cams.size() != ng || inst.gallery_clothes.size() != ng) {
    throw ArgError("retrieval label counts do not match the features");
  }
  const std::size_t dim = inst.query_features.front().size();
  if (dim == 0) throw ArgError("retrieval features must be nonempty");
  for (const std::vector<double>& f : inst.query_features) {
    if (f.size() != dim) throw ArgError("retrieval feature widths differ");
  }
  for (const std::vector<double>& f : inst.gallery_features) {
    if (f.size() != dim) throw ArgError("retrieval feature widths differ");
  }
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

}  // namespace

ReidResult reid_eval(const RetrievalInstance& instance, Protocol protocol,
                     int max_rank) {
  check_instance(instance);
  if (max_rank < 1) throw ArgError("max_rank must be positive");

  ReidResult result;
  result.cmc.assign(max_rank, 0.0);
  const int ng = static_cast<int>(instance.gallery_features.size());

  std::vector<double> dist;
  std::vector<int> order;
  std::vector<char> positive;
  for (std::size_t qi = 0; qi < instance.query_features.size(); ++qi) {
    const int pid = instance.query_pids[qi];
    const int cam = instance.query_cams[qi];
    const int clothes = instance.query_clothes[qi];

    dist.clear();
    order.clear();
    positive.clear();
    int positives = 0;
    for (int gi = 0; gi < ng; ++gi) {
      const bool same_id = instance.gallery_pids[gi] == pid;
      const bool same_cam = instance.gallery_cams[gi] == cam;
      const bool same_clothes = instance.gallery_clothes[gi] == clothes;
      if (same_id && same_cam) continue;
      if (protocol == Protocol::kClothChanging && same_id && same_clothes) continue;
      if (protocol == Protocol::kSameClothes && same_id && !same_clothes) continue;
      const bool pos =
          protocol == Protocol::kSameClothes ? (same_id && same_clothes) : same_id;

      order.push_back(static_cast<int>(dist.size()));
      dist.push_back(euclidean(instance.query_features[qi],
                               instance.gallery_features[gi]));
      positive.push_back(pos ? 1 : 0);
      positives += pos ? 1 : 0;
      // `order` stores positions within the filtered list; the gallery index
      // ordering is preserved because the scan is ascending.
    }
    if (positives == 0) {
      ++result.queries_skipped;
      continue;
    }

    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dist[a] != dist[b]) return dist[a] < dist[b];
      return a < b;
    });

    double ap = 0.0;
    int hits = 0;
    int first_hit_rank = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (!positive[order[rank]]) continue;
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
      if (first_hit_rank == 0) first_hit_rank = static_cast<int>(rank) + 1;
    }
    result.mean_ap += ap / positives;
    for (int k = first_hit_rank; k <= max_rank; ++k) result.cmc[k - 1] += 1.0;
    ++result.queries_evaluated;
  }

  if (result.queries_evaluated > 0) {
    result.mean_ap /= result.queries_evaluated;
    for (double& c : result.cmc) c /= result.queries_evaluated;
  }
  return result;
}

}  // namespace surfcorr
