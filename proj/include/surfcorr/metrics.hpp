#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surfcorr/correspondence.hpp"
#include "surfcorr/geodesics.hpp"
#include "surfcorr/grid.hpp"

namespace surfcorr {

inline constexpr double kGpsSigma = 0.255;

// Mean Gaussian kernel of geodesic error over the annotated pixels:
// (1/N) Σ exp(-g²/(2σ²)). Every annotated pixel must carry a prediction and
// every annotated vertex must have a cached distance row reachable via
// lookup; violations throw ValidationError.
double gps(const CorrespondenceSet& gt, const VertexMap& pred,
           const GeodesicCache& cache, double sigma = kGpsSigma);

struct GpsConfig {
  double threshold_lo = 0.50;
  double threshold_hi = 0.95;
  double threshold_step = 0.05;
  double sigma = kGpsSigma;
};

struct GpsThresholdRow {
  double threshold = 0.0;
  double ap = 0.0;  // fraction of images with predictions scoring >= threshold
  double ar = 0.0;  // fraction of all annotated images scoring >= threshold
};

struct GpsTable {
  std::vector<GpsThresholdRow> rows;
  double mean_ap = 0.0;
  double mean_ar = 0.0;
  int images_predicted = 0;
  int images_annotated = 0;
};

// Image-level AP/AR over GPS thresholds. nullopt marks an image without
// predictions: it joins the AR denominator only. Throws ArgError on an
// empty dataset.
GpsTable gps_ap_ar(const std::vector<std::optional<double>>& per_image_gps,
                   const GpsConfig& config = {});

// Convenience wrapper scoring each (gt, pred) pair first; a missing pred is
// an image without predictions.
GpsTable gps_ap_ar(
    const std::vector<std::pair<CorrespondenceSet, std::optional<VertexMap>>>&
        dataset,
    const GeodesicCache& cache, const GpsConfig& config = {});

struct RetrievalInstance {
  std::vector<std::vector<double>> query_features;
  std::vector<int> query_pids, query_cams, query_clothes;
  std::vector<std::vector<double>> gallery_features;
  std::vector<int> gallery_pids, gallery_cams, gallery_clothes;
};

enum class Protocol { kStandard, kClothChanging, kSameClothes };

Protocol protocol_from_string(const std::string& name);

struct ReidResult {
  double mean_ap = 0.0;
  std::vector<double> cmc;  // cmc[k-1] = rank-k accuracy
  int queries_evaluated = 0;
  int queries_skipped = 0;  // queries left with no valid positive
};

// Euclidean-distance retrieval, ascending, ties broken by gallery index.
// All protocols drop gallery entries sharing the query's id and camera;
// cloth-changing additionally drops same-id same-clothes entries;
// same-clothes counts only same-id same-clothes entries as positives.
ReidResult reid_eval(const RetrievalInstance& instance, Protocol protocol,
                     int max_rank = 10);

}  // namespace surfcorr
