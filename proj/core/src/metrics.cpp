#include "rslf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace rslf {

MetricsReport compute_metrics(const PointCloud& est, const PointCloud& gt,
                              ErrorQuantity quantity) {
  if (est.anchor != gt.anchor) {
    throw ValidationError("clouds are anchored at different times ('" + est.anchor + "' vs '" +
                          gt.anchor + "'); re-express one before comparing");
  }
  std::map<std::int64_t, Eigen::Vector3d> gt_by_id;
  for (std::size_t i = 0; i < gt.size(); ++i) gt_by_id[gt.ids[i]] = gt.positions[i];

  double sum_rel = 0.0, sum_abs = 0.0, sum_sq = 0.0;
  std::size_t hits[3] = {0, 0, 0};
  std::size_t n = 0;
  const double thresholds[3] = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};
  for (std::size_t i = 0; i < est.size(); ++i) {
    const auto it = gt_by_id.find(est.ids[i]);
    if (it == gt_by_id.end()) continue;
    double diff, ref, ratio;
    if (quantity == ErrorQuantity::Depth) {
      const double e = est.positions[i].z();
      const double g = it->second.z();
      if (g == 0.0) throw ZeroGroundTruthDepthError("ground-truth depth is zero for point " +
                                                    std::to_string(est.ids[i]));
      diff = e - g;
      ref = g;
      ratio = std::max(e / g, g / e);
    } else {
      const double err = (est.positions[i] - it->second).norm();
      const double g = it->second.norm();
      if (g == 0.0) throw ZeroGroundTruthDepthError("ground-truth point " +
                                                    std::to_string(est.ids[i]) +
                                                    " is at the origin; ratio undefined");
      diff = err;
      ref = g;
      ratio = (g + err) / g;  // >= 1, already the symmetric max
    }
    sum_rel += std::abs(diff) / std::abs(ref);
    sum_abs += std::abs(diff);
    sum_sq += diff * diff;
    for (int k = 0; k < 3; ++k) {
      if (ratio > 0.0 && ratio < thresholds[k]) ++hits[k];
    }
    ++n;
  }
  if (n == 0) throw NoMatchesError("clouds share no point id");

  MetricsReport r;
  r.n_points = n;
  r.frame = gt.anchor;
  const auto dn = static_cast<double>(n);
  r.abs_rel = sum_rel / dn;
  r.abs_diff = sum_abs / dn;
  r.rms = std::sqrt(sum_sq / dn);
  r.delta1 = static_cast<double>(hits[0]) / dn;
  r.delta2 = static_cast<double>(hits[1]) / dn;
  r.delta3 = static_cast<double>(hits[2]) / dn;
  return r;
}

DistortionSummary distortion_summary(const ObservationSet& gs_obs, const ObservationSet& rs_obs) {
  std::map<std::tuple<std::int64_t, int, int>, std::size_t> index;
  for (std::size_t i = 0; i < rs_obs.records.size(); ++i) {
    const auto& r = rs_obs.records[i];
    index[{r.point_id, r.view.row, r.view.col}] = i;
  }
  DistortionSummary out;
  double sum = 0.0;
  for (const auto& g : gs_obs.records) {
    const auto it = index.find({g.point_id, g.view.row, g.view.col});
    if (it == index.end()) continue;
    const auto& r = rs_obs.records[it->second];
    const double d = std::hypot(r.x - g.x, r.y - g.y);
    out.max_displacement = std::max(out.max_displacement, d);
    sum += d;
    ++out.n_matched;
  }
  if (out.n_matched == 0) throw NoMatchesError("observation sets share no (point, viewpoint) key");
  out.mean_displacement = sum / static_cast<double>(out.n_matched);
  return out;
}

}  // namespace rslf
