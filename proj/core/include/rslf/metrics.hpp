#pragma once

#include "rslf/sim.hpp"
#include "rslf/types.hpp"

namespace rslf {

/// Which per-point scalar the error metrics compare.
enum class ErrorQuantity {
  Depth,      ///< z coordinate in the clouds' shared anchor frame (default).
  Euclidean,  ///< full 3D distance diagnostics: |p_e - p_g| against |p_g|.
};

/// Six-number error summary over the points shared by two clouds.
struct MetricsReport {
  double abs_rel = 0.0;   ///< mean |e - g| / |g|
  double abs_diff = 0.0;  ///< mean |e - g|
  double rms = 0.0;       ///< sqrt(mean (e - g)^2)
  double delta1 = 0.0;    ///< fraction with max(e/g, g/e) in (0, 1.25)
  double delta2 = 0.0;    ///< threshold 1.25^2
  double delta3 = 0.0;    ///< threshold 1.25^3
  std::size_t n_points = 0;
  std::string frame;  ///< anchor label the comparison was made in
};

/// Image-space displacement stats between two observation sets of the same
/// scene, matched by (point_id, row, col).
struct DistortionSummary {
  double max_displacement = 0.0;
  double mean_displacement = 0.0;
  std::size_t n_matched = 0;
};

/// Compares clouds point-id by point-id.
///
/// Depth mode compares z; Euclidean mode compares the distance |p_e - p_g|
/// (with |p_g| as the ratio/normalization reference). delta_k counts a pair
/// only when the symmetric ratio max(e/g, g/e) is positive, so opposite-sign
/// estimates never pass a threshold.
///
/// Throws NoMatchesError when the clouds share no point id, ValidationError
/// when their anchor labels differ, and ZeroGroundTruthDepthError when a
/// matched ground-truth value is exactly zero.
[[nodiscard]] MetricsReport compute_metrics(const PointCloud& est, const PointCloud& gt,
                                            ErrorQuantity quantity = ErrorQuantity::Depth);

/// Max/mean displacement between matched records; throws NoMatchesError when
/// the sets share no (point_id, row, col) key.
[[nodiscard]] DistortionSummary distortion_summary(const ObservationSet& gs_obs,
                                                   const ObservationSet& rs_obs);

}  // namespace rslf
