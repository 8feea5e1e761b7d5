#pragma once

#include <vector>

#include "rslf/sim.hpp"
#include "rslf/types.hpp"

namespace rslf {

/// Output of the coarse linear triangulation stage.
struct InitReport {
  PointCloud points;                       ///< triangulated estimates, ids ascending
  std::vector<double> per_point_residual;  ///< RMS algebraic residual (meters), parallel to points
  std::vector<std::int64_t> skipped;       ///< ids with insufficient same-row coverage
};

/// @brief Coarse 3D estimates from horizontal-only multi-view triangulation.
///
/// For each point the best-covered viewpoint row is selected (ties go to the
/// lowest row index); all of that row's observations share one exposure time,
/// so treating them as static is self-consistent. Each observation (x, y)
/// contributes the two linear equations x*w = u and y*w = v of its viewpoint
/// tensor; the stacked 2Nx3 system is solved by least squares. Rows are
/// scaled by the micro-lens focal so residuals read in meters. Points with
/// fewer than two usable same-row observations, or a rank-deficient system,
/// are reported in `skipped`.
/// @throws AllPointsSkippedError when nothing is triangulable.
[[nodiscard]] InitReport triangulate_horizontal(const ObservationSet& obs);

}  // namespace rslf
