#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rslf/types.hpp"

namespace rslf {

/// Rigid set of world points observed over one exposure.
struct Scene {
  std::string name;
  std::uint64_t rng_seed = 0;
  std::vector<Eigen::Vector3d> points;

  [[nodiscard]] Eigen::Vector3d centroid() const {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : points) c += p;
    return points.empty() ? c : Eigen::Vector3d(c / static_cast<double>(points.size()));
  }
};

enum class MotionClass { Gs, Slow, Fast };

/// One entry of the built-in velocity table: per-frame intrinsic-XYZ Euler
/// rotation (radians) and translation (meters). Id 0 is the static case.
struct MotionScenario {
  int id = 0;
  Eigen::Vector3d euler_rotation{0.0, 0.0, 0.0};
  Eigen::Vector3d translation{0.0, 0.0, 0.0};
  MotionClass motion_class = MotionClass::Gs;
};

inline constexpr int kScenarioCount = 11;

/// Built-in velocity profiles 0 (static), 1-5 (slow), 6-10 (fast).
[[nodiscard]] MotionScenario scenario_by_id(int id);

[[nodiscard]] const char* motion_class_name(MotionClass c);

/// @brief Convert a per-frame velocity profile into a constant motion state.
///
/// frame_rows is the number of exposure rows one frame spans, so pairing the
/// result with intrinsics whose line_period equals 1/frame_rows keeps the
/// per-frame units consistent. The rotation is collapsed to axis-angle with
/// a nonnegative angle; `center` becomes the rotation center (callers
/// typically pass the scene centroid).
[[nodiscard]] MotionState scenario_to_motion(const MotionScenario& sc, int frame_rows,
                                             const Eigen::Vector3d& center = Eigen::Vector3d::Zero());

/// Depth the default rig's test scenes are anchored at.
inline constexpr double kDefaultSceneDepth = 7.0;

/// 9x9 grid, 6 mm pitch, centered on the optical axis; 50 mm main lens; one
/// frame of readout spans the full grid (line_period = 1/9).
[[nodiscard]] LightFieldIntrinsics default_rig();

/// Deterministic box-uniform scene around `center` (defaults to the rig's
/// anchor depth).
[[nodiscard]] Scene make_random_scene(const std::string& name, int n_points, std::uint64_t seed,
                                      const Eigen::Vector3d& center = {0.0, 0.0, kDefaultSceneDepth},
                                      const Eigen::Vector3d& half_extents = {1.0, 1.0, 1.0});

/// Sparse correspondences rendered by the simulator, with the rig and noise
/// settings that produced them. Records are sorted by (point_id, row, col)
/// and hold at most one record per (point_id, viewpoint).
struct ObservationSet {
  LightFieldIntrinsics intrinsics;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<ImagePoint> records;

  [[nodiscard]] std::size_t size() const { return records.size(); }
};

/// @brief Render a scene through the rolling-shutter projection model.
///
/// Projects every point into every viewpoint and adds isotropic Gaussian
/// noise of standard deviation noise_sigma to (x, y). The noise stream is
/// keyed by (seed, point_id, row, col), so the output is independent of
/// evaluation order. Depth-degenerate (point, viewpoint) pairs are dropped
/// individually; an entirely degenerate scene raises EmptyObservationsError.
[[nodiscard]] ObservationSet simulate(const Scene& scene, const MotionState& motion,
                                      const LightFieldIntrinsics& intr, double noise_sigma,
                                      std::uint64_t seed);

/// Scenario convenience overload: converts via scenario_to_motion with
/// frame_rows = grid_rows and the scene centroid as rotation center.
[[nodiscard]] ObservationSet simulate(const Scene& scene, const MotionScenario& sc,
                                      const LightFieldIntrinsics& intr, double noise_sigma,
                                      std::uint64_t seed);

/// Coverage diagnostic for joint shape/motion recovery.
struct ObservabilityReport {
  int n_points = 0;
  int n_rows = 0;   ///< distinct viewpoint rows covered
  int n_cols = 0;   ///< distinct viewpoint columns covered
  bool coplanarity_checked = false;
  bool non_coplanar = false;
  double min_singular_value = 0.0;
  double spread = 0.0;
  bool observable = false;
  std::string message;
};

/// @brief Check whether an observation set supports joint estimation.
///
/// Requires at least four distinct points seen over at least two viewpoint
/// rows and two columns. When a 3D hint cloud is supplied the points must
/// also be non-coplanar (smallest singular value of the centered point
/// matrix above 1e-9 of its largest).
[[nodiscard]] ObservabilityReport check_observability(const ObservationSet& obs,
                                                      const PointCloud* hint = nullptr);

/// Re-express a cloud in the camera frame of exposure row t_row under the
/// given motion; `anchor` labels the resulting frame.
[[nodiscard]] PointCloud reexpress_at_row(const PointCloud& cloud, const MotionState& motion,
                                          double line_period, int t_row, const std::string& anchor);

}  // namespace rslf
