#pragma once

#include <Eigen/Core>

#include "rslf/types.hpp"

namespace rslf {

/// Image point plus the homogeneous depth factor it was divided by.
struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
};

/// Result of collapsing the light-field intrinsics at the grid origin into a
/// single pinhole: projection = K * D * (p, 1).
struct PinholeReduction {
  Eigen::Matrix3d K;
  Eigen::Matrix<double, 3, 4> D;
};

/// @brief 3x4 projection tensor of one viewpoint.
///
/// Maps a homogeneous camera-frame point through the main lens, the shift to
/// the view plane, and the viewpoint's own pinhole:
///   row 0: [f, 0, -(f/F)(O_x - s), f (O_x - s)]
///   row 1: [0, f, -(f/F)(O_y - t), f (O_y - t)]
///   row 2: [0, 0, 1 - d/F,         d          ]
[[nodiscard]] Eigen::Matrix<double, 3, 4> intrinsic_tensor(const LightFieldIntrinsics& intr,
                                                           const Viewpoint& vp);

/// @brief Incremental rotation accumulated by exposure row t_row.
///
/// Rodrigues form about motion.axis with angle angular_speed * line_period *
/// t_row. Exactly identity for zero speed or zero row.
[[nodiscard]] Eigen::Matrix3d delta_rotation(const MotionState& motion, double line_period,
                                             int t_row);

/// Incremental translation accumulated by exposure row t_row.
[[nodiscard]] Eigen::Vector3d delta_translation(const MotionState& motion, double line_period,
                                                int t_row);

/// @brief Rotation matrix from a rotation vector (axis * angle).
///
/// Smooth in the vector including the origin (series branch below 1e-8 of
/// squared angle), so it is safe to differentiate through zero.
[[nodiscard]] Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& phi);

/// Camera-frame position of a world point as seen by exposure row t_row:
/// q = g + dR (R p + T - g) + dT.
[[nodiscard]] Eigen::Vector3d motion_displaced_point(const Eigen::Vector3d& p_world,
                                                     const CameraPose& pose,
                                                     const MotionState& motion,
                                                     double line_period, int t_row);

/// @brief Full rolling-shutter light-field projection of one world point.
///
/// Applies the row's incremental pose about motion.center, then the
/// viewpoint's projection tensor, and divides by the homogeneous factor w.
/// @throws DepthDegenerateError if |w| < w_epsilon.
[[nodiscard]] ProjectedPoint project_point(const Eigen::Vector3d& p_world, const CameraPose& pose,
                                           const MotionState& motion,
                                           const LightFieldIntrinsics& intr, const Viewpoint& vp,
                                           double w_epsilon = 1e-12);

/// @brief Static (global-shutter) projection of one world point.
///
/// Computed as the explicit matrix chain lens -> view-plane shift ->
/// viewpoint pinhole, which must agree with project_point under zero motion.
[[nodiscard]] ProjectedPoint gs_projection(const Eigen::Vector3d& p_world, const CameraPose& pose,
                                           const LightFieldIntrinsics& intr, const Viewpoint& vp,
                                           double w_epsilon = 1e-12);

/// @brief Equivalent pinhole factorization at the grid origin (s = t = 0).
///
/// K carries the principal point c_x = (d/F - 1)(f/F) O_x (same pattern for
/// c_y); D is the unique 3x4 with K * D equal to the viewpoint tensor at the
/// origin.
/// @throws ReductionUndefinedError if either principal offset component is 0.
[[nodiscard]] PinholeReduction pinhole_reduction(const LightFieldIntrinsics& intr);

}  // namespace rslf
