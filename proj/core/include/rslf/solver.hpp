#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "rslf/init.hpp"
#include "rslf/sim.hpp"
#include "rslf/types.hpp"

namespace rslf {

/// Ablation modes of the joint solve.
///  - Full:   everything free, points seeded from the linear init.
///  - NoInit: points seeded as one cluster at the linear init's centroid.
///  - NoReg:  rotation center fixed at the world origin, no normalization.
///  - NoRS:   motion frozen at zero (static multi-view refinement only).
enum class SolveMode { Full, NoInit, NoReg, NoRS };

[[nodiscard]] const char* mode_name(SolveMode mode);
[[nodiscard]] SolveMode mode_from_name(const std::string& name);

struct SolveConfig {
  double learning_rate = 0.01;
  int iterations = 5000;
  SolveMode mode = SolveMode::Full;
  bool gradient_check = false;   ///< spot-check the gradient at the start and record the error
  double w_epsilon = 1e-12;      ///< depth-degeneracy threshold inside the residual
  std::optional<double> convergence_tol;      ///< opt-in early stop: relative eps decrease per 100 iterations
  std::optional<double> degenerate_sentinel;  ///< per-observation residual used instead of raising
  bool force = false;            ///< proceed despite a failed observability check
};

/// Free parameters of the estimation: normalized point coordinates plus the
/// shared rotation center, rotation vector (angular_speed * axis), and linear
/// velocity. World position of point i is center + scale * points[i], with
/// scale taken from the NormalizationFrame.
struct BundleParams {
  std::vector<std::int64_t> ids;         ///< ascending point ids
  std::vector<Eigen::Vector3d> points;   ///< normalized coordinates, parallel to ids
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  Eigen::Vector3d rotation{0.0, 0.0, 0.0};
  Eigen::Vector3d velocity{0.0, 0.0, 0.0};

  /// Flat layout: [points (3 each, id order), center, rotation, velocity].
  [[nodiscard]] Eigen::Index dof() const {
    return 3 * static_cast<Eigen::Index>(points.size()) + 9;
  }
};

struct NormalizeResult {
  PointCloud points;         ///< normalized coordinates, frame echoed
  NormalizationFrame frame;
};

/// @brief Center a cloud on its mean and scale it into [-1, 1].
///
/// The scale is the largest absolute coordinate deviation from the mean over
/// all points, clamped to at least 1e-9 so a degenerate cluster stays finite.
[[nodiscard]] NormalizeResult normalize(const PointCloud& cloud);

/// @brief Re-projection residual vector, two entries per observation.
///
/// Entry pair per record: (x_measured - x_predicted, y_measured - y_predicted)
/// where the prediction projects center + scale * points[i] through the
/// rolling-shutter model with identity static pose and rotation about
/// `params.center`. Only the scale of `frame` is read; the center parameter
/// supersedes the frame's center. The squared norm of this vector is the
/// objective the solver minimizes.
/// @throws DepthDegenerateError unless a sentinel residual is configured.
[[nodiscard]] Eigen::VectorXd residual(const BundleParams& params, const ObservationSet& obs,
                                       const NormalizationFrame& frame, double w_epsilon = 1e-12,
                                       std::optional<double> sentinel = {});

/// @brief Exact objective gradient in the flat parameter layout.
///
/// Propagated by forward-mode dual numbers, so it is analytic up to rounding.
/// Parameters frozen by `mode` (center for NoReg; rotation and velocity for
/// NoRS) get exactly zero entries.
[[nodiscard]] Eigen::VectorXd gradient(const BundleParams& params, const ObservationSet& obs,
                                       const NormalizationFrame& frame,
                                       SolveMode mode = SolveMode::Full, double w_epsilon = 1e-12,
                                       std::optional<double> sentinel = {});

struct SolveReport {
  PointCloud points;          ///< de-normalized, world frame (exposure row 0)
  MotionState motion;
  NormalizationFrame frame;   ///< scale used during the solve, final center
  SolveMode mode = SolveMode::Full;
  double final_epsilon = 0.0;
  std::vector<double> epsilon_trace;  ///< objective before each update, plus the final value
  ObservabilityReport observability;
  std::optional<double> gradient_check_error;  ///< set when cfg.gradient_check
  SolveConfig config;
};

/// @brief Joint shape/motion bundle adjustment.
///
/// First-order adaptive-moment descent (Adam, beta1 = 0.9, beta2 = 0.999,
/// eps = 1e-8) over {normalized points, center, rotation vector, velocity},
/// starting from the linear init with zero motion. See SolveMode for what
/// each ablation changes. Deterministic: identical inputs give bit-identical
/// reports.
/// @throws NotObservableError if the coverage pre-check fails and cfg.force
///         is not set; NonFiniteError if the objective or a parameter leaves
///         the finite range (reports the iteration).
[[nodiscard]] SolveReport solve(const ObservationSet& obs, const InitReport& init,
                                const SolveConfig& cfg);

}  // namespace rslf
