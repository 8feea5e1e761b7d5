#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rslf {

/// Category used to map failures onto process exit codes.
enum class ErrorKind { Validation, NotObservable, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

/// Projection hit the view-plane singularity (|w| below threshold).
struct DepthDegenerateError : Error {
  explicit DepthDegenerateError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Pinhole reduction is undefined when either principal offset component is zero.
struct ReductionUndefinedError : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyObservationsError : ValidationError {
  using ValidationError::ValidationError;
};

struct AllPointsSkippedError : ValidationError {
  using ValidationError::ValidationError;
};

struct NoMatchesError : ValidationError {
  using ValidationError::ValidationError;
};

struct ZeroGroundTruthDepthError : ValidationError {
  using ValidationError::ValidationError;
};

struct IoError : ValidationError {
  using ValidationError::ValidationError;
};

struct NotObservableError : Error {
  explicit NotObservableError(const std::string& what) : Error(ErrorKind::NotObservable, what) {}
};

/// Optimization produced a non-finite parameter or objective value.
class NonFiniteError : public Error {
 public:
  NonFiniteError(int iteration, const std::string& what)
      : Error(ErrorKind::Numerical, what), iteration_(iteration) {}
  [[nodiscard]] int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// One cell of the viewpoint grid: integer indices plus metric coordinates
/// (s, t) on the view plane.
struct Viewpoint {
  int row = 0;
  int col = 0;
  double s = 0.0;
  double t = 0.0;
};

/// Calibration of a rolling-shutter light-field rig. Viewpoints live on a
/// regular grid on the view plane; rows of the grid are exposed sequentially,
/// line_period time units apart. All lengths are meters.
struct LightFieldIntrinsics {
  double main_focal = 0.05;             ///< main-lens focal length
  double micro_focal = 0.001;           ///< per-viewpoint (micro-lens) focal length
  Eigen::Vector2d principal_offset{0.0, 0.0};  ///< (O_x, O_y) offset of the main lens
  double view_plane_distance = 0.06;    ///< main lens to view plane
  double line_period = 1.0 / 9.0;       ///< time between two viewpoint rows
  int grid_rows = 9;
  int grid_cols = 9;
  double pitch = 0.006;                 ///< spacing between neighboring viewpoints
  Eigen::Vector2d grid_origin{-0.024, -0.024};  ///< metric (s, t) of grid cell (0, 0)

  /// Metric viewpoint for a grid cell; injective for pitch != 0.
  [[nodiscard]] Viewpoint viewpoint(int row, int col) const {
    return {row, col, grid_origin.x() + pitch * col, grid_origin.y() + pitch * row};
  }

  /// Row whose exposure time anchors "middle of exposure".
  [[nodiscard]] int center_row() const { return grid_rows / 2; }
};

/// Rigid world-to-camera transform at the start of exposure (row 0).
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Constant instantaneous motion over one exposure: rotation of angular_speed
/// about the unit axis through `center`, plus linear velocity.
struct MotionState {
  Eigen::Vector3d axis{0.0, 0.0, 1.0};
  double angular_speed = 0.0;           ///< radians per time unit
  Eigen::Vector3d velocity{0.0, 0.0, 0.0};  ///< meters per time unit
  Eigen::Vector3d center{0.0, 0.0, 0.0};    ///< rotation center g

  [[nodiscard]] static MotionState none() { return {}; }
};

/// A 2D measurement in metric micro-image coordinates at one viewpoint.
struct ImagePoint {
  std::int64_t point_id = 0;
  Viewpoint view;
  double x = 0.0;
  double y = 0.0;
};

/// Similarity frame used to condition the optimization: world = center + scale * local.
struct NormalizationFrame {
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  double scale = 1.0;
};

/// 3D points keyed by id, with the normalization frame they were produced in
/// and a label for the exposure time they are anchored to.
struct PointCloud {
  std::vector<std::int64_t> ids;
  std::vector<Eigen::Vector3d> positions;
  NormalizationFrame frame;
  std::string anchor = "t0";

  [[nodiscard]] std::size_t size() const { return ids.size(); }
  [[nodiscard]] bool empty() const { return ids.empty(); }

  [[nodiscard]] Eigen::Vector3d centroid() const {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : positions) c += p;
    return positions.empty() ? c : Eigen::Vector3d(c / static_cast<double>(positions.size()));
  }
};

}  // namespace rslf
