#include "rslf/geometry.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <string>

namespace rslf {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
  Eigen::Matrix3d s;
  s << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return s;
}

ProjectedPoint divide(const Eigen::Vector3d& uvw, double w_epsilon) {
  if (std::abs(uvw.z()) < w_epsilon) {
    throw DepthDegenerateError("projection depth factor |w| = " + std::to_string(std::abs(uvw.z())) +
                               " below threshold; point lies on the view-plane singularity");
  }
  return {uvw.x() / uvw.z(), uvw.y() / uvw.z(), uvw.z()};
}

}  // namespace

Eigen::Matrix<double, 3, 4> intrinsic_tensor(const LightFieldIntrinsics& intr, const Viewpoint& vp) {
  const double F = intr.main_focal;
  const double f = intr.micro_focal;
  const double d = intr.view_plane_distance;
  const double ox = intr.principal_offset.x() - vp.s;
  const double oy = intr.principal_offset.y() - vp.t;

  Eigen::Matrix<double, 3, 4> k;
  k << f, 0.0, -(f / F) * ox, f * ox,
       0.0, f, -(f / F) * oy, f * oy,
       0.0, 0.0, 1.0 - d / F, d;
  return k;
}

Eigen::Matrix3d delta_rotation(const MotionState& motion, double line_period, int t_row) {
  const double theta = motion.angular_speed * line_period * static_cast<double>(t_row);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const Eigen::Vector3d& a = motion.axis;
  return a * a.transpose() * (1.0 - c) + Eigen::Matrix3d::Identity() * c + skew(a) * s;
}

Eigen::Vector3d delta_translation(const MotionState& motion, double line_period, int t_row) {
  return motion.velocity * (line_period * static_cast<double>(t_row));
}

Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& phi) {
  const double u = phi.squaredNorm();
  double sinc = 0.0;   // sin(theta)/theta
  double verc = 0.0;   // (1 - cos(theta))/theta^2
  if (u < 1e-8) {
    sinc = 1.0 - u / 6.0 + u * u / 120.0;
    verc = 0.5 - u / 24.0 + u * u / 720.0;
  } else {
    const double theta = std::sqrt(u);
    sinc = std::sin(theta) / theta;
    verc = (1.0 - std::cos(theta)) / u;
  }
  const Eigen::Matrix3d px = skew(phi);
  return Eigen::Matrix3d::Identity() + sinc * px + verc * px * px;
}

Eigen::Vector3d motion_displaced_point(const Eigen::Vector3d& p_world, const CameraPose& pose,
                                       const MotionState& motion, double line_period, int t_row) {
  const Eigen::Vector3d p_cam = pose.rotation * p_world + pose.translation;
  const Eigen::Matrix3d dr = delta_rotation(motion, line_period, t_row);
  const Eigen::Vector3d dt = delta_translation(motion, line_period, t_row);
  return motion.center + dr * (p_cam - motion.center) + dt;
}

ProjectedPoint project_point(const Eigen::Vector3d& p_world, const CameraPose& pose,
                             const MotionState& motion, const LightFieldIntrinsics& intr,
                             const Viewpoint& vp, double w_epsilon) {
  const Eigen::Vector3d q = motion_displaced_point(p_world, pose, motion, intr.line_period, vp.row);
  const Eigen::Matrix<double, 3, 4> k = intrinsic_tensor(intr, vp);
  return divide(k * q.homogeneous(), w_epsilon);
}

ProjectedPoint gs_projection(const Eigen::Vector3d& p_world, const CameraPose& pose,
                             const LightFieldIntrinsics& intr, const Viewpoint& vp,
                             double w_epsilon) {
  const double F = intr.main_focal;
  const double f = intr.micro_focal;
  const Eigen::Vector3d p_cam = pose.rotation * p_world + pose.translation;

  // Thin main lens: homogeneous scale becomes 1 - z/F.
  Eigen::Vector4d v = p_cam.homogeneous();
  v.w() = 1.0 - p_cam.z() / F;

  // Shift into the view-plane frame.
  Eigen::Vector4d sensor = v;
  sensor.x() += intr.principal_offset.x() * v.w();
  sensor.y() += intr.principal_offset.y() * v.w();
  sensor.z() += intr.view_plane_distance * v.w();

  // Viewpoint pinhole at (s, t, 0).
  const Eigen::Vector3d uvw(f * sensor.x() - f * vp.s * sensor.w(),
                            f * sensor.y() - f * vp.t * sensor.w(), sensor.z());
  return divide(uvw, w_epsilon);
}

PinholeReduction pinhole_reduction(const LightFieldIntrinsics& intr) {
  const double ox = intr.principal_offset.x();
  const double oy = intr.principal_offset.y();
  if (ox == 0.0 || oy == 0.0) {
    throw ReductionUndefinedError(
        "pinhole reduction undefined: both principal offset components must be nonzero");
  }
  const double F = intr.main_focal;
  const double f = intr.micro_focal;
  const double d = intr.view_plane_distance;

  const double cx = (d / F - 1.0) * (f / F) * ox;
  const double cy = (d / F - 1.0) * (f / F) * oy;

  PinholeReduction r;
  r.K << f, 0.0, cx, 0.0, f, cy, 0.0, 0.0, 1.0;

  // D is pinned by requiring K * D to reproduce the origin viewpoint tensor.
  Eigen::Matrix3d kinv;
  kinv << 1.0 / f, 0.0, -cx / f, 0.0, 1.0 / f, -cy / f, 0.0, 0.0, 1.0;
  r.D = kinv * intrinsic_tensor(intr, Viewpoint{0, 0, 0.0, 0.0});
  return r;
}

}  // namespace rslf
