#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rslf/geometry.hpp"
#include "rslf/sim.hpp"

using namespace rslf;

namespace {

Eigen::Vector3d rand_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

CameraPose rand_pose(std::mt19937_64& rng) {
  CameraPose pose;
  pose.rotation = rotation_from_vector(rand_vec(rng, -0.3, 0.3));
  pose.translation = rand_vec(rng, -0.5, 0.5);
  return pose;
}

MotionState rand_motion(std::mt19937_64& rng) {
  MotionState m;
  m.axis = rand_vec(rng, -1.0, 1.0).normalized();
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  m.angular_speed = u(rng);
  m.velocity = rand_vec(rng, -1.0, 1.0);
  m.center = rand_vec(rng, -0.5, 0.5);
  return m;
}

}  // namespace

TEST_CASE("viewpoint tensor equals its explicit factored form") {
  const auto intr = default_rig();
  double worst = 0.0;
  for (int r = 0; r < intr.grid_rows; ++r) {
    for (int c = 0; c < intr.grid_cols; ++c) {
      const auto vp = intr.viewpoint(r, c);
      const Eigen::Matrix<double, 3, 4> got = intrinsic_tensor(intr, vp);
      const Eigen::Matrix<double, 3, 4> want = oracle::tensor_by_factors(intr, vp);
      worst = std::max(worst, (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("incremental rotation is orthonormal with unit determinant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    MotionState m;
    m.axis = rand_vec(rng, -1.0, 1.0).normalized();
    m.angular_speed = 3.0 * u(rng);
    const double tau = 0.05 + 0.2 * std::abs(u(rng));
    const int row = static_cast<int>(8.0 * std::abs(u(rng)));
    const Eigen::Matrix3d r = delta_rotation(m, tau, row);
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-10);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("coaxial incremental rotations compose by adding their row times") {
  MotionState m;
  m.axis = Eigen::Vector3d(1.0, -2.0, 0.5).normalized();
  m.angular_speed = 0.7;
  const double tau = 1.0 / 9.0;
  const Eigen::Matrix3d a = delta_rotation(m, tau, 3);
  const Eigen::Matrix3d b = delta_rotation(m, tau, 5);
  const Eigen::Matrix3d c = delta_rotation(m, tau, 8);
  CHECK((a * b - c).norm() < 1e-10);
}

TEST_CASE("incremental pose is exactly identity at row zero or zero speed") {
  MotionState m;
  m.axis = Eigen::Vector3d::UnitY();
  m.angular_speed = 2.0;
  m.velocity = {1.0, 2.0, 3.0};
  CHECK(delta_rotation(m, 0.5, 0).isIdentity(0.0));
  CHECK(delta_translation(m, 0.5, 0).norm() == 0.0);
  m.angular_speed = 0.0;
  CHECK(delta_rotation(m, 0.5, 7).isIdentity(0.0));
}

TEST_CASE("rotation from a vector crosses the small-angle branch smoothly") {
  const Eigen::Vector3d dir = Eigen::Vector3d(0.3, -0.4, 0.8).normalized();
  // the series branch engages below 1e-4 of angle; straddle the switch
  for (const double theta : {1e-5, 9.99e-5, 1.0001e-4, 1e-3, 1.0}) {
    const Eigen::Matrix3d got = rotation_from_vector(theta * dir);
    const Eigen::Matrix3d want = Eigen::AngleAxisd(theta, dir).toRotationMatrix();
    CHECK((got - want).norm() < 1e-12);
  }
  CHECK(rotation_from_vector(Eigen::Vector3d::Zero()).isIdentity(0.0));
}

TEST_CASE("row displacement reduces to the rigid pose at row zero") {
  std::mt19937_64 rng(3);
  const auto pose = rand_pose(rng);
  const auto motion = rand_motion(rng);
  const Eigen::Vector3d p = rand_vec(rng, -1.0, 1.0) + Eigen::Vector3d(0, 0, 7);
  const Eigen::Vector3d q = motion_displaced_point(p, pose, motion, 1.0 / 9.0, 0);
  const Eigen::Vector3d want = pose.rotation * p + pose.translation;
  CHECK((q - want).norm() < 1e-14);
}

TEST_CASE("rolling-shutter projection matches a stepwise matrix-chain evaluation") {
  const auto intr = default_rig();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> grid(0, 8);
  for (int k = 0; k < 300; ++k) {
    const auto pose = rand_pose(rng);
    const auto motion = rand_motion(rng);
    const Eigen::Vector3d p = rand_vec(rng, -1.5, 1.5) + Eigen::Vector3d(0, 0, 7);
    const auto vp = intr.viewpoint(grid(rng), grid(rng));
    const ProjectedPoint got = project_point(p, pose, motion, intr, vp);
    const ProjectedPoint want = oracle::project_stepwise(p, pose, motion, intr, vp);
    CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
    CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
    CHECK(got.w == doctest::Approx(want.w).epsilon(1e-12));
  }
}

TEST_CASE("zero line period and zero motion both reduce to the static projection") {
  auto intr = default_rig();
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> grid(0, 8);
  for (int k = 0; k < 200; ++k) {
    const auto pose = rand_pose(rng);
    const auto motion = rand_motion(rng);
    const Eigen::Vector3d p = rand_vec(rng, -1.5, 1.5) + Eigen::Vector3d(0, 0, 7);
    const auto vp = intr.viewpoint(grid(rng), grid(rng));
    const ProjectedPoint want = gs_projection(p, pose, intr, vp);

    auto instant = intr;
    instant.line_period = 0.0;
    const ProjectedPoint a = project_point(p, pose, motion, instant, vp);
    CHECK(a.x == doctest::Approx(want.x).epsilon(1e-13));
    CHECK(a.y == doctest::Approx(want.y).epsilon(1e-13));

    const ProjectedPoint b = project_point(p, pose, MotionState::none(), intr, vp);
    CHECK(b.x == doctest::Approx(want.x).epsilon(1e-13));
    CHECK(b.y == doctest::Approx(want.y).epsilon(1e-13));
  }
}

TEST_CASE("projection refuses a point on the view-plane singularity") {
  const auto intr = default_rig();
  // w = (1 - d/F) z + d vanishes at z = d / (d/F - 1)
  const double z_sing =
      intr.view_plane_distance / (intr.view_plane_distance / intr.main_focal - 1.0);
  const Eigen::Vector3d p{0.01, -0.02, z_sing};
  const auto vp = intr.viewpoint(4, 4);
  CHECK_THROWS_AS((void)gs_projection(p, CameraPose{}, intr, vp), DepthDegenerateError);
  CHECK_THROWS_AS((void)project_point(p, CameraPose{}, MotionState::none(), intr, vp),
                  DepthDegenerateError);
  // nudging the point off the singular plane restores a finite result
  const Eigen::Vector3d ok{0.01, -0.02, z_sing + 0.01};
  CHECK(std::isfinite(gs_projection(ok, CameraPose{}, intr, vp).x));
}

TEST_CASE("origin-viewpoint projection factors into a pinhole") {
  auto intr = default_rig();
  intr.principal_offset = {0.004, -0.003};
  const PinholeReduction pr = pinhole_reduction(intr);
  const Eigen::Matrix<double, 3, 4> got = pr.K * pr.D;
  const Eigen::Matrix<double, 3, 4> want = intrinsic_tensor(intr, Viewpoint{0, 0, 0.0, 0.0});
  CHECK((got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pinhole factorization is undefined for a centered main lens") {
  auto intr = default_rig();
  intr.principal_offset = {0.0, 0.01};
  CHECK_THROWS_AS((void)pinhole_reduction(intr), ReductionUndefinedError);
  intr.principal_offset = {0.01, 0.0};
  CHECK_THROWS_AS((void)pinhole_reduction(intr), ReductionUndefinedError);
}
