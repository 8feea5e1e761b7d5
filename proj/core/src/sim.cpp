#include "rslf/sim.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "rslf/geometry.hpp"

namespace rslf {

namespace {

// SplitMix64: tiny counter-based generator so noise draws can be keyed by
// record identity instead of evaluation order.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ (b * 0xff51afd7ed558ccdULL)); }

// Uniform in (0, 1]: never zero, so it is safe under a logarithm.
double uniform_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// One Box-Muller pair from a record key.
std::pair<double, double> gaussian_pair(std::uint64_t key) {
  const double u1 = uniform_open(splitmix64(key));
  const double u2 = uniform_open(splitmix64(key ^ 0x6a09e667f3bcc909ULL));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace

MotionScenario scenario_by_id(int id) {
  if (id < 0 || id >= kScenarioCount) {
    throw ValidationError("scenario id must be in [0, 10], got " + std::to_string(id));
  }
  constexpr double pi = std::numbers::pi;
  // Velocity table: per-frame Euler rotation (rad) and translation (m).
  static const double rot[kScenarioCount][3] = {
      {0.0, 0.0, 0.0},       {0.0, 0.0, pi / 12.0},  {0.0, 0.0, 0.0},
      {-pi / 18.0, 0.0, 0.0}, {pi / 18.0, pi / 18.0, 0.0}, {0.0, 0.0, pi / 12.0},
      {0.0, 0.0, pi / 3.0},  {0.0, 0.0, 0.0},        {-pi / 3.0, 0.0, 0.0},
      {2.0 * pi / 9.0, 0.0, 0.0}, {0.0, 0.0, pi / 2.0},
  };
  static const double tr[kScenarioCount][3] = {
      {0.0, 0.0, 0.0},   {0.0, 0.0, 0.0},    {0.0, -0.2, 0.0}, {0.0, -0.05, 0.05},
      {0.0, 0.0, 0.2},   {0.0, -0.2, 0.0},   {0.0, 0.0, 0.0},  {0.0, -0.8, 0.0},
      {0.0, 0.4, 0.2},   {0.4, -1.6, -0.8},  {0.0, -0.8, 0.0},
  };
  MotionScenario sc;
  sc.id = id;
  sc.euler_rotation = Eigen::Vector3d(rot[id][0], rot[id][1], rot[id][2]);
  sc.translation = Eigen::Vector3d(tr[id][0], tr[id][1], tr[id][2]);
  sc.motion_class = id == 0 ? MotionClass::Gs : (id <= 5 ? MotionClass::Slow : MotionClass::Fast);
  return sc;
}

const char* motion_class_name(MotionClass c) {
  switch (c) {
    case MotionClass::Gs: return "gs";
    case MotionClass::Slow: return "slow";
    case MotionClass::Fast: return "fast";
  }
  return "?";
}

MotionState scenario_to_motion(const MotionScenario& sc, int frame_rows,
                               const Eigen::Vector3d& center) {
  if (frame_rows < 1) {
    throw ValidationError("frame_rows must be >= 1, got " + std::to_string(frame_rows));
  }
  // Intrinsic XYZ Euler composition.
  const Eigen::Matrix3d r =
      (Eigen::AngleAxisd(sc.euler_rotation.x(), Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(sc.euler_rotation.y(), Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(sc.euler_rotation.z(), Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();
  const Eigen::AngleAxisd aa(r);

  MotionState m;
  m.axis = aa.angle() == 0.0 ? Eigen::Vector3d::UnitZ() : aa.axis();
  m.angular_speed = aa.angle();
  m.velocity = sc.translation;
  m.center = center;
  return m;
}

LightFieldIntrinsics default_rig() {
  LightFieldIntrinsics intr;
  intr.main_focal = 0.05;
  intr.micro_focal = 0.001;
  intr.principal_offset = Eigen::Vector2d::Zero();
  intr.view_plane_distance = 0.06;
  intr.grid_rows = 9;
  intr.grid_cols = 9;
  intr.pitch = 0.006;
  intr.grid_origin = Eigen::Vector2d(-0.024, -0.024);
  intr.line_period = 1.0 / 9.0;  // one frame of readout covers the grid
  return intr;
}

Scene make_random_scene(const std::string& name, int n_points, std::uint64_t seed,
                        const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents) {
  if (n_points < 1) throw ValidationError("scene needs at least one point");
  Scene scene;
  scene.name = name;
  scene.rng_seed = seed;
  scene.points.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    Eigen::Vector3d p;
    for (int k = 0; k < 3; ++k) {
      const std::uint64_t bits = splitmix64(mix(seed, static_cast<std::uint64_t>(i) * 3 + k));
      p[k] = center[k] + half_extents[k] * (2.0 * uniform_open(bits) - 1.0);
    }
    scene.points.push_back(p);
  }
  return scene;
}

ObservationSet simulate(const Scene& scene, const MotionState& motion,
                        const LightFieldIntrinsics& intr, double noise_sigma, std::uint64_t seed) {
  if (scene.points.empty()) throw ValidationError("cannot simulate an empty scene");
  if (noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");

  ObservationSet obs;
  obs.intrinsics = intr;
  obs.noise_sigma = noise_sigma;
  obs.seed = seed;
  obs.records.reserve(scene.points.size() *
                      static_cast<std::size_t>(intr.grid_rows * intr.grid_cols));

  const CameraPose identity;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    for (int row = 0; row < intr.grid_rows; ++row) {
      for (int col = 0; col < intr.grid_cols; ++col) {
        const Viewpoint vp = intr.viewpoint(row, col);
        ProjectedPoint m;
        try {
          m = project_point(scene.points[i], identity, motion, intr, vp);
        } catch (const DepthDegenerateError&) {
          continue;  // no record for this viewpoint
        }
        ImagePoint rec;
        rec.point_id = static_cast<std::int64_t>(i);
        rec.view = vp;
        rec.x = m.x;
        rec.y = m.y;
        if (noise_sigma > 0.0) {
          const std::uint64_t key =
              mix(mix(mix(seed, static_cast<std::uint64_t>(i)), static_cast<std::uint64_t>(row) + 0x100),
                  static_cast<std::uint64_t>(col) + 0x10000);
          const auto [nx, ny] = gaussian_pair(key);
          rec.x += noise_sigma * nx;
          rec.y += noise_sigma * ny;
        }
        obs.records.push_back(rec);
      }
    }
  }
  if (obs.records.empty()) {
    throw EmptyObservationsError("simulation produced no observations (all projections degenerate)");
  }
  return obs;
}

ObservationSet simulate(const Scene& scene, const MotionScenario& sc,
                        const LightFieldIntrinsics& intr, double noise_sigma, std::uint64_t seed) {
  const MotionState motion = scenario_to_motion(sc, intr.grid_rows, scene.centroid());
  return simulate(scene, motion, intr, noise_sigma, seed);
}

ObservabilityReport check_observability(const ObservationSet& obs, const PointCloud* hint) {
  ObservabilityReport rep;
  std::set<std::int64_t> points;
  std::set<int> rows;
  std::set<int> cols;
  for (const auto& r : obs.records) {
    points.insert(r.point_id);
    rows.insert(r.view.row);
    cols.insert(r.view.col);
  }
  rep.n_points = static_cast<int>(points.size());
  rep.n_rows = static_cast<int>(rows.size());
  rep.n_cols = static_cast<int>(cols.size());

  bool ok = true;
  std::string why;
  if (rep.n_points < 4) {
    ok = false;
    why = "needs at least four distinct points, saw " + std::to_string(rep.n_points);
  } else if (rep.n_rows < 2 || rep.n_cols < 2) {
    ok = false;
    why = "observations must span at least two viewpoint rows and two columns (saw " +
          std::to_string(rep.n_rows) + " row(s), " + std::to_string(rep.n_cols) + " column(s))";
  }

  if (hint != nullptr && hint->size() >= 4) {
    rep.coplanarity_checked = true;
    Eigen::MatrixXd centered(hint->size(), 3);
    const Eigen::Vector3d c = hint->centroid();
    for (std::size_t i = 0; i < hint->size(); ++i) {
      centered.row(static_cast<Eigen::Index>(i)) = (hint->positions[i] - c).transpose();
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    rep.spread = svd.singularValues()(0);
    rep.min_singular_value = svd.singularValues()(2);
    rep.non_coplanar = rep.min_singular_value > 1e-9 * rep.spread;
    if (ok && !rep.non_coplanar) {
      ok = false;
      why = "points are coplanar within tolerance; need four non-coplanar points";
    }
  }

  rep.observable = ok;
  rep.message = ok ? "observable" : why;
  return rep;
}

PointCloud reexpress_at_row(const PointCloud& cloud, const MotionState& motion, double line_period,
                            int t_row, const std::string& anchor) {
  const Eigen::Matrix3d dr = delta_rotation(motion, line_period, t_row);
  const Eigen::Vector3d dt = delta_translation(motion, line_period, t_row);
  PointCloud out = cloud;
  for (auto& p : out.positions) {
    p = motion.center + dr * (p - motion.center) + dt;
  }
  out.anchor = anchor;
  return out;
}

}  // namespace rslf
