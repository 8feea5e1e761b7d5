#include "rslf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "rslf/dual.hpp"
#include "rslf/geometry.hpp"

namespace rslf {

namespace {

using D12 = Dual<12>;

inline double value_of(double x) { return x; }
inline double value_of(const D12& x) { return x.v; }

template <class T>
struct Vec3T {
  T x, y, z;
};

template <class T>
struct Mat3T {
  T m[3][3];
};

// exp of a rotation vector, smooth through zero (series branch below 1e-8 of
// the squared angle); mirrors rotation_from_vector for plain doubles.
template <class T>
Mat3T<T> rot_exp(const Vec3T<T>& phi) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T u = phi.x * phi.x + phi.y * phi.y + phi.z * phi.z;
  T sinc, verc;
  if (value_of(u) < 1e-8) {
    sinc = 1.0 - u * (1.0 / 6.0) + u * u * (1.0 / 120.0);
    verc = 0.5 - u * (1.0 / 24.0) + u * u * (1.0 / 720.0);
  } else {
    const T theta = sqrt(u);
    sinc = sin(theta) / theta;
    verc = (1.0 - cos(theta)) / u;
  }
  Mat3T<T> r;
  r.m[0][0] = 1.0 + verc * (phi.x * phi.x - u);
  r.m[0][1] = verc * (phi.x * phi.y) - sinc * phi.z;
  r.m[0][2] = verc * (phi.x * phi.z) + sinc * phi.y;
  r.m[1][0] = verc * (phi.y * phi.x) + sinc * phi.z;
  r.m[1][1] = 1.0 + verc * (phi.y * phi.y - u);
  r.m[1][2] = verc * (phi.y * phi.z) - sinc * phi.x;
  r.m[2][0] = verc * (phi.z * phi.x) - sinc * phi.y;
  r.m[2][1] = verc * (phi.z * phi.y) + sinc * phi.x;
  r.m[2][2] = 1.0 + verc * (phi.z * phi.z - u);
  return r;
}

struct RigConsts {
  double f, au0, bu0, av0, bv0, fF, wa, wb;
};

RigConsts rig_consts(const LightFieldIntrinsics& intr) {
  RigConsts c{};
  c.f = intr.micro_focal;
  c.fF = intr.micro_focal / intr.main_focal;
  c.au0 = -c.fF * intr.principal_offset.x();
  c.bu0 = c.f * intr.principal_offset.x();
  c.av0 = -c.fF * intr.principal_offset.y();
  c.bv0 = c.f * intr.principal_offset.y();
  c.wa = 1.0 - intr.view_plane_distance / intr.main_focal;
  c.wb = intr.view_plane_distance;
  return c;
}

// Prediction terms shared by every column of one (point, row) pair: the
// displaced point q only depends on the exposure row, so x varies with the
// viewpoint's s coordinate alone and y not at all.
template <class T>
struct PointRowTerms {
  T invw, ubase, vbase, slope, ypred;
  bool degenerate = false;
};

template <class T>
PointRowTerms<T> point_row_terms(const Vec3T<T>& q, const RigConsts& c, double t_metric,
                                 double w_epsilon) {
  PointRowTerms<T> terms;
  const T w = c.wa * q.z + c.wb;
  if (std::abs(value_of(w)) < w_epsilon) {
    terms.degenerate = true;
    return terms;
  }
  terms.invw = 1.0 / w;
  terms.ubase = c.f * q.x + c.au0 * q.z + c.bu0;
  terms.vbase = c.f * q.y + c.av0 * q.z + c.bv0;
  terms.slope = c.fF * q.z - c.f;
  terms.ypred = (terms.vbase + t_metric * terms.slope) * terms.invw;
  return terms;
}

template <class T>
Vec3T<T> displaced(const Mat3T<T>& dr, const Vec3T<T>& dt, const Vec3T<T>& center,
                   const Vec3T<T>& scaled_local) {
  Vec3T<T> q;
  q.x = center.x + dr.m[0][0] * scaled_local.x + dr.m[0][1] * scaled_local.y +
        dr.m[0][2] * scaled_local.z + dt.x;
  q.y = center.y + dr.m[1][0] * scaled_local.x + dr.m[1][1] * scaled_local.y +
        dr.m[1][2] * scaled_local.z + dt.y;
  q.z = center.z + dr.m[2][0] * scaled_local.x + dr.m[2][1] * scaled_local.y +
        dr.m[2][2] * scaled_local.z + dt.z;
  return q;
}

void check_params_cover(const BundleParams& params, const ObservationSet& obs,
                        std::map<std::int64_t, std::size_t>& index) {
  if (params.ids.size() != params.points.size()) {
    throw ValidationError("params ids and points must be parallel");
  }
  for (std::size_t i = 0; i < params.ids.size(); ++i) index[params.ids[i]] = i;
  for (const auto& r : obs.records) {
    if (index.find(r.point_id) == index.end()) {
      throw ValidationError("observation references point id " + std::to_string(r.point_id) +
                            " absent from params");
    }
  }
}

void throw_degenerate(const ImagePoint& rec) {
  throw DepthDegenerateError("depth-degenerate prediction for point " +
                             std::to_string(rec.point_id) + " at viewpoint row " +
                             std::to_string(rec.view.row) + ", col " +
                             std::to_string(rec.view.col));
}

// Lane layout of the per-observation dual numbers.
constexpr int kLanePoint = 0;   // 0..2 normalized point
constexpr int kLaneCenter = 3;  // 3..5 rotation center
constexpr int kLaneRot = 6;     // 6..8 rotation vector
constexpr int kLaneVel = 9;     // 9..11 linear velocity

struct EvalOut {
  double epsilon = 0.0;
  Eigen::VectorXd gradient;  // empty unless requested
};

// Fused objective/gradient pass. Observations are walked in storage order and
// per-(point,row) terms are recomputed only when the pair changes, so records
// sorted by (point_id, row, col) evaluate at amortized constant cost.
EvalOut eval_eps_grad(const BundleParams& params, const ObservationSet& obs, double scale,
                      double w_epsilon, const std::optional<double>& sentinel) {
  std::map<std::int64_t, std::size_t> index;
  check_params_cover(params, obs, index);
  const RigConsts rc = rig_consts(obs.intrinsics);
  const double tau = obs.intrinsics.line_period;
  const std::size_t n_points = params.points.size();

  Vec3T<D12> center{D12::variable(params.center.x(), kLaneCenter),
                    D12::variable(params.center.y(), kLaneCenter + 1),
                    D12::variable(params.center.z(), kLaneCenter + 2)};
  Vec3T<D12> omega{D12::variable(params.rotation.x(), kLaneRot),
                   D12::variable(params.rotation.y(), kLaneRot + 1),
                   D12::variable(params.rotation.z(), kLaneRot + 2)};
  Vec3T<D12> vel{D12::variable(params.velocity.x(), kLaneVel),
                 D12::variable(params.velocity.y(), kLaneVel + 1),
                 D12::variable(params.velocity.z(), kLaneVel + 2)};

  // Per-row delta poses depend only on omega, velocity, and the row time.
  std::vector<Mat3T<D12>> drs(static_cast<std::size_t>(obs.intrinsics.grid_rows));
  std::vector<Vec3T<D12>> dts(drs.size());
  for (std::size_t row = 0; row < drs.size(); ++row) {
    const double time = tau * static_cast<double>(row);
    drs[row] = rot_exp<D12>({omega.x * time, omega.y * time, omega.z * time});
    dts[row] = {vel.x * time, vel.y * time, vel.z * time};
  }

  EvalOut out;
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * n_points + 9));

  std::int64_t cur_id = -1;
  int cur_row = -1;
  std::size_t cur_idx = 0;
  PointRowTerms<D12> terms;
  for (const auto& rec : obs.records) {
    if (rec.point_id != cur_id || rec.view.row != cur_row) {
      cur_id = rec.point_id;
      cur_row = rec.view.row;
      cur_idx = index[cur_id];
      const Eigen::Vector3d& np = params.points[cur_idx];
      const Vec3T<D12> scaled{scale * D12::variable(np.x(), kLanePoint),
                              scale * D12::variable(np.y(), kLanePoint + 1),
                              scale * D12::variable(np.z(), kLanePoint + 2)};
      const auto row_idx = static_cast<std::size_t>(cur_row);
      const Vec3T<D12> q = displaced(drs[row_idx], dts[row_idx], center, scaled);
      terms = point_row_terms(q, rc, rec.view.t, w_epsilon);
    }
    if (terms.degenerate) {
      if (!sentinel) throw_degenerate(rec);
      out.epsilon += 2.0 * (*sentinel) * (*sentinel);  // constant residuals, zero gradient
      continue;
    }
    const D12 xpred = (terms.ubase + rec.view.s * terms.slope) * terms.invw;
    const D12 rx = rec.x - xpred;
    const D12 ry = rec.y - terms.ypred;
    out.epsilon += rx.v * rx.v;
    out.epsilon += ry.v * ry.v;
    // d(eps)/d(theta) = sum 2 r dr/dtheta, scattered into the flat layout.
    const std::size_t base = 3 * cur_idx;
    for (int k = 0; k < 3; ++k) {
      out.gradient(static_cast<Eigen::Index>(base + static_cast<std::size_t>(k))) +=
          2.0 * (rx.v * rx.d[static_cast<std::size_t>(kLanePoint + k)] +
                 ry.v * ry.d[static_cast<std::size_t>(kLanePoint + k)]);
    }
    const auto shared = static_cast<Eigen::Index>(3 * n_points);
    for (int k = 0; k < 9; ++k) {
      out.gradient(shared + k) += 2.0 * (rx.v * rx.d[static_cast<std::size_t>(kLaneCenter + k)] +
                                         ry.v * ry.d[static_cast<std::size_t>(kLaneCenter + k)]);
    }
  }
  return out;
}

void apply_mode_mask(Eigen::VectorXd& grad, std::size_t n_points, SolveMode mode) {
  const auto shared = static_cast<Eigen::Index>(3 * n_points);
  if (mode == SolveMode::NoReg) grad.segment(shared, 3).setZero();
  if (mode == SolveMode::NoRS) grad.segment(shared + 3, 6).setZero();
}

}  // namespace

const char* mode_name(SolveMode mode) {
  switch (mode) {
    case SolveMode::Full: return "Full";
    case SolveMode::NoInit: return "NoInit";
    case SolveMode::NoReg: return "NoReg";
    case SolveMode::NoRS: return "NoRS";
  }
  return "?";
}

SolveMode mode_from_name(const std::string& name) {
  if (name == "Full") return SolveMode::Full;
  if (name == "NoInit") return SolveMode::NoInit;
  if (name == "NoReg") return SolveMode::NoReg;
  if (name == "NoRS") return SolveMode::NoRS;
  throw ValidationError("unknown solve mode '" + name + "' (expected Full|NoInit|NoReg|NoRS)");
}

NormalizeResult normalize(const PointCloud& cloud) {
  if (cloud.empty()) throw ValidationError("cannot normalize an empty cloud");
  NormalizeResult r;
  r.frame.center = cloud.centroid();
  double spread = 0.0;
  for (const auto& p : cloud.positions) {
    spread = std::max(spread, (p - r.frame.center).cwiseAbs().maxCoeff());
  }
  r.frame.scale = std::max(spread, 1e-9);
  r.points = cloud;
  r.points.frame = r.frame;
  for (auto& p : r.points.positions) p = (p - r.frame.center) / r.frame.scale;
  return r;
}

Eigen::VectorXd residual(const BundleParams& params, const ObservationSet& obs,
                         const NormalizationFrame& frame, double w_epsilon,
                         std::optional<double> sentinel) {
  std::map<std::int64_t, std::size_t> index;
  check_params_cover(params, obs, index);
  const RigConsts rc = rig_consts(obs.intrinsics);
  const double tau = obs.intrinsics.line_period;

  std::vector<Mat3T<double>> drs(static_cast<std::size_t>(obs.intrinsics.grid_rows));
  std::vector<Vec3T<double>> dts(drs.size());
  for (std::size_t row = 0; row < drs.size(); ++row) {
    const double time = tau * static_cast<double>(row);
    drs[row] = rot_exp<double>(
        {params.rotation.x() * time, params.rotation.y() * time, params.rotation.z() * time});
    dts[row] = {params.velocity.x() * time, params.velocity.y() * time,
                params.velocity.z() * time};
  }
  const Vec3T<double> center{params.center.x(), params.center.y(), params.center.z()};

  Eigen::VectorXd res(2 * static_cast<Eigen::Index>(obs.records.size()));
  std::int64_t cur_id = -1;
  int cur_row = -1;
  PointRowTerms<double> terms;
  Eigen::Index n = 0;
  for (const auto& rec : obs.records) {
    if (rec.point_id != cur_id || rec.view.row != cur_row) {
      cur_id = rec.point_id;
      cur_row = rec.view.row;
      const Eigen::Vector3d& np = params.points[index[cur_id]];
      const Vec3T<double> scaled{frame.scale * np.x(), frame.scale * np.y(),
                                 frame.scale * np.z()};
      const auto row_idx = static_cast<std::size_t>(cur_row);
      const Vec3T<double> q = displaced(drs[row_idx], dts[row_idx], center, scaled);
      terms = point_row_terms(q, rc, rec.view.t, w_epsilon);
    }
    if (terms.degenerate) {
      if (!sentinel) throw_degenerate(rec);
      res(n++) = *sentinel;
      res(n++) = *sentinel;
      continue;
    }
    const double xpred = (terms.ubase + rec.view.s * terms.slope) * terms.invw;
    res(n++) = rec.x - xpred;
    res(n++) = rec.y - terms.ypred;
  }
  return res;
}

Eigen::VectorXd gradient(const BundleParams& params, const ObservationSet& obs,
                         const NormalizationFrame& frame, SolveMode mode, double w_epsilon,
                         std::optional<double> sentinel) {
  EvalOut out = eval_eps_grad(params, obs, frame.scale, w_epsilon, sentinel);
  apply_mode_mask(out.gradient, params.points.size(), mode);
  return out.gradient;
}

SolveReport solve(const ObservationSet& obs, const InitReport& init, const SolveConfig& cfg) {
  if (cfg.learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
  if (cfg.iterations < 1) throw ValidationError("iterations must be >= 1");
  if (obs.records.empty()) throw EmptyObservationsError("no observations to solve");

  // Seed cloud per mode. NoInit reruns the linear stage internally, keeps only
  // its centroid, and clusters every point there.
  PointCloud seed;
  const InitReport* base = &init;
  InitReport internal;
  if (cfg.mode == SolveMode::NoInit) {
    internal = triangulate_horizontal(obs);
    base = &internal;
  } else if (init.points.empty()) {
    throw ValidationError("solve requires a nonempty init unless mode is NoInit");
  }

  // Coverage check against the triangulated geometry.
  const ObservabilityReport observability = check_observability(obs, &base->points);
  if (!observability.observable && !cfg.force) {
    throw NotObservableError(observability.message);
  }

  std::map<std::int64_t, Eigen::Vector3d> by_id;
  for (std::size_t i = 0; i < base->points.size(); ++i) {
    by_id[base->points.ids[i]] = base->points.positions[i];
  }
  const Eigen::Vector3d fallback = base->points.centroid();
  std::map<std::int64_t, bool> wanted;
  for (const auto& r : obs.records) wanted[r.point_id] = true;
  for (const auto& [id, _] : wanted) {
    seed.ids.push_back(id);
    if (cfg.mode == SolveMode::NoInit) {
      seed.positions.push_back(fallback);
    } else {
      const auto it = by_id.find(id);
      seed.positions.push_back(it != by_id.end() ? it->second : fallback);
    }
  }

  BundleParams params;
  params.ids = seed.ids;
  NormalizationFrame frame;
  if (cfg.mode == SolveMode::NoReg) {
    frame.center = Eigen::Vector3d::Zero();
    frame.scale = 1.0;
    params.points = seed.positions;
    params.center = Eigen::Vector3d::Zero();
  } else {
    const NormalizeResult norm = normalize(seed);
    frame = norm.frame;
    params.points = norm.points.positions;
    params.center = frame.center;
  }

  SolveReport report;
  report.mode = cfg.mode;
  report.config = cfg;
  report.observability = observability;

  if (cfg.gradient_check) {
    // Spot-check a deterministic subset of coordinates against central
    // differences of the double-path objective.
    const Eigen::VectorXd g = gradient(params, obs, frame, cfg.mode, cfg.w_epsilon,
                                       cfg.degenerate_sentinel);
    const auto shared = static_cast<Eigen::Index>(3 * params.points.size());
    std::vector<Eigen::Index> coords = {0, 1, 2};
    for (Eigen::Index k = 0; k < 9; ++k) coords.push_back(shared + k);
    double worst = 0.0;
    for (const Eigen::Index c : coords) {
      BundleParams probe = params;
      auto coord = [&](BundleParams& p) -> double& {
        if (c < shared) return p.points[static_cast<std::size_t>(c / 3)][c % 3];
        const Eigen::Index k = c - shared;
        if (k < 3) return p.center[k];
        if (k < 6) return p.rotation[k - 3];
        return p.velocity[k - 6];
      };
      const double h = 1e-6 * std::max(1.0, std::abs(coord(probe)));
      coord(probe) += h;
      const double hi = residual(probe, obs, frame, cfg.w_epsilon, cfg.degenerate_sentinel)
                            .squaredNorm();
      coord(probe) -= 2.0 * h;
      const double lo = residual(probe, obs, frame, cfg.w_epsilon, cfg.degenerate_sentinel)
                            .squaredNorm();
      const double fd = (hi - lo) / (2.0 * h);
      const bool frozen = (cfg.mode == SolveMode::NoReg && c >= shared && c < shared + 3) ||
                          (cfg.mode == SolveMode::NoRS && c >= shared + 3);
      if (frozen) continue;
      worst = std::max(worst, std::abs(g(c) - fd) / std::max({std::abs(g(c)), std::abs(fd), 1e-10}));
    }
    report.gradient_check_error = worst;
  }

  const auto dof = params.dof();
  const auto shared = static_cast<Eigen::Index>(3 * params.points.size());
  auto flatten = [&](const BundleParams& p) {
    Eigen::VectorXd theta(dof);
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      theta.segment<3>(static_cast<Eigen::Index>(3 * i)) = p.points[i];
    }
    theta.segment<3>(shared) = p.center;
    theta.segment<3>(shared + 3) = p.rotation;
    theta.segment<3>(shared + 6) = p.velocity;
    return theta;
  };
  auto unflatten = [&](const Eigen::VectorXd& theta, BundleParams& p) {
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      p.points[i] = theta.segment<3>(static_cast<Eigen::Index>(3 * i));
    }
    p.center = theta.segment<3>(shared);
    p.rotation = theta.segment<3>(shared + 3);
    p.velocity = theta.segment<3>(shared + 6);
  };

  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double adam_eps = 1e-8;
  Eigen::VectorXd theta = flatten(params);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dof);
  Eigen::VectorXd v2 = Eigen::VectorXd::Zero(dof);
  report.epsilon_trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);

  double pow_b1 = 1.0;
  double pow_b2 = 1.0;
  for (int it = 1; it <= cfg.iterations; ++it) {
    EvalOut out = eval_eps_grad(params, obs, frame.scale, cfg.w_epsilon, cfg.degenerate_sentinel);
    if (!std::isfinite(out.epsilon) || !out.gradient.allFinite()) {
      throw NonFiniteError(it, "objective or gradient became non-finite at iteration " +
                                   std::to_string(it));
    }
    report.epsilon_trace.push_back(out.epsilon);
    if (cfg.convergence_tol && it > 100 && (it - 1) % 100 == 0) {
      const double prev = report.epsilon_trace[static_cast<std::size_t>(it - 101)];
      if ((prev - out.epsilon) / std::max(prev, 1e-300) < *cfg.convergence_tol) break;
    }
    apply_mode_mask(out.gradient, params.points.size(), cfg.mode);

    pow_b1 *= beta1;
    pow_b2 *= beta2;
    m = beta1 * m + (1.0 - beta1) * out.gradient;
    v2 = beta2 * v2 + (1.0 - beta2) * out.gradient.cwiseProduct(out.gradient);
    const Eigen::VectorXd mhat = m / (1.0 - pow_b1);
    const Eigen::VectorXd vhat = v2 / (1.0 - pow_b2);
    theta -= cfg.learning_rate * (mhat.array() / (vhat.array().sqrt() + adam_eps)).matrix();
    if (!theta.allFinite()) {
      throw NonFiniteError(it, "parameters became non-finite at iteration " + std::to_string(it));
    }
    unflatten(theta, params);
  }
  {
    EvalOut out = eval_eps_grad(params, obs, frame.scale, cfg.w_epsilon, cfg.degenerate_sentinel);
    if (!std::isfinite(out.epsilon)) {
      throw NonFiniteError(cfg.iterations, "final objective is non-finite");
    }
    report.epsilon_trace.push_back(out.epsilon);
  }
  report.final_epsilon = report.epsilon_trace.back();

  report.frame = NormalizationFrame{params.center, frame.scale};
  report.points.ids = params.ids;
  report.points.positions.reserve(params.points.size());
  for (const auto& np : params.points) {
    report.points.positions.push_back(params.center + frame.scale * np);
  }
  report.points.frame = report.frame;
  report.points.anchor = "t0";

  const double speed = params.rotation.norm();
  report.motion.axis = speed > 0.0 ? Eigen::Vector3d(params.rotation / speed)
                                   : Eigen::Vector3d::UnitZ();
  report.motion.angular_speed = speed;
  report.motion.velocity = params.velocity;
  report.motion.center = params.center;
  return report;
}

}  // namespace rslf
