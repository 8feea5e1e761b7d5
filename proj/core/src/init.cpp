#include "rslf/init.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>

#include "rslf/geometry.hpp"

namespace rslf {

InitReport triangulate_horizontal(const ObservationSet& obs) {
  if (obs.records.empty()) throw EmptyObservationsError("no observations to triangulate");

  std::map<std::int64_t, std::vector<const ImagePoint*>> by_point;
  for (const auto& r : obs.records) by_point[r.point_id].push_back(&r);

  InitReport report;
  report.points.anchor = "t0";
  for (const auto& [id, recs] : by_point) {
    // Best-covered row, ties to the lowest index.
    std::map<int, int> row_count;
    for (const auto* r : recs) ++row_count[r->view.row];
    int best_row = recs.front()->view.row;
    int best_count = 0;
    for (const auto& [row, count] : row_count) {
      if (count > best_count) {
        best_row = row;
        best_count = count;
      }
    }
    if (best_count < 2) {
      report.skipped.push_back(id);
      continue;
    }

    const double inv_f = 1.0 / obs.intrinsics.micro_focal;
    Eigen::MatrixXd a(2 * best_count, 3);
    Eigen::VectorXd b(2 * best_count);
    Eigen::Index n = 0;
    for (const auto* r : recs) {
      if (r->view.row != best_row) continue;
      const Eigen::Matrix<double, 3, 4> k = intrinsic_tensor(obs.intrinsics, r->view);
      a.row(n) = (r->x * k.row(2).head<3>() - k.row(0).head<3>()) * inv_f;
      b(n) = (k(0, 3) - r->x * k(2, 3)) * inv_f;
      ++n;
      a.row(n) = (r->y * k.row(2).head<3>() - k.row(1).head<3>()) * inv_f;
      b(n) = (k(1, 3) - r->y * k(2, 3)) * inv_f;
      ++n;
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 3) {
      report.skipped.push_back(id);
      continue;
    }
    const Eigen::Vector3d p = qr.solve(b);
    report.points.ids.push_back(id);
    report.points.positions.push_back(p);
    report.per_point_residual.push_back(std::sqrt((a * p - b).squaredNorm() / (2.0 * best_count)));
  }

  if (report.points.empty()) {
    throw AllPointsSkippedError("no point had two usable observations on a shared viewpoint row");
  }
  return report;
}

}  // namespace rslf
