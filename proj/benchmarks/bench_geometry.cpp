#include <benchmark/benchmark.h>

#include "rslf/geometry.hpp"
#include "rslf/sim.hpp"

namespace {

void BM_intrinsic_tensor(benchmark::State& state) {
  const rslf::LightFieldIntrinsics intr = rslf::default_rig();
  int row = 0;
  int col = 0;
  for (auto _ : state) {
    const auto k = rslf::intrinsic_tensor(intr, intr.viewpoint(row, col));
    benchmark::DoNotOptimize(k);
    col = (col + 1) % intr.grid_cols;
    if (col == 0) row = (row + 1) % intr.grid_rows;
  }
}
BENCHMARK(BM_intrinsic_tensor);

void BM_project_point(benchmark::State& state) {
  const rslf::LightFieldIntrinsics intr = rslf::default_rig();
  rslf::MotionState motion;
  motion.axis = Eigen::Vector3d::UnitZ();
  motion.angular_speed = 0.26;
  motion.velocity = Eigen::Vector3d(0.0, -0.2, 0.0);
  motion.center = Eigen::Vector3d(0.0, 0.0, rslf::kDefaultSceneDepth);
  const rslf::CameraPose pose;
  const Eigen::Vector3d p(0.3, -0.4, 7.2);
  int row = 0;
  for (auto _ : state) {
    const auto m = rslf::project_point(p, pose, motion, intr, intr.viewpoint(row, 4));
    benchmark::DoNotOptimize(m);
    row = (row + 1) % intr.grid_rows;
  }
}
BENCHMARK(BM_project_point);

}  // namespace

BENCHMARK_MAIN();
