#include <benchmark/benchmark.h>

#include "rslf/init.hpp"
#include "rslf/sim.hpp"
#include "rslf/solver.hpp"

namespace {

rslf::ObservationSet bench_obs(int n_points) {
  const rslf::LightFieldIntrinsics rig = rslf::default_rig();
  const rslf::Scene scene = rslf::make_random_scene("bench", n_points, 7);
  return rslf::simulate(scene, rslf::scenario_by_id(1), rig, 0.0, 7);
}

void BM_residual_50pts(benchmark::State& state) {
  const rslf::ObservationSet obs = bench_obs(50);
  const rslf::InitReport init = rslf::triangulate_horizontal(obs);
  const rslf::NormalizeResult norm = rslf::normalize(init.points);
  rslf::BundleParams params;
  params.ids = norm.points.ids;
  params.points = norm.points.positions;
  params.center = norm.frame.center;
  for (auto _ : state) {
    const Eigen::VectorXd r = rslf::residual(params, obs, norm.frame);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_residual_50pts);

void BM_gradient_50pts(benchmark::State& state) {
  const rslf::ObservationSet obs = bench_obs(50);
  const rslf::InitReport init = rslf::triangulate_horizontal(obs);
  const rslf::NormalizeResult norm = rslf::normalize(init.points);
  rslf::BundleParams params;
  params.ids = norm.points.ids;
  params.points = norm.points.positions;
  params.center = norm.frame.center;
  for (auto _ : state) {
    const Eigen::VectorXd g = rslf::gradient(params, obs, norm.frame);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_gradient_50pts);

void BM_solve_12pts_200iters(benchmark::State& state) {
  const rslf::ObservationSet obs = bench_obs(12);
  const rslf::InitReport init = rslf::triangulate_horizontal(obs);
  rslf::SolveConfig cfg;
  cfg.iterations = 200;
  for (auto _ : state) {
    const rslf::SolveReport report = rslf::solve(obs, init, cfg);
    benchmark::DoNotOptimize(report.final_epsilon);
  }
}
BENCHMARK(BM_solve_12pts_200iters);

}  // namespace
