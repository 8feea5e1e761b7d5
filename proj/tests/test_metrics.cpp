#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rslf/metrics.hpp"
#include "rslf/sim.hpp"

using namespace rslf;

namespace {

PointCloud cloud_of_depths(const std::vector<double>& zs, const std::string& anchor = "t0") {
  PointCloud c;
  c.anchor = anchor;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    c.ids.push_back(static_cast<std::int64_t>(i));
    c.positions.emplace_back(0.1 * static_cast<double>(i), -0.2, zs[i]);
  }
  return c;
}

std::pair<PointCloud, PointCloud> random_pair(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> depth(0.2, 3.0);
  std::uniform_real_distribution<double> jitter(-0.8, 0.8);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  PointCloud est, gt;
  for (int i = 0; i < n; ++i) {
    const double g = depth(rng) * (coin(rng) < 0.15 ? -1.0 : 1.0);
    double e = g + jitter(rng);
    if (e == 0.0) e = 0.1;
    est.ids.push_back(i);
    gt.ids.push_back(i);
    est.positions.emplace_back(jitter(rng), jitter(rng), e);
    gt.positions.emplace_back(jitter(rng), jitter(rng), g);
  }
  return {est, gt};
}

}  // namespace

TEST_CASE("identical clouds score zero error and full threshold fractions") {
  const auto c = cloud_of_depths({1.0, 2.0, 7.5});
  const auto m = compute_metrics(c, c);
  CHECK(m.abs_rel == 0.0);
  CHECK(m.abs_diff == 0.0);
  CHECK(m.rms == 0.0);
  CHECK(m.delta1 == 1.0);
  CHECK(m.delta2 == 1.0);
  CHECK(m.delta3 == 1.0);
  CHECK(m.n_points == 3);
  CHECK(m.frame == "t0");
}

TEST_CASE("single-point arithmetic: a ten percent depth error") {
  const auto m = compute_metrics(cloud_of_depths({1.1}), cloud_of_depths({1.0}));
  CHECK(m.abs_rel == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.abs_diff == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.rms == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.delta1 == 1.0);
}

TEST_CASE("two-point arithmetic: one exact match, one threefold outlier") {
  const auto m = compute_metrics(cloud_of_depths({1.0, 3.0}), cloud_of_depths({1.0, 1.0}));
  CHECK(m.rms == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(m.abs_diff == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.abs_rel == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.delta1 == 0.5);
  CHECK(m.delta2 == 0.5);
  CHECK(m.delta3 == 0.5);  // ratio 3 exceeds even 1.25^3
}

TEST_CASE("opposite-sign depths never count toward a threshold") {
  const auto m = compute_metrics(cloud_of_depths({-5.0}), cloud_of_depths({5.0}));
  CHECK(m.delta1 == 0.0);
  CHECK(m.delta2 == 0.0);
  CHECK(m.delta3 == 0.0);
  CHECK(m.abs_rel == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("metric guards: zero ground truth, disjoint ids, mismatched anchors") {
  CHECK_THROWS_AS((void)compute_metrics(cloud_of_depths({1.0}), cloud_of_depths({0.0})),
                  ZeroGroundTruthDepthError);

  auto est = cloud_of_depths({1.0, 2.0});
  auto gt = cloud_of_depths({1.0, 2.0});
  for (auto& id : est.ids) id += 100;
  CHECK_THROWS_AS((void)compute_metrics(est, gt), NoMatchesError);

  CHECK_THROWS_AS(
      (void)compute_metrics(cloud_of_depths({1.0}, "t0"), cloud_of_depths({1.0}, "mid")),
      ValidationError);
}

TEST_CASE("partial overlap compares only the shared ids") {
  auto est = cloud_of_depths({1.0, 2.0, 3.0});
  const auto gt = cloud_of_depths({1.0, 2.0, 3.0, 4.0});
  est.ids[2] = 99;  // unmatched on both sides
  const auto m = compute_metrics(est, gt);
  CHECK(m.n_points == 2);
  CHECK(m.abs_diff == 0.0);
}

TEST_CASE("depth metrics equal an independent sorted-merge pass") {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 20; ++round) {
    const auto [est, gt] = random_pair(rng, 150);
    const auto m = compute_metrics(est, gt);
    const auto o = oracle::metrics_by_loop(est, gt);
    CHECK(m.n_points == o.n);
    CHECK(m.abs_rel == doctest::Approx(o.abs_rel).epsilon(1e-12));
    CHECK(m.abs_diff == doctest::Approx(o.abs_diff).epsilon(1e-12));
    CHECK(m.rms == doctest::Approx(o.rms).epsilon(1e-12));
    CHECK(m.delta1 == o.delta1);
    CHECK(m.delta2 == o.delta2);
    CHECK(m.delta3 == o.delta3);
    // thresholds nest, so the fractions must be monotone
    CHECK(m.delta1 <= m.delta2);
    CHECK(m.delta2 <= m.delta3);
    CHECK(m.delta3 <= 1.0);
  }
}

TEST_CASE("metrics are invariant to the storage order of the estimate") {
  std::mt19937_64 rng(7);
  auto [est, gt] = random_pair(rng, 60);
  const auto before = compute_metrics(est, gt);

  std::vector<std::size_t> order(est.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  PointCloud shuffled;
  shuffled.anchor = est.anchor;
  for (const auto i : order) {
    shuffled.ids.push_back(est.ids[i]);
    shuffled.positions.push_back(est.positions[i]);
  }

  const auto after = compute_metrics(shuffled, gt);
  CHECK(after.n_points == before.n_points);
  CHECK(after.abs_rel == doctest::Approx(before.abs_rel).epsilon(1e-9));
  CHECK(after.abs_diff == doctest::Approx(before.abs_diff).epsilon(1e-9));
  CHECK(after.rms == doctest::Approx(before.rms).epsilon(1e-9));
  CHECK(after.delta1 == before.delta1);
  CHECK(after.delta2 == before.delta2);
  CHECK(after.delta3 == before.delta3);
}

TEST_CASE("swapping estimate and ground truth preserves the threshold fractions") {
  std::mt19937_64 rng(23);
  const auto [est, gt] = random_pair(rng, 80);
  const auto ab = compute_metrics(est, gt);
  const auto ba = compute_metrics(gt, est);
  CHECK(ab.delta1 == ba.delta1);
  CHECK(ab.delta2 == ba.delta2);
  CHECK(ab.delta3 == ba.delta3);
}

TEST_CASE("distance mode compares 3D displacement against the ground-truth radius") {
  PointCloud est, gt;
  est.ids = {0};
  gt.ids = {0};
  est.positions = {{1.0, 0.0, 0.0}};
  gt.positions = {{0.0, 0.0, 2.0}};
  const auto m = compute_metrics(est, gt, ErrorQuantity::Euclidean);
  const double err = std::sqrt(5.0);
  CHECK(m.abs_diff == doctest::Approx(err).epsilon(1e-12));
  CHECK(m.abs_rel == doctest::Approx(err / 2.0).epsilon(1e-12));
  CHECK(m.rms == doctest::Approx(err).epsilon(1e-12));
  CHECK(m.delta1 == 0.0);  // (2 + sqrt(5)) / 2 is far beyond 1.25

  gt.positions = {{0.0, 0.0, 0.0}};
  CHECK_THROWS_AS((void)compute_metrics(est, gt, ErrorQuantity::Euclidean),
                  ZeroGroundTruthDepthError);

  std::mt19937_64 rng(31);
  const auto [e2, g2] = random_pair(rng, 100);
  const auto got = compute_metrics(e2, g2, ErrorQuantity::Euclidean);
  const auto want = oracle::metrics_by_loop(e2, g2, /*euclidean=*/true);
  CHECK(got.abs_rel == doctest::Approx(want.abs_rel).epsilon(1e-12));
  CHECK(got.rms == doctest::Approx(want.rms).epsilon(1e-12));
  CHECK(got.delta1 == want.delta1);
  CHECK(got.delta3 == want.delta3);
}

TEST_CASE("image-space distortion grows with the motion scale") {
  const Scene scene = make_random_scene("s", 6, 71);
  const auto intr = default_rig();
  const auto gs = simulate(scene, scenario_by_id(0), intr, 0.0, 1);
  const auto slow = simulate(scene, scenario_by_id(1), intr, 0.0, 1);
  const auto fast = simulate(scene, scenario_by_id(6), intr, 0.0, 1);

  const auto self = distortion_summary(gs, gs);
  CHECK(self.max_displacement == 0.0);
  CHECK(self.n_matched == gs.size());

  const auto d_slow = distortion_summary(gs, slow);
  const auto d_fast = distortion_summary(gs, fast);
  CHECK(d_slow.max_displacement > 0.0);
  CHECK(d_fast.mean_displacement > d_slow.mean_displacement);

  auto renamed = gs;
  for (auto& r : renamed.records) r.point_id += 1000;
  CHECK_THROWS_AS((void)distortion_summary(gs, renamed), NoMatchesError);
}
