#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rslf/init.hpp"
#include "rslf/sim.hpp"

using namespace rslf;

TEST_CASE("triangulation recovers a static zero-noise scene exactly") {
  const Scene scene = make_random_scene("s", 10, 21);
  const auto obs = simulate(scene, scenario_by_id(0), default_rig(), 0.0, 1);
  const auto init = triangulate_horizontal(obs);

  REQUIRE(init.points.size() == scene.points.size());
  CHECK(init.skipped.empty());
  CHECK(init.points.anchor == "t0");
  CHECK(std::is_sorted(init.points.ids.begin(), init.points.ids.end()));
  for (std::size_t i = 0; i < init.points.size(); ++i) {
    const auto id = static_cast<std::size_t>(init.points.ids[i]);
    CHECK((init.points.positions[i] - scene.points[id]).norm() < 1e-8);
    CHECK(init.per_point_residual[i] < 1e-8);
  }
}

TEST_CASE("row selection keeps triangulation exact under motion") {
  // all observations of the chosen row share one exposure time, so even a
  // fast-moving zero-noise scene triangulates to its exposure-start position
  const Scene scene = make_random_scene("s", 8, 33);
  const auto obs = simulate(scene, scenario_by_id(6), default_rig(), 0.0, 1);
  const auto init = triangulate_horizontal(obs);

  REQUIRE(init.points.size() == scene.points.size());
  for (std::size_t i = 0; i < init.points.size(); ++i) {
    const auto id = static_cast<std::size_t>(init.points.ids[i]);
    CHECK((init.points.positions[i] - scene.points[id]).norm() < 1e-8);
  }
}

TEST_CASE("noisy triangulation agrees with a normal-equation solve") {
  const Scene scene = make_random_scene("s", 6, 8);
  const auto intr = default_rig();
  const auto obs = simulate(scene, scenario_by_id(0), intr, 1e-6, 2);
  const auto init = triangulate_horizontal(obs);

  REQUIRE(init.points.size() == scene.points.size());
  for (std::size_t i = 0; i < init.points.size(); ++i) {
    // rebuild the subset the solver used: the best-covered row is row 0 here
    std::vector<ImagePoint> row0;
    for (const auto& r : obs.records) {
      if (r.point_id == init.points.ids[i] && r.view.row == 0) row0.push_back(r);
    }
    REQUIRE(row0.size() == 9);
    const auto ref = oracle::triangulate_point(row0, intr);
    REQUIRE(ref.ok);
    CHECK((init.points.positions[i] - ref.position).norm() < 1e-6);
    // rows are scaled by 1/f, so image noise sigma appears as ~sigma*|w|/f
    CHECK(init.per_point_residual[i] > 0.0);
    CHECK(init.per_point_residual[i] < 5e-3);
  }
}

TEST_CASE("points without two same-row observations are skipped, not invented") {
  const Scene scene = make_random_scene("s", 5, 4);
  auto obs = simulate(scene, scenario_by_id(0), default_rig(), 0.0, 1);
  // strip point 3 down to one observation per row: only column 4 survives
  std::erase_if(obs.records,
                [](const ImagePoint& r) { return r.point_id == 3 && r.view.col != 4; });
  const auto init = triangulate_horizontal(obs);

  CHECK(init.points.size() == 4);
  CHECK(init.skipped == std::vector<std::int64_t>{3});
  CHECK(std::find(init.points.ids.begin(), init.points.ids.end(), 3) == init.points.ids.end());
  CHECK(init.per_point_residual.size() == init.points.size());
}

TEST_CASE("triangulation refuses inputs with no usable point") {
  const Scene scene = make_random_scene("s", 4, 4);
  auto obs = simulate(scene, scenario_by_id(0), default_rig(), 0.0, 1);
  std::erase_if(obs.records, [](const ImagePoint& r) { return r.view.col != 2; });
  CHECK_THROWS_AS((void)triangulate_horizontal(obs), AllPointsSkippedError);

  obs.records.clear();
  CHECK_THROWS_AS((void)triangulate_horizontal(obs), EmptyObservationsError);
}
