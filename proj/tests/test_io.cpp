#include <charconv>
#include <cmath>
#include <string>

#include "doctest.h"
#include "rslf/io.hpp"
#include "rslf/sim.hpp"
#include "test_util.hpp"

using namespace rslf;

TEST_CASE("doubles serialize as shortest exact round-trip decimals") {
  for (const double v : {0.1, 1.0 / 3.0, -7.25, 1e-300, 6.02e23, 0.0, -0.0, 1.25e-12}) {
    const std::string s = format_double(v);
    double back = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(ec == std::errc());
    CHECK(ptr == s.data() + s.size());
    CHECK(back == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-2.0) == "-2");
}

TEST_CASE("config fingerprints are stable and content-sensitive") {
  CHECK(provenance_hash("abc") == provenance_hash("abc"));
  CHECK(provenance_hash("abc") != provenance_hash("abd"));
  CHECK(provenance_hash("").size() == 16);
  // classic reference value for the empty string
  CHECK(fnv1a64("") == 14695981039346656037ULL);
}

TEST_CASE("intrinsics survive a save/load round trip byte for byte") {
  testutil::TempDir tmp("io_intr");
  auto intr = default_rig();
  intr.principal_offset = {0.003, -0.001};
  intr.line_period = 0.119;

  const auto path = tmp.file("rig.json");
  save_intrinsics(path, intr);
  const auto loaded = load_intrinsics(path);
  CHECK(intrinsics_to_json(loaded) == intrinsics_to_json(intr));
  CHECK(loaded.main_focal == intr.main_focal);
  CHECK(loaded.line_period == intr.line_period);
  CHECK((loaded.principal_offset - intr.principal_offset).norm() == 0.0);

  // rewriting produces identical bytes
  const std::string first = read_text_file(path);
  save_intrinsics(path, intr);
  CHECK(read_text_file(path) == first);
}

TEST_CASE("intrinsics validation rejects bad values and unknown keys") {
  auto intr = default_rig();
  intr.main_focal = -0.05;
  CHECK_THROWS_AS((void)intrinsics_from_json(intrinsics_to_json(intr), "test"), IoError);

  const std::string extra = R"({"F":0.05,"f":0.001,"Ox":0,"Oy":0,"d":0.06,"tau":0.111,
    "rows":9,"cols":9,"pitch":0.006,"origin_s":-0.024,"origin_t":-0.024,"bogus":1})";
  CHECK_THROWS_AS((void)intrinsics_from_json(extra, "test"), IoError);

  // the static limit of zero line period is a valid rig
  auto gs = default_rig();
  gs.line_period = 0.0;
  CHECK(intrinsics_from_json(intrinsics_to_json(gs), "test").line_period == 0.0);
}

TEST_CASE("scenes and observation sets round-trip through their files") {
  testutil::TempDir tmp("io_obs");
  const Scene scene = make_random_scene("disk", 9, 1234);
  save_scene(tmp.file("scene.json"), scene);
  const Scene s2 = load_scene(tmp.file("scene.json"));
  CHECK(s2.name == scene.name);
  CHECK(s2.rng_seed == scene.rng_seed);
  REQUIRE(s2.points.size() == scene.points.size());
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    CHECK((s2.points[i] - scene.points[i]).norm() == 0.0);
  }

  const auto obs = simulate(scene, scenario_by_id(3), default_rig(), 1e-6, 77);
  const auto csv = tmp.file("cell_obs.csv");
  save_observations(csv, obs, "deadbeefdeadbeef");
  CHECK(std::filesystem::exists(tmp.file("cell_obs.json")));

  const auto o2 = load_observations(csv);
  CHECK(o2.noise_sigma == obs.noise_sigma);
  CHECK(o2.seed == obs.seed);
  REQUIRE(o2.size() == obs.size());
  for (std::size_t i = 0; i < obs.size(); i += 101) {
    CHECK(o2.records[i].point_id == obs.records[i].point_id);
    CHECK(o2.records[i].view.row == obs.records[i].view.row);
    CHECK(o2.records[i].view.s == obs.records[i].view.s);
    CHECK(o2.records[i].x == obs.records[i].x);
    CHECK(o2.records[i].y == obs.records[i].y);
  }

  const std::string body = observations_to_csv(obs);
  CHECK(body.rfind("point_id,row,col,s,t,x,y\n", 0) == 0);
}

TEST_CASE("observation loader pins failures to a path and line") {
  testutil::TempDir tmp("io_bad");
  const Scene scene = make_random_scene("x", 4, 2);
  const auto obs = simulate(scene, scenario_by_id(0), default_rig(), 0.0, 1);
  const auto csv = tmp.file("x_obs.csv");
  save_observations(csv, obs, "00");

  auto text = read_text_file(csv);
  text.insert(text.find('\n') + 1, "this,is,not,a,valid,record,line\n");
  write_text_file(csv, text);
  try {
    (void)load_observations(csv);
    FAIL("expected a load failure");
  } catch (const IoError& e) {
    const std::string what = e.what();
    CHECK(what.find("x_obs.csv") != std::string::npos);
    CHECK(what.find(":2") != std::string::npos);
  }

  // header tampering is caught before any record parses
  write_text_file(csv, "id,row,col\n1,2,3\n");
  CHECK_THROWS_AS((void)load_observations(csv), IoError);
}

TEST_CASE("solver configs accept partial JSON and reject unknown keys") {
  const SolveConfig defaults;
  const auto parsed = solve_config_from_json(R"({"iterations": 42, "mode": "NoReg"})", "test");
  CHECK(parsed.iterations == 42);
  CHECK(parsed.mode == SolveMode::NoReg);
  CHECK(parsed.learning_rate == defaults.learning_rate);
  CHECK_FALSE(parsed.convergence_tol.has_value());

  CHECK_THROWS_AS((void)solve_config_from_json(R"({"iterashuns": 42})", "test"), IoError);

  // full round trip, including the optional fields
  SolveConfig cfg;
  cfg.mode = SolveMode::NoRS;
  cfg.convergence_tol = 1e-9;
  cfg.degenerate_sentinel = 2.5;
  cfg.gradient_check = true;
  cfg.force = true;
  const auto back = solve_config_from_json(solve_config_to_json(cfg), "test");
  CHECK(back.mode == cfg.mode);
  CHECK(back.convergence_tol == cfg.convergence_tol);
  CHECK(back.degenerate_sentinel == cfg.degenerate_sentinel);
  CHECK(back.gradient_check);
  CHECK(back.force);
  CHECK(solve_config_to_json(back) == solve_config_to_json(cfg));
}

TEST_CASE("solve reports and ground truth round-trip with stable bytes") {
  testutil::TempDir tmp("io_rep");
  const Scene scene = make_random_scene("rt", 6, 5);
  const auto intr = default_rig();
  const auto obs = simulate(scene, scenario_by_id(2), intr, 0.0, 1);
  SolveConfig cfg;
  cfg.iterations = 120;
  const auto rep = solve(obs, triangulate_horizontal(obs), cfg);

  const auto path = tmp.file("report.json");
  save_solve_report(path, rep, "cafe0123cafe0123");
  const auto r2 = load_solve_report(path);
  CHECK(r2.mode == rep.mode);
  CHECK(r2.final_epsilon == rep.final_epsilon);
  CHECK(r2.epsilon_trace == rep.epsilon_trace);
  CHECK(r2.frame.scale == rep.frame.scale);
  CHECK(r2.motion.angular_speed == rep.motion.angular_speed);
  CHECK((r2.motion.axis - rep.motion.axis).norm() == 0.0);
  REQUIRE(r2.points.size() == rep.points.size());
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    CHECK(r2.points.ids[i] == rep.points.ids[i]);
    CHECK((r2.points.positions[i] - rep.points.positions[i]).norm() == 0.0);
  }
  CHECK(solve_report_to_json(r2, "cafe0123cafe0123") == solve_report_to_json(rep, "cafe0123cafe0123"));

  GroundTruth gt;
  gt.scene_name = scene.name;
  gt.scenario_id = 2;
  gt.intrinsics = intr;
  gt.motion = scenario_to_motion(scenario_by_id(2), intr.grid_rows, scene.centroid());
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    gt.points.ids.push_back(static_cast<std::int64_t>(i));
    gt.points.positions.push_back(scene.points[i]);
  }
  save_ground_truth(tmp.file("gt.json"), gt, "00ff00ff00ff00ff");
  const auto g2 = load_ground_truth(tmp.file("gt.json"));
  CHECK(g2.scene_name == gt.scene_name);
  CHECK(g2.scenario_id == 2);
  CHECK(g2.intrinsics.line_period == intr.line_period);
  CHECK(g2.motion.velocity == gt.motion.velocity);
  CHECK((g2.points.positions[3] - gt.points.positions[3]).norm() == 0.0);
}

TEST_CASE("point clouds render as ASCII PLY with provenance comments") {
  PointCloud cloud;
  cloud.ids = {0, 1, 2};
  cloud.positions = {{0.5, -0.25, 7.0}, {1.0, 2.0, 6.5}, {0.0, 0.0, 8.0}};
  const std::string ply = cloud_to_ply(cloud, {"tool 0.1.0", "hash abc"});
  CHECK(ply.rfind("ply\nformat ascii 1.0\n", 0) == 0);
  CHECK(ply.find("element vertex 3\n") != std::string::npos);
  CHECK(ply.find("comment tool 0.1.0\n") != std::string::npos);
  CHECK(ply.find("property double x\n") != std::string::npos);
  CHECK(ply.find("end_header\n") != std::string::npos);
  CHECK(ply.find("0.5 -0.25 7\n") != std::string::npos);

  testutil::TempDir tmp("io_ply");
  save_ply(tmp.file("c.ply"), cloud, {});
  CHECK(read_text_file(tmp.file("c.ply")) == cloud_to_ply(cloud, {}));
}

TEST_CASE("metrics serialize to JSON and batch-table rows") {
  MetricsReport m;
  m.abs_rel = 0.015625;
  m.abs_diff = 0.125;
  m.rms = 0.25;
  m.delta1 = 0.5;
  m.delta2 = 0.75;
  m.delta3 = 1.0;
  m.n_points = 8;
  m.frame = "mid";
  const std::string row = metrics_csv_row("Full", "slow", m);
  CHECK(row == "Full,slow,0.015625,0.125,0.25,0.5,0.75,1");

  const std::string json = metrics_to_json(m, "beefbeefbeefbeef");
  CHECK(json.find("\"abs_rel\": 0.015625") != std::string::npos);
  CHECK(json.find("\"config_hash\": \"beefbeefbeefbeef\"") != std::string::npos);
  CHECK(json.find("\"frame\": \"mid\"") != std::string::npos);
}
