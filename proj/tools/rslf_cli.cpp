// Batch frontend: simulate / reconstruct / evaluate / ablate / make-scene.
// Exit codes: 0 success, 2 validation (including bad arguments), 3 not
// observable, 4 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rslf/pipeline.hpp"
#include "rslf/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rolling-shutter light-field shape and motion estimation"};
  app.set_version_flag("--version", rslf::kToolVersion);
  app.require_subcommand(1);

  std::string sim_manifest;
  std::optional<std::uint64_t> sim_seed;
  CLI::App* sim = app.add_subcommand("simulate", "render observation sets for a manifest grid");
  sim->add_option("--manifest", sim_manifest, "experiment manifest JSON")->required();
  sim->add_option("--seed", sim_seed, "override the manifest's seed");

  std::string rec_obs, rec_config, rec_mode, rec_out;
  bool rec_force = false;
  CLI::App* rec =
      app.add_subcommand("reconstruct", "triangulate and jointly solve one observation set");
  rec->add_option("--obs", rec_obs, "observation CSV (expects its .json sidecar)")->required();
  rec->add_option("--config", rec_config, "solver config JSON (defaults used when omitted)");
  rec->add_option("--mode", rec_mode, "solve mode: Full|NoInit|NoReg|NoRS");
  rec->add_option("--out", rec_out, "output directory (default: next to the observations)");
  rec->add_flag("--force", rec_force, "solve even if the coverage check fails");

  std::string ev_report, ev_gt, ev_out, ev_anchor = "mid";
  bool ev_euclidean = false;
  CLI::App* ev = app.add_subcommand("evaluate", "score a reconstruction against ground truth");
  ev->add_option("--report", ev_report, "solve report JSON")->required();
  ev->add_option("--gt", ev_gt, "ground truth JSON")->required();
  ev->add_option("--out", ev_out, "output directory (default: next to the report)");
  ev->add_option("--anchor", ev_anchor, "comparison frame: mid (default) or t0");
  ev->add_flag("--euclidean", ev_euclidean, "compare 3D distances instead of depths");

  std::string ab_manifest, ab_config;
  std::optional<std::uint64_t> ab_seed;
  CLI::App* ab = app.add_subcommand("ablate", "run the scenes x scenarios x modes grid");
  ab->add_option("--manifest", ab_manifest, "experiment manifest JSON")->required();
  ab->add_option("--config", ab_config, "base solver config JSON (mode set per cell)");
  ab->add_option("--seed", ab_seed, "override the manifest's seed");

  std::string ms_out, ms_name = "scene";
  int ms_points = 50;
  std::uint64_t ms_seed = 1;
  double ms_depth = rslf::kDefaultSceneDepth;
  double ms_half_extent = 1.0;
  CLI::App* ms = app.add_subcommand("make-scene", "write a deterministic random scene JSON");
  ms->add_option("--out", ms_out, "output scene path")->required();
  ms->add_option("--name", ms_name, "scene name (used in artifact file names)");
  ms->add_option("--points", ms_points, "number of points");
  ms->add_option("--seed", ms_seed, "RNG seed");
  ms->add_option("--depth", ms_depth, "distance of the box center from the camera");
  ms->add_option("--half-extent", ms_half_extent, "half side length of the box");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      rslf::ExperimentManifest manifest = rslf::load_manifest(sim_manifest);
      if (sim_seed) manifest.seed = *sim_seed;
      rslf::cmd_simulate(manifest, &std::cout);
    } else if (rec->parsed()) {
      rslf::ReconstructOptions opts;
      if (!rec_config.empty()) opts.config = rslf::load_solve_config(rec_config);
      if (!rec_mode.empty()) opts.config.mode = rslf::mode_from_name(rec_mode);
      if (rec_force) opts.config.force = true;
      if (!rec_out.empty()) opts.out_dir = rec_out;
      rslf::cmd_reconstruct(rec_obs, opts, &std::cout);
    } else if (ev->parsed()) {
      rslf::EvaluateOptions opts;
      opts.anchor = ev_anchor;
      opts.euclidean = ev_euclidean;
      if (!ev_out.empty()) opts.out_dir = ev_out;
      rslf::cmd_evaluate(ev_report, ev_gt, opts, &std::cout);
    } else if (ab->parsed()) {
      rslf::ExperimentManifest manifest = rslf::load_manifest(ab_manifest);
      if (ab_seed) manifest.seed = *ab_seed;
      rslf::AblateOptions opts;
      if (!ab_config.empty()) opts.base_config = rslf::load_solve_config(ab_config);
      rslf::cmd_ablate(manifest, opts, &std::cout);
    } else if (ms->parsed()) {
      rslf::cmd_make_scene(ms_out, ms_name, ms_points, ms_seed, ms_depth, ms_half_extent,
                           &std::cout);
    }
  } catch (const rslf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rslf::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
