#include "rslf/pipeline.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"
#include "rslf/version.hpp"

namespace rslf {

namespace {

using Json = nlohmann::ordered_json;

Json parse_json(const std::string& text, const std::string& ctx) {
  try {
    return Json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(ctx + ": invalid JSON: " + e.what());
  }
}

const Json& require(const Json& j, const char* key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) throw IoError(ctx + ": missing key '" + std::string(key) + "'");
  return *it;
}

void log_line(std::ostream* log, const std::string& line) {
  if (log != nullptr) *log << line << '\n';
}

PointCloud scene_cloud(const Scene& scene) {
  PointCloud c;
  c.anchor = "t0";
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    c.ids.push_back(static_cast<std::int64_t>(i));
    c.positions.push_back(scene.points[i]);
  }
  return c;
}

std::string cell_stem(const std::string& scene_name, int scenario) {
  return scene_name + "_sc" + std::to_string(scenario);
}

LightFieldIntrinsics rig_for(const ExperimentManifest& manifest) {
  return manifest.rig ? load_intrinsics(*manifest.rig) : default_rig();
}

std::filesystem::path resolve(const std::filesystem::path& p,
                              const std::filesystem::path& base_dir) {
  return p.is_relative() ? base_dir / p : p;
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::vector<std::string> ply_comments(std::string_view hash, SolveMode mode) {
  return {std::string("tool_version ") + kToolVersion, "config_hash " + std::string(hash),
          std::string("mode ") + mode_name(mode), "anchor t0"};
}

// Ground truth bundle for one (scene, scenario) cell.
GroundTruth cell_ground_truth(const Scene& scene, const MotionScenario& sc,
                              const LightFieldIntrinsics& rig) {
  GroundTruth gt;
  gt.scene_name = scene.name;
  gt.scenario_id = sc.id;
  gt.intrinsics = rig;
  gt.motion = scenario_to_motion(sc, rig.grid_rows, scene.centroid());
  gt.points = scene_cloud(scene);
  return gt;
}

void append_to_table(const std::filesystem::path& table, const std::string& header,
                     const std::string& row) {
  std::string text;
  if (std::filesystem::exists(table)) {
    text = read_text_file(table);
  } else {
    text = header;
  }
  text += row;
  write_text_file(table, text);
}

double mean_or_nan(double sum, int n) {
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ExperimentManifest manifest_from_json(const std::string& text, const std::string& context,
                                      const std::filesystem::path& base_dir) {
  const Json j = parse_json(text, context);
  for (const auto& [key, _] : j.items()) {
    static const std::set<std::string> allowed{"scenes", "scenarios", "rig",       "noise_sigma",
                                               "seed",   "modes",     "output_dir"};
    if (allowed.find(key) == allowed.end()) {
      throw IoError(context + ": unknown key '" + key + "'");
    }
  }
  ExperimentManifest m;
  m.source_text = text;

  const Json& scenes = require(j, "scenes", context);
  if (!scenes.is_array() || scenes.empty()) {
    throw IoError(context + ": 'scenes' must be a nonempty array of paths");
  }
  for (const Json& s : scenes) {
    if (!s.is_string()) throw IoError(context + ": scene entries must be path strings");
    m.scenes.push_back(resolve(s.get<std::string>(), base_dir));
  }

  const Json& scenarios = require(j, "scenarios", context);
  if (!scenarios.is_array() || scenarios.empty()) {
    throw IoError(context + ": 'scenarios' must be a nonempty array of ids");
  }
  for (const Json& s : scenarios) {
    if (!s.is_number_integer()) throw IoError(context + ": scenario ids must be integers");
    const int id = s.get<int>();
    if (id < 0 || id >= kScenarioCount) {
      throw IoError(context + ": scenario id " + std::to_string(id) + " outside [0, " +
                    std::to_string(kScenarioCount - 1) + "]");
    }
    m.scenarios.push_back(id);
  }

  if (j.contains("rig") && !j["rig"].is_null()) {
    if (!j["rig"].is_string()) throw IoError(context + ": 'rig' must be a path string or null");
    m.rig = resolve(j["rig"].get<std::string>(), base_dir);
  }
  if (j.contains("noise_sigma")) {
    if (!j["noise_sigma"].is_number()) throw IoError(context + ": 'noise_sigma' must be a number");
    m.noise_sigma = j["noise_sigma"].get<double>();
    if (m.noise_sigma < 0.0) throw IoError(context + ": 'noise_sigma' must be >= 0");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw IoError(context + ": 'seed' must be an integer");
    m.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("modes")) {
    const Json& modes = j["modes"];
    if (!modes.is_array()) throw IoError(context + ": 'modes' must be an array of mode names");
    for (const Json& mo : modes) {
      if (!mo.is_string()) throw IoError(context + ": mode entries must be strings");
      m.modes.push_back(mode_from_name(mo.get<std::string>()));
    }
  }

  const Json& outdir = require(j, "output_dir", context);
  if (!outdir.is_string() || outdir.get<std::string>().empty()) {
    throw IoError(context + ": 'output_dir' must be a nonempty path string");
  }
  m.output_dir = resolve(outdir.get<std::string>(), base_dir);
  return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_text_file(path), path.string(), path.parent_path());
}

SimulateOutput cmd_simulate(const ExperimentManifest& manifest, std::ostream* log) {
  const LightFieldIntrinsics rig = rig_for(manifest);
  const std::string hash =
      provenance_hash(manifest.source_text + "\nseed=" + std::to_string(manifest.seed));

  SimulateOutput out;
  std::set<std::string> seen_names;
  for (const auto& scene_path : manifest.scenes) {
    const Scene scene = load_scene(scene_path);
    if (!seen_names.insert(scene.name).second) {
      throw ValidationError("duplicate scene name '" + scene.name + "' in manifest");
    }
    for (const int id : manifest.scenarios) {
      const MotionScenario sc = scenario_by_id(id);
      const std::uint64_t cell_seed = manifest.seed + static_cast<std::uint64_t>(id);
      const ObservationSet obs = simulate(scene, sc, rig, manifest.noise_sigma, cell_seed);
      const std::string stem = cell_stem(scene.name, id);
      const std::filesystem::path csv = manifest.output_dir / (stem + "_obs.csv");
      save_observations(csv, obs, hash);
      save_ground_truth(manifest.output_dir / (stem + "_gt.json"),
                        cell_ground_truth(scene, sc, rig), hash);
      out.observation_files.push_back(csv);
      log_line(log, "wrote " + csv.string());
    }
  }
  return out;
}

ReconstructOutput cmd_reconstruct(const std::filesystem::path& obs_csv,
                                  const ReconstructOptions& opts, std::ostream* log) {
  const ObservationSet obs = load_observations(obs_csv);

  const ObservabilityReport pre = check_observability(obs);
  if (!pre.observable && !opts.config.force) {
    throw NotObservableError("coverage check: " + pre.message);
  }

  InitReport init;
  if (opts.config.mode != SolveMode::NoInit) {
    try {
      init = triangulate_horizontal(obs);
    } catch (const Error& e) {
      throw Error(e.kind(), "linear init: " + std::string(e.what()));
    }
  }

  ReconstructOutput out;
  try {
    out.report = solve(obs, init, opts.config);
  } catch (const Error& e) {
    throw Error(e.kind(), "solve: " + std::string(e.what()));
  }

  std::string base = obs_csv.stem().string();
  if (base.ends_with("_obs")) base.resize(base.size() - 4);
  const std::filesystem::path out_dir = opts.out_dir.value_or(obs_csv.parent_path());
  const std::string hash = provenance_hash(solve_config_to_json(opts.config));
  const std::string mode = mode_name(out.report.mode);
  out.report_path = out_dir / (base + "_report_" + mode + ".json");
  out.cloud_path = out_dir / (base + "_cloud_" + mode + ".ply");
  save_solve_report(out.report_path, out.report, hash);
  save_ply(out.cloud_path, out.report.points, ply_comments(hash, out.report.mode));
  log_line(log, "wrote " + out.report_path.string());
  log_line(log, "wrote " + out.cloud_path.string());
  return out;
}

EvaluateOutput cmd_evaluate(const std::filesystem::path& report_path,
                            const std::filesystem::path& gt_path, const EvaluateOptions& opts,
                            std::ostream* log) {
  if (opts.anchor != "mid" && opts.anchor != "t0") {
    throw ValidationError("anchor must be 'mid' or 't0', got '" + opts.anchor + "'");
  }
  const SolveReport report = load_solve_report(report_path);
  const GroundTruth gt = load_ground_truth(gt_path);

  PointCloud est = report.points;
  PointCloud truth = gt.points;
  if (opts.anchor == "mid") {
    // Each cloud moves under its own motion estimate to the center row's time.
    const int row = gt.intrinsics.center_row();
    est = reexpress_at_row(est, report.motion, gt.intrinsics.line_period, row, "mid");
    truth = reexpress_at_row(truth, gt.motion, gt.intrinsics.line_period, row, "mid");
  }
  EvaluateOutput out;
  out.metrics = compute_metrics(
      est, truth, opts.euclidean ? ErrorQuantity::Euclidean : ErrorQuantity::Depth);

  const Json eval_cfg{{"anchor", opts.anchor},
                      {"euclidean", opts.euclidean},
                      {"mode", mode_name(report.mode)}};
  const std::string hash = provenance_hash(eval_cfg.dump());

  std::string base = report_path.stem().string();
  const auto at = base.find("_report");
  if (at != std::string::npos) {
    base = base.substr(0, at) + "_metrics" + base.substr(at + 7);
  } else {
    base += "_metrics";
  }
  const std::filesystem::path out_dir = opts.out_dir.value_or(report_path.parent_path());
  out.metrics_path = out_dir / (base + ".json");
  write_text_file(out.metrics_path, metrics_to_json(out.metrics, hash));

  out.table_path = out_dir / "metrics.csv";
  const std::string header = std::string("# tool_version ") + kToolVersion + "\n# config_hash " +
                             hash +
                             "\nscene,scenario,method,class,abs_rel,abs_diff,rms,delta1,delta2,"
                             "delta3\n";
  const std::string cls = motion_class_name(scenario_by_id(gt.scenario_id).motion_class);
  const std::string row = gt.scene_name + "," + std::to_string(gt.scenario_id) + "," +
                          metrics_csv_row(mode_name(report.mode), cls, out.metrics) + "\n";
  append_to_table(out.table_path, header, row);
  log_line(log, "wrote " + out.metrics_path.string());
  log_line(log, "appended " + out.table_path.string());
  return out;
}

AblateOutput cmd_ablate(const ExperimentManifest& manifest, const AblateOptions& opts,
                        std::ostream* log) {
  const LightFieldIntrinsics rig = rig_for(manifest);
  std::vector<SolveMode> modes = manifest.modes;
  if (modes.empty()) {
    modes = {SolveMode::Full, SolveMode::NoInit, SolveMode::NoReg, SolveMode::NoRS};
  }
  const std::string hash = provenance_hash(manifest.source_text + "\nseed=" +
                                           std::to_string(manifest.seed) + "\nconfig=" +
                                           solve_config_to_json(opts.base_config));

  AblateOutput out;
  std::set<std::string> seen_names;
  for (const auto& scene_path : manifest.scenes) {
    const Scene scene = load_scene(scene_path);
    if (!seen_names.insert(scene.name).second) {
      throw ValidationError("duplicate scene name '" + scene.name + "' in manifest");
    }
    for (const int id : manifest.scenarios) {
      const MotionScenario sc = scenario_by_id(id);
      const std::uint64_t cell_seed = manifest.seed + static_cast<std::uint64_t>(id);
      const ObservationSet obs = simulate(scene, sc, rig, manifest.noise_sigma, cell_seed);
      const std::string stem = cell_stem(scene.name, id);
      save_observations(manifest.output_dir / (stem + "_obs.csv"), obs, hash);
      const GroundTruth gt = cell_ground_truth(scene, sc, rig);
      save_ground_truth(manifest.output_dir / (stem + "_gt.json"), gt, hash);

      // One linear init shared by the modes that consume it.
      InitReport shared_init;
      std::string init_error;
      try {
        shared_init = triangulate_horizontal(obs);
      } catch (const Error& e) {
        init_error = std::string("linear init: ") + e.what();
      }

      for (const SolveMode mode : modes) {
        AblateCellResult cell;
        cell.scene = scene.name;
        cell.scenario = id;
        cell.mode = mode;
        cell.motion_class = motion_class_name(sc.motion_class);
        try {
          if (!init_error.empty() && mode != SolveMode::NoInit) {
            throw ValidationError(init_error);
          }
          SolveConfig cfg = opts.base_config;
          cfg.mode = mode;
          const SolveReport report = solve(obs, shared_init, cfg);
          const std::string cell_name = stem + "_" + mode_name(mode);
          save_solve_report(manifest.output_dir / (stem + "_report_" + mode_name(mode) + ".json"),
                            report, hash);
          save_ply(manifest.output_dir / (stem + "_cloud_" + mode_name(mode) + ".ply"),
                   report.points, ply_comments(hash, mode));
          const MetricsReport metrics = compute_metrics(report.points, gt.points);
          write_text_file(manifest.output_dir / (stem + "_metrics_" + mode_name(mode) + ".json"),
                          metrics_to_json(metrics, hash));
          cell.ok = true;
          cell.final_epsilon = report.final_epsilon;
          cell.rms = metrics.rms;
          cell.delta1 = metrics.delta1;
          log_line(log, "cell " + cell_name + ": rms " + format_double(metrics.rms));
        } catch (const Error& e) {
          cell.ok = false;
          cell.final_epsilon = std::numeric_limits<double>::quiet_NaN();
          cell.rms = std::numeric_limits<double>::quiet_NaN();
          cell.delta1 = std::numeric_limits<double>::quiet_NaN();
          cell.message = e.what();
          log_line(log, "cell " + stem + "_" + mode_name(mode) + " failed: " + cell.message);
        }
        out.cells.push_back(cell);
      }
    }
  }

  const std::string provenance =
      std::string("# tool_version ") + kToolVersion + "\n# config_hash " + hash + "\n";

  // Per-cell table.
  std::string cells_text = provenance +
                           "scene,scenario,mode,class,status,final_epsilon,rms,delta1,message\n";
  for (const auto& c : out.cells) {
    cells_text += c.scene + "," + std::to_string(c.scenario) + "," + mode_name(c.mode) + "," +
                  c.motion_class + "," + (c.ok ? "ok" : "failed") + "," +
                  format_double(c.final_epsilon) + "," + format_double(c.rms) + "," +
                  format_double(c.delta1) + "," + csv_safe(c.message) + "\n";
  }
  out.cells_path = manifest.output_dir / "cells.csv";
  write_text_file(out.cells_path, cells_text);

  // Mode x class summary with ordering checks in the footer.
  struct Agg {
    double rms_sum = 0.0;
    double d1_sum = 0.0;
    int n = 0;
  };
  std::map<std::pair<SolveMode, std::string>, Agg> by_cell;
  std::map<SolveMode, Agg> moving;  // scenarios != 0, for the init/reg checks
  for (const auto& c : out.cells) {
    if (!c.ok) continue;
    Agg& a = by_cell[{c.mode, c.motion_class}];
    a.rms_sum += c.rms;
    a.d1_sum += c.delta1;
    ++a.n;
    if (c.scenario != 0) {
      Agg& m = moving[c.mode];
      m.rms_sum += c.rms;
      m.d1_sum += c.delta1;
      ++m.n;
    }
  }
  auto class_mean = [&](SolveMode mode, const char* cls, bool rms) {
    const auto it = by_cell.find({mode, cls});
    if (it == by_cell.end()) return std::numeric_limits<double>::quiet_NaN();
    return rms ? mean_or_nan(it->second.rms_sum, it->second.n)
               : mean_or_nan(it->second.d1_sum, it->second.n);
  };

  std::string table = provenance +
                      "mode,gs_rms,gs_delta1,slow_rms,slow_delta1,fast_rms,fast_delta1\n";
  for (const SolveMode mode : modes) {
    table += std::string(mode_name(mode));
    for (const char* cls : {"gs", "slow", "fast"}) {
      table += "," + format_double(class_mean(mode, cls, true)) + "," +
               format_double(class_mean(mode, cls, false));
    }
    table += "\n";
  }
  int n_ok = 0;
  for (const auto& c : out.cells) n_ok += c.ok ? 1 : 0;
  table += "# cells_ok " + std::to_string(n_ok) + "\n";
  table += "# cells_failed " + std::to_string(out.cells.size() - static_cast<std::size_t>(n_ok)) +
           "\n";

  auto moving_mean = [&](SolveMode mode) {
    const auto it = moving.find(mode);
    return it == moving.end() ? std::numeric_limits<double>::quiet_NaN()
                              : mean_or_nan(it->second.rms_sum, it->second.n);
  };
  auto ordering_line = [&](const char* label, double lhs, double rhs, const char* relation) {
    std::string verdict = "n/a";
    if (std::isfinite(lhs) && std::isfinite(rhs)) {
      const bool holds = relation[0] == '>' ? lhs >= rhs : lhs <= rhs;
      verdict = holds ? "yes" : "no";
    }
    return std::string("# check ") + label + ": " + verdict + " (" + format_double(lhs) + " vs " +
           format_double(rhs) + ")\n";
  };
  table += ordering_line("noinit_rms_ge_full", moving_mean(SolveMode::NoInit),
                         moving_mean(SolveMode::Full), ">=");
  table += ordering_line("noreg_rms_ge_full", moving_mean(SolveMode::NoReg),
                         moving_mean(SolveMode::Full), ">=");
  table += ordering_line("gs_nors_rms_le_full", class_mean(SolveMode::NoRS, "gs", true),
                         class_mean(SolveMode::Full, "gs", true), "<=");

  out.table_path = manifest.output_dir / "ablation_table.csv";
  write_text_file(out.table_path, table);
  log_line(log, "wrote " + out.cells_path.string());
  log_line(log, "wrote " + out.table_path.string());
  return out;
}

std::filesystem::path cmd_make_scene(const std::filesystem::path& out_path,
                                     const std::string& name, int n_points, std::uint64_t seed,
                                     double depth, double half_extent, std::ostream* log) {
  if (name.empty()) throw ValidationError("scene name must be nonempty");
  if (half_extent <= 0.0) throw ValidationError("half_extent must be positive");
  const Scene scene = make_random_scene(name, n_points, seed, {0.0, 0.0, depth},
                                        {half_extent, half_extent, half_extent});
  save_scene(out_path, scene);
  log_line(log, "wrote " + out_path.string());
  return out_path;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::NotObservable: return 3;
    case ErrorKind::Numerical: return 4;
  }
  return 4;
}

}  // namespace rslf
