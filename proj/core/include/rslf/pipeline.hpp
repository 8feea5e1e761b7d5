#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rslf/io.hpp"

// Batch commands behind the command-line frontend. Each command is a plain
// composition of the library operations (no extra numerics), persists every
// artifact it produces, and is deterministic given its inputs. Errors surface
// as the library exception types; exit_code_for maps their kind to the
// process exit code.

namespace rslf {

/// Grid description: scenes x scenarios (x modes for the ablation command).
struct ExperimentManifest {
  std::vector<std::filesystem::path> scenes;   ///< scene JSON files
  std::vector<int> scenarios;                  ///< velocity profile ids, each in [0, 10]
  std::optional<std::filesystem::path> rig;    ///< intrinsics JSON; default rig when absent
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<SolveMode> modes;                ///< ablation grid; empty = all four
  std::filesystem::path output_dir;
  std::string source_text;                     ///< raw manifest text, fingerprinted into outputs
};

/// Parse a manifest; relative paths are resolved against base_dir.
[[nodiscard]] ExperimentManifest manifest_from_json(const std::string& text,
                                                    const std::string& context,
                                                    const std::filesystem::path& base_dir);
[[nodiscard]] ExperimentManifest load_manifest(const std::filesystem::path& path);

struct SimulateOutput {
  std::vector<std::filesystem::path> observation_files;  ///< CSV paths, manifest order
};

/// Render observations for every (scene, scenario) cell: writes
/// `<scene>_sc<k>_obs.csv` + `.json` sidecar and `<scene>_sc<k>_gt.json`
/// into the manifest's output_dir. Rerunning the same manifest rewrites
/// identical bytes.
SimulateOutput cmd_simulate(const ExperimentManifest& manifest, std::ostream* log = nullptr);

struct ReconstructOptions {
  SolveConfig config;                            ///< effective solver configuration
  std::optional<std::filesystem::path> out_dir;  ///< default: next to the observations
};

struct ReconstructOutput {
  std::filesystem::path report_path;
  std::filesystem::path cloud_path;
  SolveReport report;
};

/// Coverage check, linear triangulation, then the joint solve; writes the
/// report JSON and the recovered cloud as PLY.
ReconstructOutput cmd_reconstruct(const std::filesystem::path& obs_csv,
                                  const ReconstructOptions& opts, std::ostream* log = nullptr);

struct EvaluateOptions {
  std::string anchor = "mid";  ///< comparison frame: "mid" (center exposure row) or "t0"
  bool euclidean = false;      ///< compare 3D distances instead of depths
  std::optional<std::filesystem::path> out_dir;  ///< default: next to the report
};

struct EvaluateOutput {
  std::filesystem::path metrics_path;
  std::filesystem::path table_path;
  MetricsReport metrics;
};

/// Compare a reconstruction against its ground truth: writes the metrics
/// JSON and appends one row to `metrics.csv` keyed by (scene, scenario,
/// method). With the default "mid" anchor both clouds are re-expressed at
/// the center exposure row under their own motion estimates.
EvaluateOutput cmd_evaluate(const std::filesystem::path& report_path,
                            const std::filesystem::path& gt_path, const EvaluateOptions& opts,
                            std::ostream* log = nullptr);

struct AblateCellResult {
  std::string scene;
  int scenario = 0;
  SolveMode mode = SolveMode::Full;
  std::string motion_class;
  bool ok = false;
  double final_epsilon = 0.0;
  double rms = 0.0;     ///< depth RMS against ground truth, exposure-start frame
  double delta1 = 0.0;  ///< threshold-accuracy fraction at 1.25
  std::string message;  ///< error text for failed cells
};

struct AblateOutput {
  std::filesystem::path cells_path;
  std::filesystem::path table_path;
  std::vector<AblateCellResult> cells;
};

struct AblateOptions {
  SolveConfig base_config;  ///< per-cell config; the mode field is overridden per cell
};

/// Run the scenes x scenarios x modes grid: per cell, simulate, triangulate,
/// solve, and score; per-cell failures are recorded and the run continues.
/// Emits `cells.csv` (one row per cell) and `ablation_table.csv` (one row
/// per mode, mean RMS / delta1 per motion class, ordering checks in footer
/// comments).
AblateOutput cmd_ablate(const ExperimentManifest& manifest, const AblateOptions& opts,
                        std::ostream* log = nullptr);

/// Write a deterministic box-uniform scene JSON; returns the path.
std::filesystem::path cmd_make_scene(const std::filesystem::path& out_path,
                                     const std::string& name, int n_points, std::uint64_t seed,
                                     double depth = kDefaultSceneDepth, double half_extent = 1.0,
                                     std::ostream* log = nullptr);

/// Process exit code for an error kind: validation 2, not-observable 3,
/// numerical 4 (success is 0).
[[nodiscard]] int exit_code_for(ErrorKind kind);

}  // namespace rslf
