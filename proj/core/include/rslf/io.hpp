#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rslf/init.hpp"
#include "rslf/metrics.hpp"
#include "rslf/sim.hpp"
#include "rslf/solver.hpp"
#include "rslf/types.hpp"

// Serialization for every on-disk artifact. All JSON text is produced with
// stable key order and shortest round-trip decimals, so byte-identical inputs
// yield byte-identical files. Functions taking a path throw IoError with the
// offending path (and line, for CSV) in the message.

namespace rslf {

/// Ground-truth bundle written next to each simulated observation set.
struct GroundTruth {
  std::string scene_name;
  int scenario_id = 0;
  LightFieldIntrinsics intrinsics;  ///< rig the set was rendered with
  MotionState motion;               ///< true motion used by the simulator
  PointCloud points;                ///< scene points, anchored at exposure start ("t0")
};

/// Shortest decimal string that parses back to exactly `v`.
[[nodiscard]] std::string format_double(double v);

/// FNV-1a 64-bit hash, used to fingerprint configs in output files.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view s);

/// fnv1a64 rendered as 16 lowercase hex digits.
[[nodiscard]] std::string provenance_hash(std::string_view s);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

/// Creates parent directories, writes to a temporary sibling, then renames.
void write_text_file(const std::filesystem::path& path, std::string_view text);

// -- intrinsics -------------------------------------------------------------

[[nodiscard]] std::string intrinsics_to_json(const LightFieldIntrinsics& intr);
[[nodiscard]] LightFieldIntrinsics intrinsics_from_json(const std::string& text,
                                                        const std::string& context);
void save_intrinsics(const std::filesystem::path& path, const LightFieldIntrinsics& intr);
[[nodiscard]] LightFieldIntrinsics load_intrinsics(const std::filesystem::path& path);

// -- scenes -----------------------------------------------------------------

[[nodiscard]] std::string scene_to_json(const Scene& scene);
[[nodiscard]] Scene scene_from_json(const std::string& text, const std::string& context);
void save_scene(const std::filesystem::path& path, const Scene& scene);
[[nodiscard]] Scene load_scene(const std::filesystem::path& path);

// -- observations -----------------------------------------------------------

/// CSV body with the exact header `point_id,row,col,s,t,x,y`.
[[nodiscard]] std::string observations_to_csv(const ObservationSet& obs);

/// Writes the CSV plus a `.json` sidecar (same stem) holding the intrinsics,
/// noise parameters, and provenance; `config_hash` fingerprints the producing
/// configuration.
void save_observations(const std::filesystem::path& csv_path, const ObservationSet& obs,
                       std::string_view config_hash);

/// Reads a CSV written by save_observations together with its sidecar.
[[nodiscard]] ObservationSet load_observations(const std::filesystem::path& csv_path);

// -- solver config & report ---------------------------------------------------

[[nodiscard]] std::string solve_config_to_json(const SolveConfig& cfg);
[[nodiscard]] SolveConfig solve_config_from_json(const std::string& text,
                                                 const std::string& context);
void save_solve_config(const std::filesystem::path& path, const SolveConfig& cfg);
[[nodiscard]] SolveConfig load_solve_config(const std::filesystem::path& path);

/// Full report including the complete epsilon trace.
[[nodiscard]] std::string solve_report_to_json(const SolveReport& report,
                                               std::string_view config_hash);
[[nodiscard]] SolveReport solve_report_from_json(const std::string& text,
                                                 const std::string& context);
void save_solve_report(const std::filesystem::path& path, const SolveReport& report,
                       std::string_view config_hash);
[[nodiscard]] SolveReport load_solve_report(const std::filesystem::path& path);

// -- ground truth -------------------------------------------------------------

[[nodiscard]] std::string ground_truth_to_json(const GroundTruth& gt,
                                               std::string_view config_hash);
[[nodiscard]] GroundTruth ground_truth_from_json(const std::string& text,
                                                 const std::string& context);
void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt,
                       std::string_view config_hash);
[[nodiscard]] GroundTruth load_ground_truth(const std::filesystem::path& path);

// -- metrics ------------------------------------------------------------------

[[nodiscard]] std::string metrics_to_json(const MetricsReport& report,
                                          std::string_view config_hash);

/// One batch-table line: method,class,abs_rel,abs_diff,rms,delta1,delta2,delta3.
[[nodiscard]] std::string metrics_csv_row(std::string_view method, std::string_view cls,
                                          const MetricsReport& report);

// -- point clouds -------------------------------------------------------------

/// ASCII PLY with double-precision vertex properties; `comments` become
/// header comment lines (provenance goes here).
[[nodiscard]] std::string cloud_to_ply(const PointCloud& cloud,
                                       const std::vector<std::string>& comments);
void save_ply(const std::filesystem::path& path, const PointCloud& cloud,
              const std::vector<std::string>& comments);

}  // namespace rslf
