#include "rslf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <initializer_list>

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

double num(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = require(j, key, ctx);
  if (!v.is_number()) throw IoError(ctx + ": key '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

std::int64_t integer(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = require(j, key, ctx);
  if (!v.is_number_integer()) {
    throw IoError(ctx + ": key '" + std::string(key) + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

bool boolean(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = require(j, key, ctx);
  if (!v.is_boolean()) throw IoError(ctx + ": key '" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

std::string str(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = require(j, key, ctx);
  if (!v.is_string()) throw IoError(ctx + ": key '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

Json vec3_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = require(j, key, ctx);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
      !v[2].is_number()) {
    throw IoError(ctx + ": key '" + std::string(key) + "' must be an array of three numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed,
                    const std::string& ctx) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw IoError(ctx + ": unknown key '" + key + "'");
  }
}

Json cloud_json(const PointCloud& cloud) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    pts.push_back(Json{{"id", cloud.ids[i]},
                       {"x", cloud.positions[i].x()},
                       {"y", cloud.positions[i].y()},
                       {"z", cloud.positions[i].z()}});
  }
  return Json{{"anchor", cloud.anchor},
              {"frame", Json{{"center", vec3_json(cloud.frame.center)},
                             {"scale", cloud.frame.scale}}},
              {"points", pts}};
}

PointCloud cloud_from(const Json& j, const std::string& ctx) {
  PointCloud cloud;
  cloud.anchor = str(j, "anchor", ctx);
  const Json& fr = require(j, "frame", ctx);
  cloud.frame.center = vec3(fr, "center", ctx + ".frame");
  cloud.frame.scale = num(fr, "scale", ctx + ".frame");
  const Json& pts = require(j, "points", ctx);
  if (!pts.is_array()) throw IoError(ctx + ": 'points' must be an array");
  for (const Json& p : pts) {
    cloud.ids.push_back(integer(p, "id", ctx + ".points"));
    cloud.positions.emplace_back(num(p, "x", ctx + ".points"), num(p, "y", ctx + ".points"),
                                 num(p, "z", ctx + ".points"));
  }
  return cloud;
}

Json motion_json(const MotionState& m) {
  return Json{{"axis", vec3_json(m.axis)},
              {"angular_speed", m.angular_speed},
              {"velocity", vec3_json(m.velocity)},
              {"center", vec3_json(m.center)}};
}

MotionState motion_from(const Json& j, const std::string& ctx) {
  MotionState m;
  m.axis = vec3(j, "axis", ctx);
  m.angular_speed = num(j, "angular_speed", ctx);
  m.velocity = vec3(j, "velocity", ctx);
  m.center = vec3(j, "center", ctx);
  return m;
}

Json intrinsics_json_obj(const LightFieldIntrinsics& intr) {
  return Json{{"F", intr.main_focal},
              {"f", intr.micro_focal},
              {"Ox", intr.principal_offset.x()},
              {"Oy", intr.principal_offset.y()},
              {"d", intr.view_plane_distance},
              {"tau", intr.line_period},
              {"rows", intr.grid_rows},
              {"cols", intr.grid_cols},
              {"pitch", intr.pitch},
              {"origin_s", intr.grid_origin.x()},
              {"origin_t", intr.grid_origin.y()}};
}

LightFieldIntrinsics intrinsics_from(const Json& j, const std::string& ctx) {
  reject_unknown(j, {"F", "f", "Ox", "Oy", "d", "tau", "rows", "cols", "pitch", "origin_s",
                     "origin_t"},
                 ctx);
  LightFieldIntrinsics intr;
  intr.main_focal = num(j, "F", ctx);
  intr.micro_focal = num(j, "f", ctx);
  intr.principal_offset = {num(j, "Ox", ctx), num(j, "Oy", ctx)};
  intr.view_plane_distance = num(j, "d", ctx);
  intr.line_period = num(j, "tau", ctx);
  intr.grid_rows = static_cast<int>(integer(j, "rows", ctx));
  intr.grid_cols = static_cast<int>(integer(j, "cols", ctx));
  intr.pitch = num(j, "pitch", ctx);
  intr.grid_origin = {num(j, "origin_s", ctx), num(j, "origin_t", ctx)};
  if (intr.main_focal <= 0.0 || intr.micro_focal <= 0.0) {
    throw IoError(ctx + ": focal lengths F and f must be positive");
  }
  if (intr.grid_rows < 1 || intr.grid_cols < 1) {
    throw IoError(ctx + ": rows and cols must be at least 1");
  }
  if (intr.pitch <= 0.0) throw IoError(ctx + ": pitch must be positive");
  if (intr.line_period < 0.0) throw IoError(ctx + ": tau must be non-negative");
  return intr;
}

Json observability_json(const ObservabilityReport& o) {
  return Json{{"n_points", o.n_points},
              {"n_rows", o.n_rows},
              {"n_cols", o.n_cols},
              {"coplanarity_checked", o.coplanarity_checked},
              {"non_coplanar", o.non_coplanar},
              {"min_singular_value", o.min_singular_value},
              {"spread", o.spread},
              {"observable", o.observable},
              {"message", o.message}};
}

ObservabilityReport observability_from(const Json& j, const std::string& ctx) {
  ObservabilityReport o;
  o.n_points = static_cast<int>(integer(j, "n_points", ctx));
  o.n_rows = static_cast<int>(integer(j, "n_rows", ctx));
  o.n_cols = static_cast<int>(integer(j, "n_cols", ctx));
  o.coplanarity_checked = boolean(j, "coplanarity_checked", ctx);
  o.non_coplanar = boolean(j, "non_coplanar", ctx);
  o.min_singular_value = num(j, "min_singular_value", ctx);
  o.spread = num(j, "spread", ctx);
  o.observable = boolean(j, "observable", ctx);
  o.message = str(j, "message", ctx);
  return o;
}

Json solve_config_json_obj(const SolveConfig& cfg) {
  Json j{{"learning_rate", cfg.learning_rate},
         {"iterations", cfg.iterations},
         {"mode", mode_name(cfg.mode)},
         {"gradient_check", cfg.gradient_check},
         {"w_epsilon", cfg.w_epsilon},
         {"convergence_tol", nullptr},
         {"degenerate_sentinel", nullptr},
         {"force", cfg.force}};
  if (cfg.convergence_tol) j["convergence_tol"] = *cfg.convergence_tol;
  if (cfg.degenerate_sentinel) j["degenerate_sentinel"] = *cfg.degenerate_sentinel;
  return j;
}

SolveConfig solve_config_from(const Json& j, const std::string& ctx) {
  reject_unknown(j, {"learning_rate", "iterations", "mode", "gradient_check", "w_epsilon",
                     "convergence_tol", "degenerate_sentinel", "force"},
                 ctx);
  SolveConfig cfg;
  if (j.contains("learning_rate")) cfg.learning_rate = num(j, "learning_rate", ctx);
  if (j.contains("iterations")) cfg.iterations = static_cast<int>(integer(j, "iterations", ctx));
  if (j.contains("mode")) cfg.mode = mode_from_name(str(j, "mode", ctx));
  if (j.contains("gradient_check")) cfg.gradient_check = boolean(j, "gradient_check", ctx);
  if (j.contains("w_epsilon")) cfg.w_epsilon = num(j, "w_epsilon", ctx);
  if (j.contains("convergence_tol") && !j["convergence_tol"].is_null()) {
    cfg.convergence_tol = num(j, "convergence_tol", ctx);
  }
  if (j.contains("degenerate_sentinel") && !j["degenerate_sentinel"].is_null()) {
    cfg.degenerate_sentinel = num(j, "degenerate_sentinel", ctx);
  }
  if (j.contains("force")) cfg.force = boolean(j, "force", ctx);
  return cfg;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string provenance_hash(std::string_view s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return text;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

// -- intrinsics ---------------------------------------------------------------

std::string intrinsics_to_json(const LightFieldIntrinsics& intr) {
  return intrinsics_json_obj(intr).dump(2) + "\n";
}

LightFieldIntrinsics intrinsics_from_json(const std::string& text, const std::string& context) {
  return intrinsics_from(parse_json(text, context), context);
}

void save_intrinsics(const std::filesystem::path& path, const LightFieldIntrinsics& intr) {
  write_text_file(path, intrinsics_to_json(intr));
}

LightFieldIntrinsics load_intrinsics(const std::filesystem::path& path) {
  return intrinsics_from_json(read_text_file(path), path.string());
}

// -- scenes ---------------------------------------------------------------------

std::string scene_to_json(const Scene& scene) {
  // Point ids are implicit: index in this array = point_id in observations.
  Json pts = Json::array();
  for (const auto& p : scene.points) pts.push_back(vec3_json(p));
  return Json{{"name", scene.name},
              {"rng_seed", scene.rng_seed},
              {"tool_version", kToolVersion},
              {"points", pts}}
             .dump(2) +
         "\n";
}

Scene scene_from_json(const std::string& text, const std::string& context) {
  const Json j = parse_json(text, context);
  Scene scene;
  scene.name = str(j, "name", context);
  scene.rng_seed = static_cast<std::uint64_t>(integer(j, "rng_seed", context));
  const Json& pts = require(j, "points", context);
  if (!pts.is_array() || pts.empty()) {
    throw IoError(context + ": 'points' must be a nonempty array");
  }
  for (const Json& p : pts) {
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
        !p[2].is_number()) {
      throw IoError(context + ": each point must be an array of three numbers");
    }
    scene.points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  }
  return scene;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  write_text_file(path, scene_to_json(scene));
}

Scene load_scene(const std::filesystem::path& path) {
  return scene_from_json(read_text_file(path), path.string());
}

// -- observations -----------------------------------------------------------------

static constexpr const char* kObsHeader = "point_id,row,col,s,t,x,y";

std::string observations_to_csv(const ObservationSet& obs) {
  std::string out{kObsHeader};
  out += '\n';
  for (const auto& r : obs.records) {
    out += std::to_string(r.point_id);
    out += ',';
    out += std::to_string(r.view.row);
    out += ',';
    out += std::to_string(r.view.col);
    out += ',';
    out += format_double(r.view.s);
    out += ',';
    out += format_double(r.view.t);
    out += ',';
    out += format_double(r.x);
    out += ',';
    out += format_double(r.y);
    out += '\n';
  }
  return out;
}

void save_observations(const std::filesystem::path& csv_path, const ObservationSet& obs,
                       std::string_view config_hash) {
  write_text_file(csv_path, observations_to_csv(obs));
  Json side{{"tool_version", kToolVersion},
            {"config_hash", std::string(config_hash)},
            {"noise_sigma", obs.noise_sigma},
            {"rng_seed", obs.seed},
            {"n_records", obs.records.size()},
            {"intrinsics", intrinsics_json_obj(obs.intrinsics)}};
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_text_file(sidecar, side.dump(2) + "\n");
}

namespace {

template <class T>
T parse_field(std::string_view field, const std::string& ctx, std::size_t line) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw IoError(ctx + ":" + std::to_string(line) + ": cannot parse field '" +
                  std::string(field) + "'");
  }
  return value;
}

}  // namespace

ObservationSet load_observations(const std::filesystem::path& csv_path) {
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  const std::string side_ctx = sidecar.string();
  const Json side = parse_json(read_text_file(sidecar), side_ctx);

  ObservationSet obs;
  obs.intrinsics = intrinsics_from(require(side, "intrinsics", side_ctx), side_ctx + ".intrinsics");
  obs.noise_sigma = num(side, "noise_sigma", side_ctx);
  obs.seed = static_cast<std::uint64_t>(integer(side, "rng_seed", side_ctx));
  const auto expected = static_cast<std::size_t>(integer(side, "n_records", side_ctx));

  const std::string text = read_text_file(csv_path);
  const std::string ctx = csv_path.string();
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;
    if (line_no == 1) {
      if (line != kObsHeader) {
        throw IoError(ctx + ":1: expected header '" + std::string(kObsHeader) + "', got '" +
                      std::string(line) + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    std::string_view fields[7];
    std::size_t n_fields = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (n_fields == 7) {
          throw IoError(ctx + ":" + std::to_string(line_no) + ": expected 7 fields");
        }
        fields[n_fields++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (n_fields != 7) {
      throw IoError(ctx + ":" + std::to_string(line_no) + ": expected 7 fields, got " +
                    std::to_string(n_fields));
    }
    ImagePoint rec;
    rec.point_id = parse_field<std::int64_t>(fields[0], ctx, line_no);
    rec.view.row = parse_field<int>(fields[1], ctx, line_no);
    rec.view.col = parse_field<int>(fields[2], ctx, line_no);
    rec.view.s = parse_field<double>(fields[3], ctx, line_no);
    rec.view.t = parse_field<double>(fields[4], ctx, line_no);
    rec.x = parse_field<double>(fields[5], ctx, line_no);
    rec.y = parse_field<double>(fields[6], ctx, line_no);
    if (rec.view.row < 0 || rec.view.row >= obs.intrinsics.grid_rows || rec.view.col < 0 ||
        rec.view.col >= obs.intrinsics.grid_cols) {
      throw IoError(ctx + ":" + std::to_string(line_no) + ": viewpoint (" +
                    std::to_string(rec.view.row) + "," + std::to_string(rec.view.col) +
                    ") outside the " + std::to_string(obs.intrinsics.grid_rows) + "x" +
                    std::to_string(obs.intrinsics.grid_cols) + " grid");
    }
    obs.records.push_back(rec);
  }
  if (obs.records.empty()) throw IoError(ctx + ": no observation records");
  if (obs.records.size() != expected) {
    throw IoError(ctx + ": sidecar promises " + std::to_string(expected) + " records, found " +
                  std::to_string(obs.records.size()));
  }
  return obs;
}

// -- solver config & report ---------------------------------------------------------

std::string solve_config_to_json(const SolveConfig& cfg) {
  return solve_config_json_obj(cfg).dump(2) + "\n";
}

SolveConfig solve_config_from_json(const std::string& text, const std::string& context) {
  return solve_config_from(parse_json(text, context), context);
}

void save_solve_config(const std::filesystem::path& path, const SolveConfig& cfg) {
  write_text_file(path, solve_config_to_json(cfg));
}

SolveConfig load_solve_config(const std::filesystem::path& path) {
  return solve_config_from_json(read_text_file(path), path.string());
}

std::string solve_report_to_json(const SolveReport& report, std::string_view config_hash) {
  Json trace = Json::array();
  for (const double e : report.epsilon_trace) trace.push_back(e);
  Json j{{"tool_version", kToolVersion},
         {"config_hash", std::string(config_hash)},
         {"mode", mode_name(report.mode)},
         {"final_epsilon", report.final_epsilon},
         {"motion", motion_json(report.motion)},
         {"frame", Json{{"center", vec3_json(report.frame.center)},
                        {"scale", report.frame.scale}}},
         {"observability", observability_json(report.observability)},
         {"gradient_check_error", nullptr},
         {"config", solve_config_json_obj(report.config)},
         {"points", cloud_json(report.points)},
         {"epsilon_trace", trace}};
  if (report.gradient_check_error) j["gradient_check_error"] = *report.gradient_check_error;
  return j.dump(2) + "\n";
}

SolveReport solve_report_from_json(const std::string& text, const std::string& context) {
  const Json j = parse_json(text, context);
  SolveReport r;
  r.mode = mode_from_name(str(j, "mode", context));
  r.final_epsilon = num(j, "final_epsilon", context);
  r.motion = motion_from(require(j, "motion", context), context + ".motion");
  const Json& fr = require(j, "frame", context);
  r.frame.center = vec3(fr, "center", context + ".frame");
  r.frame.scale = num(fr, "scale", context + ".frame");
  r.observability = observability_from(require(j, "observability", context),
                                       context + ".observability");
  if (j.contains("gradient_check_error") && !j["gradient_check_error"].is_null()) {
    r.gradient_check_error = num(j, "gradient_check_error", context);
  }
  r.config = solve_config_from(require(j, "config", context), context + ".config");
  r.points = cloud_from(require(j, "points", context), context + ".points");
  const Json& trace = require(j, "epsilon_trace", context);
  if (!trace.is_array()) throw IoError(context + ": 'epsilon_trace' must be an array");
  for (const Json& e : trace) r.epsilon_trace.push_back(e.get<double>());
  return r;
}

void save_solve_report(const std::filesystem::path& path, const SolveReport& report,
                       std::string_view config_hash) {
  write_text_file(path, solve_report_to_json(report, config_hash));
}

SolveReport load_solve_report(const std::filesystem::path& path) {
  return solve_report_from_json(read_text_file(path), path.string());
}

// -- ground truth ---------------------------------------------------------------------

std::string ground_truth_to_json(const GroundTruth& gt, std::string_view config_hash) {
  return Json{{"tool_version", kToolVersion},
              {"config_hash", std::string(config_hash)},
              {"scene_name", gt.scene_name},
              {"scenario_id", gt.scenario_id},
              {"intrinsics", intrinsics_json_obj(gt.intrinsics)},
              {"motion", motion_json(gt.motion)},
              {"points", cloud_json(gt.points)}}
             .dump(2) +
         "\n";
}

GroundTruth ground_truth_from_json(const std::string& text, const std::string& context) {
  const Json j = parse_json(text, context);
  GroundTruth gt;
  gt.scene_name = str(j, "scene_name", context);
  gt.scenario_id = static_cast<int>(integer(j, "scenario_id", context));
  gt.intrinsics = intrinsics_from(require(j, "intrinsics", context), context + ".intrinsics");
  gt.motion = motion_from(require(j, "motion", context), context + ".motion");
  gt.points = cloud_from(require(j, "points", context), context + ".points");
  return gt;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt,
                       std::string_view config_hash) {
  write_text_file(path, ground_truth_to_json(gt, config_hash));
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  return ground_truth_from_json(read_text_file(path), path.string());
}

// -- metrics ------------------------------------------------------------------------

std::string metrics_to_json(const MetricsReport& report, std::string_view config_hash) {
  return Json{{"tool_version", kToolVersion},
              {"config_hash", std::string(config_hash)},
              {"frame", report.frame},
              {"n_points", report.n_points},
              {"abs_rel", report.abs_rel},
              {"abs_diff", report.abs_diff},
              {"rms", report.rms},
              {"delta1", report.delta1},
              {"delta2", report.delta2},
              {"delta3", report.delta3}}
             .dump(2) +
         "\n";
}

std::string metrics_csv_row(std::string_view method, std::string_view cls,
                            const MetricsReport& report) {
  std::string out;
  out += method;
  out += ',';
  out += cls;
  out += ',';
  out += format_double(report.abs_rel);
  out += ',';
  out += format_double(report.abs_diff);
  out += ',';
  out += format_double(report.rms);
  out += ',';
  out += format_double(report.delta1);
  out += ',';
  out += format_double(report.delta2);
  out += ',';
  out += format_double(report.delta3);
  return out;
}

// -- point clouds ----------------------------------------------------------------------

std::string cloud_to_ply(const PointCloud& cloud, const std::vector<std::string>& comments) {
  std::string out = "ply\nformat ascii 1.0\n";
  for (const auto& c : comments) {
    out += "comment ";
    out += c;
    out += '\n';
  }
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : cloud.positions) {
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    out += '\n';
  }
  return out;
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud,
              const std::vector<std::string>& comments) {
  write_text_file(path, cloud_to_ply(cloud, comments));
}

}  // namespace rslf
