#include "jacrl/sim/scene_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jacrl/errors.hpp"

namespace jacrl::sim {

namespace {

using nlohmann::json;

template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) {
    throw ConfigError(where + ": missing required key '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T optional_or(const json& j, const std::string& key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Polygon read_polygon(const json& arr, const std::string& where) {
  Polygon out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() < 2) {
      throw ConfigError(where + ": vertices must be [x, y] pairs");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

}  // namespace

SceneConfig parse_scene_config(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  const std::string schema = optional_or<std::string>(root, "schema", "");
  if (schema != "jacrl.scene.v1") {
    throw ConfigError(origin + ": unsupported schema '" + schema +
                      "' (expected jacrl.scene.v1)");
  }

  SceneConfig cfg;
  cfg.source_path = origin;
  cfg.raw_json = json_text;

  const json& rj = root.contains("robot") ? root.at("robot") : json::object();
  RobotModel& m = cfg.robot;
  m.num_segments = optional_or<int>(rj, "num_segments", m.num_segments);
  m.segment_length = optional_or<double>(rj, "segment_length", m.segment_length);
  m.actuated_fraction = optional_or<double>(rj, "actuated_fraction", m.actuated_fraction);
  m.axial_stiffness = optional_or<double>(rj, "axial_stiffness", m.axial_stiffness);
  m.damping = optional_or<double>(rj, "damping", m.damping);
  m.poisson_ratio = optional_or<double>(rj, "poisson_ratio", m.poisson_ratio);
  m.tendon_gain = optional_or<double>(rj, "tendon_gain", m.tendon_gain);
  m.node_mass = optional_or<double>(rj, "node_mass", m.node_mass);
  m.plane_stiffness = optional_or<double>(rj, "plane_stiffness", m.plane_stiffness);
  m.max_tendon_travel = optional_or<double>(rj, "max_tendon_travel", m.max_tendon_travel);
  m.max_insertion = optional_or<double>(rj, "max_insertion", m.max_insertion);
  if (rj.contains("tendon_offsets")) {
    const auto v = rj.at("tendon_offsets").get<std::vector<double>>();
    if (v.size() != 4) throw ConfigError(origin + ".robot.tendon_offsets: need 4 values");
    for (int i = 0; i < 4; ++i) m.tendon_offsets[i] = v[i];
  }
  m.set_young_modulus(optional_or<double>(rj, "young_modulus", m.young_modulus));
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ".robot: " + e.what());
  }

  if (!root.contains("scene")) throw ConfigError(origin + ": missing 'scene'");
  const json& sj = root.at("scene");
  LumenScene& sc = cfg.scene;
  const std::string kind = require<std::string>(sj, "kind", origin + ".scene");
  if (kind == "stomach") {
    sc.kind = SceneKind::Stomach;
  } else if (kind == "vessel") {
    sc.kind = SceneKind::Vessel;
  } else {
    throw ConfigError(origin + ".scene.kind: unknown kind '" + kind + "'");
  }
  sc.wall_stiffness = optional_or<double>(sj, "wall_stiffness", sc.wall_stiffness);
  if (sj.contains("peristalsis")) {
    const json& pj = sj.at("peristalsis");
    sc.peristalsis_amplitude = optional_or<double>(pj, "amplitude", sc.peristalsis_amplitude);
    sc.peristalsis_frequency = optional_or<double>(pj, "frequency", sc.peristalsis_frequency);
    sc.peristalsis_wavenumber = optional_or<double>(pj, "wavenumber", sc.peristalsis_wavenumber);
  }
  if (sj.contains("entry")) {
    const json& ej = sj.at("entry");
    const auto p = require<std::vector<double>>(ej, "point", origin + ".scene.entry");
    if (p.size() != 2) throw ConfigError(origin + ".scene.entry.point: need [x, y]");
    sc.entry_point = Eigen::Vector2d(p[0], p[1]);
    sc.entry_angle = optional_or<double>(ej, "angle", 0.0);
  }

  if (sj.contains("wall_vertices")) {
    sc.wall_rest = read_polygon(sj.at("wall_vertices"), origin + ".scene.wall_vertices");
  } else if (sj.contains("wall_csv")) {
    // Vertices in a referenced CSV: one "x,y" row per vertex.
    const auto csv_path = sj.at("wall_csv").get<std::string>();
    std::ifstream in(csv_path);
    if (!in) throw ConfigError(origin + ".scene.wall_csv: cannot open " + csv_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      double x, y;
      char comma;
      if (!(ss >> x >> comma >> y)) {
        throw ConfigError(csv_path + ":" + std::to_string(line_no) + ": bad vertex row");
      }
      sc.wall_rest.emplace_back(x, y);
    }
  } else {
    throw ConfigError(origin + ".scene: need wall_vertices or wall_csv");
  }

  if (sj.contains("target_region")) {
    sc.target_region = read_polygon(sj.at("target_region"), origin + ".scene.target_region");
  }
  if (sj.contains("branch_ends")) {
    const json& bj = sj.at("branch_ends");
    const auto u = require<std::vector<double>>(bj, "upper", origin + ".scene.branch_ends");
    const auto l = require<std::vector<double>>(bj, "lower", origin + ".scene.branch_ends");
    sc.branch_end_upper = Eigen::Vector2d(u[0], u[1]);
    sc.branch_end_lower = Eigen::Vector2d(l[0], l[1]);
    sc.branch_target_radius = optional_or<double>(bj, "radius", sc.branch_target_radius);
  }
  if (sc.kind == SceneKind::Stomach && sc.target_region.size() < 3) {
    throw ConfigError(origin + ".scene: stomach scene needs a target_region polygon");
  }
  try {
    sc.finalize();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ".scene: " + e.what());
  }

  if (root.contains("targets")) {
    const json& tj = root.at("targets");
    cfg.targets.generator_seed = optional_or<uint64_t>(tj, "generator_seed", 1);
    cfg.targets.count_per_list = optional_or<int>(tj, "count_per_list", 10);
    cfg.targets.min_separation = optional_or<double>(tj, "min_separation", 4.0);
  }
  return cfg;
}

SceneConfig load_scene_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene_config(buf.str(), path);
}

}  // namespace jacrl::sim
