#ifndef JACRL_SIM_SCENE_CONFIG_HPP_
#define JACRL_SIM_SCENE_CONFIG_HPP_

#include <string>

#include "jacrl/sim/lumen_scene.hpp"
#include "jacrl/sim/robot_model.hpp"

namespace jacrl::sim {

struct TargetGenSpec {
  uint64_t generator_seed = 0;
  int count_per_list = 10;
  double min_separation = 4.0;  // [mm] between any two generated targets
};

struct SceneConfig {
  RobotModel robot;
  LumenScene scene;
  TargetGenSpec targets;
  std::string source_path;
  std::string raw_json;  // snapshot for run directories / hashing
};

// Loads and validates a scene config file. Throws ConfigError with the
// offending key path (or parse position) in the message.
SceneConfig load_scene_config(const std::string& path);
SceneConfig parse_scene_config(const std::string& json_text, const std::string& origin);

}  // namespace jacrl::sim

#endif  // JACRL_SIM_SCENE_CONFIG_HPP_
