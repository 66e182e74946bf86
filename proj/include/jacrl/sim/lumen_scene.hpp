#ifndef JACRL_SIM_LUMEN_SCENE_HPP_
#define JACRL_SIM_LUMEN_SCENE_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "jacrl/errors.hpp"
#include "jacrl/sim/geometry.hpp"

namespace jacrl::sim {

enum class SceneKind { Stomach, Vessel };

inline std::string to_string(SceneKind k) {
  return k == SceneKind::Stomach ? "stomach" : "vessel";
}

// Deformable lumen: a closed planar outline whose vertices oscillate along
// their inward normals as a traveling wave (peristalsis). The robot enters
// at entry_point along entry_axis and must stay inside the outline.
struct LumenScene {
  SceneKind kind = SceneKind::Stomach;
  Polygon wall_rest;                 // CCW closed outline, rest positions
  double wall_stiffness = 5.0;       // contact penalty [N/mm]
  double peristalsis_amplitude = 1.5;  // [mm]
  double peristalsis_frequency = 0.5;  // [Hz]
  double peristalsis_wavenumber = 0.08;  // [1/mm] along the outline

  Eigen::Vector2d entry_point = Eigen::Vector2d::Zero();
  double entry_angle = 0.0;  // radians, 0 points along +x

  // Target geometry. Stomach: targets sampled inside target_region.
  // Vessel: targets in discs at the two branch ends.
  Polygon target_region;
  Eigen::Vector2d branch_end_upper = Eigen::Vector2d::Zero();
  Eigen::Vector2d branch_end_lower = Eigen::Vector2d::Zero();
  double branch_target_radius = 5.0;

  // Cached outline metadata, filled by finalize().
  std::vector<double> arclengths;
  std::vector<Eigen::Vector2d> inward_normals;

  void finalize() {
    if (wall_rest.size() < 3) throw ConfigError("LumenScene: wall needs >= 3 vertices");
    if (polygon_signed_area(wall_rest) < 0.0) {
      throw ConfigError("LumenScene: wall outline must be counter-clockwise");
    }
    if (peristalsis_amplitude < 0.0) {
      throw ConfigError("LumenScene: peristalsis_amplitude must be >= 0");
    }
    if (wall_stiffness <= 0.0) throw ConfigError("LumenScene: wall_stiffness must be > 0");
    arclengths = polygon_arclengths(wall_rest);
    inward_normals = polygon_inward_normals(wall_rest);
  }

  Eigen::Vector3d entry_axis() const {
    return {std::cos(entry_angle), std::sin(entry_angle), 0.0};
  }

  // Radial offset of vertex v at time t; amplitude 0 gives a static wall.
  double vertex_offset(size_t v, double t, double phase, double amplitude_scale) const {
    const double a = peristalsis_amplitude * amplitude_scale;
    if (a == 0.0) return 0.0;
    return a * std::sin(2.0 * M_PI * peristalsis_frequency * t -
                        peristalsis_wavenumber * arclengths[v] + phase);
  }

  Polygon displaced_wall(double t, double phase, double amplitude_scale) const {
    Polygon out(wall_rest.size());
    for (size_t v = 0; v < wall_rest.size(); ++v) {
      out[v] = wall_rest[v] + vertex_offset(v, t, phase, amplitude_scale) * inward_normals[v];
    }
    return out;
  }
};

}  // namespace jacrl::sim

#endif  // JACRL_SIM_LUMEN_SCENE_HPP_
