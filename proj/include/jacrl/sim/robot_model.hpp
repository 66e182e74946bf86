#ifndef JACRL_SIM_ROBOT_MODEL_HPP_
#define JACRL_SIM_ROBOT_MODEL_HPP_

#include <algorithm>
#include <array>
#include <cmath>

#include "jacrl/errors.hpp"

namespace jacrl::sim {

inline constexpr double kActionBound = 0.4;
inline constexpr int kNumTendons = 4;
inline constexpr int kActionDim = 5;  // 4 tendons + axial drive

// Tendon-driven backbone discretized as a node chain with torsional joint
// springs. Only the proximal actuated fraction receives tendon moments; the
// distal body is passive and deforms through elasticity and contact.
struct RobotModel {
  int num_segments = 8;
  double segment_length = 8.0;      // [mm]
  double actuated_fraction = 0.15;  // proximal segments with direct moments
  double bending_stiffness = 0.0;   // [N mm^2], set via set_young_modulus
  double axial_stiffness = 6.0;     // [N/mm]
  double damping = 0.025;           // [N s/mm] per-node drag
  std::array<double, kNumTendons> tendon_offsets = {2.5, 2.5, 2.5, 2.5};  // [mm]
  double young_modulus = 15000.0;   // dimensionless material knob
  double poisson_ratio = 0.3;

  // Artifact parameters not fixed by the physical description above.
  double tendon_gain = 9.0;         // cable tension per mm of displacement [N/mm]
  double node_mass = 0.02;
  double plane_stiffness = 3.0;     // soft confinement of out-of-plane motion
  double max_tendon_travel = 6.0;   // [mm] actuator limit, symmetric
  double max_insertion = 30.0;      // [mm] axial drive range is [0, max]
  double cross_section_radius = 3.0;  // [mm] used for contact and inertia

  // Second moment of a solid circular section, radius fixed at 3 mm.
  static double section_inertia(double radius) {
    return M_PI * std::pow(radius, 4) / 4.0;
  }

  // Bending stiffness scales linearly with the modulus; only relative
  // effects matter, the geometric constant sets the desk-scale response.
  void set_young_modulus(double ym) {
    young_modulus = ym;
    bending_stiffness = kGeomConstant * ym * section_inertia(cross_section_radius);
  }

  int num_nodes() const { return num_segments + 1; }

  int actuated_segments() const {
    const int n = static_cast<int>(std::floor(num_segments * actuated_fraction + 1e-9));
    return std::max(1, n);
  }

  double joint_stiffness() const { return bending_stiffness / segment_length; }

  double total_length() const { return num_segments * segment_length; }

  void validate() const {
    if (num_segments < 8) throw ConfigError("RobotModel: num_segments must be >= 8");
    if (segment_length <= 0.0) throw ConfigError("RobotModel: segment_length must be > 0");
    if (actuated_fraction <= 0.0 || actuated_fraction > 1.0)
      throw ConfigError("RobotModel: actuated_fraction must be in (0, 1]");
    if (bending_stiffness <= 0.0) throw ConfigError("RobotModel: bending_stiffness must be > 0");
    if (axial_stiffness <= 0.0) throw ConfigError("RobotModel: axial_stiffness must be > 0");
    if (damping <= 0.0) throw ConfigError("RobotModel: damping must be > 0");
    if (tendon_gain <= 0.0) throw ConfigError("RobotModel: tendon_gain must be > 0");
    if (node_mass <= 0.0) throw ConfigError("RobotModel: node_mass must be > 0");
    for (double r : tendon_offsets)
      if (r <= 0.0) throw ConfigError("RobotModel: tendon offsets must be > 0");
  }

  static RobotModel with_young_modulus(double ym) {
    RobotModel m;
    m.set_young_modulus(ym);
    return m;
  }

  static constexpr double kGeomConstant = 0.002;
};

// Per-step command: 4 tendon displacement increments plus one axial
// insertion increment, clamped to the global action bounds.
class ActionVector {
 public:
  ActionVector() : values_{0, 0, 0, 0, 0} {}

  explicit ActionVector(const std::array<double, kActionDim>& raw) {
    for (int i = 0; i < kActionDim; ++i) {
      const double v = raw[i];
      values_[i] = std::clamp(v, -kActionBound, kActionBound);
      if (v != values_[i]) clamped_ = true;
    }
  }

  double operator[](int i) const { return values_[i]; }
  const std::array<double, kActionDim>& values() const { return values_; }
  bool was_clamped() const { return clamped_; }

  double tendon(int c) const { return values_[c]; }
  double axial() const { return values_[kNumTendons]; }

 private:
  std::array<double, kActionDim> values_;
  bool clamped_ = false;
};

}  // namespace jacrl::sim

#endif  // JACRL_SIM_ROBOT_MODEL_HPP_
