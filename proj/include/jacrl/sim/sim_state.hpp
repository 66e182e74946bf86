#ifndef JACRL_SIM_SIM_STATE_HPP_
#define JACRL_SIM_SIM_STATE_HPP_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <cstring>
#include <vector>

namespace jacrl::sim {

// Full physics state. Everything a macro-step reads or writes lives here,
// so replay from (seed, action sequence) is bit-exact and states can be
// moved freely between threads.
struct SimState {
  std::vector<Eigen::Vector3d> node_positions;
  std::vector<Eigen::Vector3d> node_velocities;
  Eigen::Vector4d tendon_displacements = Eigen::Vector4d::Zero();
  double axial_insertion = 0.0;
  std::vector<double> wall_displacement;  // per-vertex radial offset at last detection
  double sim_time = 0.0;
  uint64_t rng_state = 0;

  // Contact bookkeeping carried between detection substeps.
  double peristalsis_phase = 0.0;
  double peristalsis_scale = 1.0;
  std::vector<Eigen::Vector3d> contact_forces;   // held penalty force per node
  std::vector<double> penetrations;              // held penetration depth per node

  bool operator==(const SimState& o) const {
    auto v3_eq = [](const std::vector<Eigen::Vector3d>& a,
                    const std::vector<Eigen::Vector3d>& b) {
      if (a.size() != b.size()) return false;
      for (size_t i = 0; i < a.size(); ++i) {
        if ((a[i].array() != b[i].array()).any()) return false;
      }
      return true;
    };
    return v3_eq(node_positions, o.node_positions) &&
           v3_eq(node_velocities, o.node_velocities) &&
           (tendon_displacements.array() == o.tendon_displacements.array()).all() &&
           axial_insertion == o.axial_insertion &&
           wall_displacement == o.wall_displacement &&
           sim_time == o.sim_time && rng_state == o.rng_state &&
           peristalsis_phase == o.peristalsis_phase &&
           peristalsis_scale == o.peristalsis_scale &&
           v3_eq(contact_forces, o.contact_forces) &&
           penetrations == o.penetrations;
  }

  std::vector<uint8_t> serialize() const;
  static SimState deserialize(const std::vector<uint8_t>& bytes);
};

}  // namespace jacrl::sim

#endif  // JACRL_SIM_SIM_STATE_HPP_
