#ifndef JACRL_SIM_SIMULATOR_HPP_
#define JACRL_SIM_SIMULATOR_HPP_

#include <Eigen/Dense>
#include <array>
#include <cstdint>

#include "jacrl/sim/lumen_scene.hpp"
#include "jacrl/sim/robot_model.hpp"
#include "jacrl/sim/sim_state.hpp"

namespace jacrl::sim {

inline constexpr int kObservationDim = 15;
inline constexpr double kSubstepDt = 0.025;  // 40 Hz physics
inline constexpr int kSubstepsPerMacro = 10;  // 4 Hz control

using Observation = Eigen::Matrix<double, kObservationDim, 1>;

// Deterministic physics core: semi-implicit Euler over the node chain with
// elastic, damping, tendon-couple, wall-penalty and peristaltic forcing.
// One instance is single-threaded; instances are independent.
class Simulator {
 public:
  Simulator(RobotModel model, LumenScene scene);

  const RobotModel& model() const { return model_; }
  const LumenScene& scene() const { return scene_; }

  // Robot at the canonical entry pose, wall phase drawn from the seed.
  SimState reset(uint64_t seed, double peristalsis_scale = 1.0) const;

  // One macro-step: 10 substeps at 25 ms, collision detection on substeps
  // 0,2,4,6,8 and the final one; actuator positions ramp by the action
  // increment over the substeps.
  SimState step(const SimState& state, const ActionVector& action) const;

  // One probe micro-step: actuators jump by delta, a single substep is
  // integrated with sim_time frozen. Collision detection is skipped when
  // requested (held forces continue to apply).
  SimState probe_substep(const SimState& state,
                         const std::array<double, kActionDim>& delta,
                         bool skip_collision) const;

  // 15 numbers: tip position (3), tip velocity (3), previous action (5),
  // net contact force on the distal three nodes (3), contact flag (1).
  Observation observe(const SimState& state, const ActionVector& prev_action) const;

  // World-frame tip position of the last node.
  Eigen::Vector3d tip_position(const SimState& state) const {
    return state.node_positions.back();
  }

  // Base anchor for the current insertion depth.
  Eigen::Vector3d base_anchor(double insertion) const;

  // True if any node currently penetrates the wall (held data).
  bool in_contact(const SimState& state) const;

  // Actuator limits used by probe feasibility checks.
  bool probe_within_limits(const SimState& state,
                           const std::array<double, kActionDim>& delta) const;

 private:
  void detect_contacts(SimState& s) const;
  void accumulate_forces(const SimState& s,
                         std::vector<Eigen::Vector3d>& force) const;
  void integrate_substep(SimState& s, double tendon_rate[kNumTendons],
                         double axial_rate, bool detect) const;
  void check_finite(const SimState& s) const;

  RobotModel model_;
  LumenScene scene_;
};

}  // namespace jacrl::sim

#endif  // JACRL_SIM_SIMULATOR_HPP_
