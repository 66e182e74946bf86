#ifndef JACRL_ORACLE_QUASISTATIC_HPP_
#define JACRL_ORACLE_QUASISTATIC_HPP_

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "jacrl/errors.hpp"
#include "jacrl/sim/robot_model.hpp"

namespace jacrl::oracle {

// Free-space static equilibrium of the tendon-driven chain, found by direct
// coordinate descent on total elastic energy over the joint angles. Used as
// an integrator-independent check of the dynamic simulator's settled state.
//
// Planar: only the in-plane tendon pair (cables 0 and 1) may be displaced.
class QuasiStaticSolver {
 public:
  explicit QuasiStaticSolver(const sim::RobotModel& model) : model_(model) {
    model_.validate();
  }

  // Joint angles at equilibrium for the given tendon displacements [mm].
  std::vector<double> solve_angles(const std::array<double, 4>& tendon_mm,
                                   double tol = 1e-10,
                                   int max_sweeps = 200000) const {
    if (tendon_mm[2] != 0.0 || tendon_mm[3] != 0.0) {
      throw ValidationError(
          "QuasiStaticSolver: out-of-plane cables must be zero");
    }
    const int n = model_.num_segments;
    const int n_act = model_.actuated_segments();
    const double k_joint = model_.joint_stiffness();

    // Net in-plane moment per actuated segment; cable 0 bends toward +y,
    // cable 1 toward -y.
    const double moment =
        model_.tendon_gain * (tendon_mm[0] * model_.tendon_offsets[0] -
                              tendon_mm[1] * model_.tendon_offsets[1]);

    std::vector<double> theta(n, 0.0);
    std::vector<double> phi(n, 0.0);  // absolute segment angles

    auto recompute_phi = [&]() {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += theta[i];
        phi[i] = acc;
      }
    };

    recompute_phi();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double max_step = 0.0;
      for (int j = 0; j < n; ++j) {
        // dE/dtheta_j = k sin(theta_j) - sum_{i in act, i >= j} m cos(phi_i)
        double g = k_joint * std::sin(theta[j]);
        double h = k_joint * std::cos(theta[j]);
        for (int i = j; i < n_act; ++i) {
          g -= moment * std::cos(phi[i]);
          h += moment * std::sin(phi[i]);
        }
        if (h <= 1e-12 * k_joint) h = k_joint;  // safeguard away from flat spots
        double step = -g / h;
        step = std::clamp(step, -0.5, 0.5);
        theta[j] += step;
        recompute_phi();
        max_step = std::max(max_step, std::abs(step));
      }
      if (max_step < tol) return theta;
    }
    throw NonConvergence("QuasiStaticSolver: coordinate descent did not converge");
  }

  // Equilibrium tip position in the base frame (rest axis +x, bend in y).
  Eigen::Vector3d solve_tip(const std::array<double, 4>& tendon_mm,
                            double tol = 1e-10) const {
    const auto theta = solve_angles(tendon_mm, tol);
    return tip_from_angles(theta);
  }

  Eigen::Vector3d tip_from_angles(const std::vector<double>& theta) const {
    double x = 0.0, y = 0.0, phi = 0.0;
    for (double t : theta) {
      phi += t;
      x += model_.segment_length * std::cos(phi);
      y += model_.segment_length * std::sin(phi);
    }
    return {x, y, 0.0};
  }

  // First-order prediction: theta_j = (moments distal of j) / k_joint.
  Eigen::Vector3d linearized_tip(const std::array<double, 4>& tendon_mm) const {
    const int n = model_.num_segments;
    const int n_act = model_.actuated_segments();
    const double k_joint = model_.joint_stiffness();
    const double moment =
        model_.tendon_gain * (tendon_mm[0] * model_.tendon_offsets[0] -
                              tendon_mm[1] * model_.tendon_offsets[1]);
    std::vector<double> theta(n, 0.0);
    for (int j = 0; j < n; ++j) {
      const int distal_actuated = std::max(0, n_act - j);
      theta[j] = moment * distal_actuated / k_joint;
    }
    return tip_from_angles(theta);
  }

 private:
  sim::RobotModel model_;
};

inline Eigen::Vector3d quasi_static_oracle(const sim::RobotModel& model,
                                           const std::array<double, 4>& tendon_mm) {
  return QuasiStaticSolver(model).solve_tip(tendon_mm);
}

}  // namespace jacrl::oracle

#endif  // JACRL_ORACLE_QUASISTATIC_HPP_
