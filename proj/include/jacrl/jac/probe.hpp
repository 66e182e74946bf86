#ifndef JACRL_JAC_PROBE_HPP_
#define JACRL_JAC_PROBE_HPP_

#include <Eigen/Dense>
#include <array>

#include "jacrl/errors.hpp"
#include "jacrl/sim/simulator.hpp"

namespace jacrl::jac {

inline constexpr int kActionDim = sim::kActionDim;
inline constexpr int kObsDim = sim::kObservationDim;
inline constexpr int kAugmentedDim = kObsDim + kActionDim * kObsDim;  // 90

using ProbeMatrix = Eigen::Matrix<double, kActionDim, kActionDim>;
using DeltaMatrix = Eigen::Matrix<double, kActionDim, kObsDim>;
using AugmentedVector = Eigen::Matrix<double, kAugmentedDim, 1>;

// Orthogonal exploratory perturbations applied before each policy action.
// Columns of probe_matrix are the individual probes.
struct ProbeSchedule {
  double probe_scale = 0.05;
  ProbeMatrix probe_matrix = 0.05 * ProbeMatrix::Identity();
  bool restore = true;
  bool skip_collision_checks = true;

  static ProbeSchedule scaled_identity(double scale) {
    ProbeSchedule s;
    s.probe_scale = scale;
    s.probe_matrix = scale * ProbeMatrix::Identity();
    return s;
  }

  std::array<double, kActionDim> probe(int i) const {
    std::array<double, kActionDim> d;
    for (int k = 0; k < kActionDim; ++k) d[k] = probe_matrix(k, i);
    return d;
  }

  void validate() const {
    for (int i = 0; i < kActionDim; ++i) {
      const double ni = probe_matrix.col(i).norm();
      if (ni == 0.0) throw ValidationError("ProbeSchedule: probe column is zero");
      if (probe_matrix.col(i).cwiseAbs().maxCoeff() > sim::kActionBound) {
        throw ValidationError("ProbeSchedule: probe exceeds action bounds");
      }
      for (int j = i + 1; j < kActionDim; ++j) {
        const double nj = probe_matrix.col(j).norm();
        if (std::abs(probe_matrix.col(i).dot(probe_matrix.col(j))) > 1e-9 * ni * nj) {
          throw ValidationError("ProbeSchedule: probe columns are not orthogonal");
        }
      }
    }
  }
};

// Per-probe observation variation; row i corresponds to probe column i.
struct ObservationDelta {
  DeltaMatrix delta_matrix = DeltaMatrix::Zero();
  std::array<bool, kActionDim> skipped = {false, false, false, false, false};

  bool any_skipped() const {
    for (bool s : skipped)
      if (s) return true;
    return false;
  }
};

struct JacobianEstimate {
  DeltaMatrix matrix = DeltaMatrix::Zero();
  double reg_lambda = 0.01;
  double condition_number = 1.0;
  double probe_scale = 0.05;
};

// Minimal simulator surface needed for probing. The production adapter wraps
// sim::Simulator; fixtures and stubs implement it directly in tests.
class ProbeHandle {
 public:
  virtual ~ProbeHandle() = default;
  virtual Eigen::Matrix<double, kObsDim, 1> observe() const = 0;
  virtual void apply(const std::array<double, kActionDim>& delta, bool skip_collision) = 0;
  virtual bool within_limits(const std::array<double, kActionDim>& delta) const = 0;
};

// Applies each probe for one micro-step, records the observation variation,
// and (by default) undoes the probe. Probes that would exceed actuator
// limits are skipped with their row zeroed and flagged.
ObservationDelta explore(ProbeHandle& handle, const ProbeSchedule& schedule);

// Ridge estimate (dA dA^T + reg I)^{-1} dA dO via an SPD solve; records the
// condition number of the regularized normal matrix.
JacobianEstimate estimate_jacobian(const ProbeSchedule& probes,
                                   const ObservationDelta& deltas, double reg);

// [o_t; vec(J) row-major]; the first 15 entries are the raw observation.
AugmentedVector augment(const Eigen::Matrix<double, kObsDim, 1>& obs,
                        const JacobianEstimate& jac);
// Dynamic-size variant with shape checking.
Eigen::VectorXd augment(const Eigen::VectorXd& obs, const Eigen::MatrixXd& jac);

std::pair<Eigen::Matrix<double, kObsDim, 1>, DeltaMatrix> de_augment(
    const AugmentedVector& aug);

// Production adapter: probes a simulator state with prev-action inputs held
// fixed, freezing sim time (micro-steps run between control ticks).
struct SimExploreResult {
  ObservationDelta deltas;
  sim::SimState state;            // post-restore state
  double probe_displacement = 0;  // max node displacement during probing [mm]
  double restore_residual = 0;    // max node deviation after restore [mm]
  double tip_path = 0;            // tip path length over probe micro-steps [mm]
};

SimExploreResult explore_simulator(const sim::Simulator& sim,
                                   const sim::SimState& state,
                                   const ProbeSchedule& schedule);

}  // namespace jacrl::jac

#endif  // JACRL_JAC_PROBE_HPP_
