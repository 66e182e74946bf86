#include "jacrl/jac/probe.hpp"

#include <Eigen/Eigenvalues>

namespace jacrl::jac {

ObservationDelta explore(ProbeHandle& handle, const ProbeSchedule& schedule) {
  schedule.validate();
  ObservationDelta out;
  for (int i = 0; i < kActionDim; ++i) {
    const auto delta = schedule.probe(i);
    if (!handle.within_limits(delta)) {
      out.skipped[i] = true;
      continue;  // row stays zero
    }
    const Eigen::Matrix<double, kObsDim, 1> before = handle.observe();
    handle.apply(delta, schedule.skip_collision_checks);
    const Eigen::Matrix<double, kObsDim, 1> after = handle.observe();
    out.delta_matrix.row(i) = (after - before).transpose();
    if (schedule.restore) {
      std::array<double, kActionDim> undo;
      for (int k = 0; k < kActionDim; ++k) undo[k] = -delta[k];
      handle.apply(undo, schedule.skip_collision_checks);
    }
  }
  if (!out.delta_matrix.allFinite()) {
    throw NumericalBlowup("explore: non-finite observation variation");
  }
  return out;
}

JacobianEstimate estimate_jacobian(const ProbeSchedule& probes,
                                   const ObservationDelta& deltas, double reg) {
  if (reg < 0.0) throw ValidationError("estimate_jacobian: reg must be >= 0");
  if (!deltas.delta_matrix.allFinite()) {
    throw ValidationError("estimate_jacobian: deltas must be finite");
  }

  const ProbeMatrix& dA = probes.probe_matrix;
  ProbeMatrix normal = dA * dA.transpose();
  normal.diagonal().array() += reg;

  Eigen::SelfAdjointEigenSolver<ProbeMatrix> eig(normal);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (reg == 0.0 && lo <= 1e-12 * std::max(hi, 1.0)) {
    throw SingularSystem("estimate_jacobian: dA dA^T is rank deficient and reg = 0");
  }

  JacobianEstimate est;
  est.matrix = Eigen::LLT<ProbeMatrix>(normal).solve(dA * deltas.delta_matrix);
  est.reg_lambda = reg;
  est.condition_number = hi / lo;
  est.probe_scale = probes.probe_scale;
  return est;
}

AugmentedVector augment(const Eigen::Matrix<double, kObsDim, 1>& obs,
                        const JacobianEstimate& jac) {
  AugmentedVector v;
  v.head<kObsDim>() = obs;
  for (int r = 0; r < kActionDim; ++r) {
    for (int c = 0; c < kObsDim; ++c) {
      v[kObsDim + r * kObsDim + c] = jac.matrix(r, c);
    }
  }
  return v;
}

Eigen::VectorXd augment(const Eigen::VectorXd& obs, const Eigen::MatrixXd& jac) {
  if (obs.size() != kObsDim) throw ShapeMismatch("augment: observation must have 15 entries");
  if (jac.rows() != kActionDim || jac.cols() != kObsDim) {
    throw ShapeMismatch("augment: Jacobian must be 5x15");
  }
  JacobianEstimate est;
  est.matrix = jac;
  return augment(Eigen::Matrix<double, kObsDim, 1>(obs), est);
}

std::pair<Eigen::Matrix<double, kObsDim, 1>, DeltaMatrix> de_augment(
    const AugmentedVector& aug) {
  Eigen::Matrix<double, kObsDim, 1> obs = aug.head<kObsDim>();
  DeltaMatrix jac;
  for (int r = 0; r < kActionDim; ++r) {
    for (int c = 0; c < kObsDim; ++c) {
      jac(r, c) = aug[kObsDim + r * kObsDim + c];
    }
  }
  return {obs, jac};
}

namespace {

class SimulatorHandle final : public ProbeHandle {
 public:
  SimulatorHandle(const sim::Simulator& s, sim::SimState state)
      : sim_(s), state_(std::move(state)) {}

  Eigen::Matrix<double, kObsDim, 1> observe() const override {
    // prev-action slots are held fixed during probing so the probe itself
    // never shows up as a fake observation variation.
    return sim_.observe(state_, sim::ActionVector{});
  }

  void apply(const std::array<double, kActionDim>& delta, bool skip_collision) override {
    state_ = sim_.probe_substep(state_, delta, skip_collision);
  }

  bool within_limits(const std::array<double, kActionDim>& delta) const override {
    return sim_.probe_within_limits(state_, delta);
  }

  const sim::SimState& state() const { return state_; }

 private:
  const sim::Simulator& sim_;
  sim::SimState state_;
};

double max_node_deviation(const sim::SimState& a, const sim::SimState& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.node_positions.size(); ++i) {
    m = std::max(m, (a.node_positions[i] - b.node_positions[i]).norm());
  }
  return m;
}

}  // namespace

SimExploreResult explore_simulator(const sim::Simulator& sim,
                                   const sim::SimState& state,
                                   const ProbeSchedule& schedule) {
  schedule.validate();
  SimExploreResult out;
  SimulatorHandle handle(sim, state);

  // Inline variant of explore() that also tracks displacement magnitudes.
  for (int i = 0; i < kActionDim; ++i) {
    const auto delta = schedule.probe(i);
    if (!handle.within_limits(delta)) {
      out.deltas.skipped[i] = true;
      continue;
    }
    const sim::SimState before_state = handle.state();
    const Eigen::Matrix<double, kObsDim, 1> before = handle.observe();
    handle.apply(delta, schedule.skip_collision_checks);
    out.probe_displacement = std::max(
        out.probe_displacement, max_node_deviation(handle.state(), before_state));
    out.tip_path += (handle.state().node_positions.back() -
                     before_state.node_positions.back()).norm();
    const Eigen::Matrix<double, kObsDim, 1> after = handle.observe();
    out.deltas.delta_matrix.row(i) = (after - before).transpose();
    if (schedule.restore) {
      std::array<double, kActionDim> undo;
      for (int k = 0; k < kActionDim; ++k) undo[k] = -delta[k];
      const Eigen::Vector3d tip_before_undo = handle.state().node_positions.back();
      handle.apply(undo, schedule.skip_collision_checks);
      out.tip_path += (handle.state().node_positions.back() - tip_before_undo).norm();
    }
  }
  if (!out.deltas.delta_matrix.allFinite()) {
    throw NumericalBlowup("explore: non-finite observation variation");
  }
  out.state = handle.state();
  out.restore_residual = max_node_deviation(out.state, state);
  return out;
}

}  // namespace jacrl::jac
