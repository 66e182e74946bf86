#ifndef JACRL_JAC_ANALYTIC_CHECK_HPP_
#define JACRL_JAC_ANALYTIC_CHECK_HPP_

#include <Eigen/Dense>
#include <cmath>

#include "jacrl/jac/probe.hpp"
#include "jacrl/oracle/fixtures.hpp"

namespace jacrl::jac {

// Probes an analytic fixture and compares the ridge estimate against its
// closed-form Jacobian (position rows only for the kinematic fixtures).
struct AnalyticCheckReport {
  // Error of the shrinkage-corrected estimate against the closed form.
  double max_rel_error = 0.0;
  // Ridge shrinkage c^2 / (c^2 + reg) predicted for scaled-identity probes.
  double shrinkage_expected = 1.0;
  // Least-squares ratio of the raw estimate against the finite-difference
  // Jacobian measured with the same probes.
  double shrinkage_measured = 1.0;
  double condition_number = 1.0;
};

namespace detail {

class FixtureHandle final : public ProbeHandle {
 public:
  FixtureHandle(const oracle::AnalyticFixture& f, Eigen::VectorXd q)
      : fixture_(f), q_(std::move(q)) {}

  Eigen::Matrix<double, kObsDim, 1> observe() const override {
    return fixture_.observe(q_);
  }

  void apply(const std::array<double, kActionDim>& delta, bool) override {
    for (int i = 0; i < fixture_.dof() && i < kActionDim; ++i) q_[i] += delta[i];
  }

  bool within_limits(const std::array<double, kActionDim>&) const override {
    return true;
  }

  const Eigen::VectorXd& q() const { return q_; }

 private:
  const oracle::AnalyticFixture& fixture_;
  Eigen::VectorXd q_;
};

}  // namespace detail

inline AnalyticCheckReport jacobian_vs_analytic(const oracle::AnalyticFixture& fixture,
                                                const Eigen::VectorXd& q0,
                                                const ProbeSchedule& schedule,
                                                double reg) {
  schedule.validate();
  const double c = schedule.probe_scale;
  if ((schedule.probe_matrix - c * ProbeMatrix::Identity()).cwiseAbs().maxCoeff() >
      1e-12 * std::abs(c)) {
    throw ValidationError(
        "jacobian_vs_analytic: shrinkage correction needs scaled-identity probes");
  }

  detail::FixtureHandle handle(fixture, q0);
  const ObservationDelta deltas = explore(handle, schedule);
  const JacobianEstimate est = estimate_jacobian(schedule, deltas, reg);

  AnalyticCheckReport rep;
  rep.condition_number = est.condition_number;
  rep.shrinkage_expected = c * c / (c * c + reg);
  const DeltaMatrix corrected = est.matrix / rep.shrinkage_expected;

  const Eigen::MatrixXd exact = fixture.jacobian(q0);
  // Finite-difference Jacobian from the same probe deltas (rows / c).
  const DeltaMatrix fd = deltas.delta_matrix / c;

  double num = 0.0, den = 0.0;
  const bool linear = fixture.kind() == oracle::AnalyticFixture::Kind::LinearMap;
  const int rows = fixture.dof();
  const int cols = linear ? kObsDim : 2;
  const double floor = 1e-9 * std::max(1.0, exact.cwiseAbs().maxCoeff());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      // Kinematic fixtures expose J as (position row, joint column).
      const double truth = linear ? exact(i, j) : exact(j, i);
      const double got = corrected(i, j);
      rep.max_rel_error = std::max(
          rep.max_rel_error, std::abs(got - truth) / std::max(std::abs(truth), floor));
      num += est.matrix(i, j) * fd(i, j);
      den += fd(i, j) * fd(i, j);
    }
  }
  rep.shrinkage_measured = den > 0.0 ? num / den : 0.0;
  return rep;
}

}  // namespace jacrl::jac

#endif  // JACRL_JAC_ANALYTIC_CHECK_HPP_
