#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "jacrl/oracle/fixtures.hpp"
#include "jacrl/oracle/quasistatic.hpp"
#include "jacrl/oracle/ridge.hpp"
#include "jacrl/rng.hpp"
#include "jacrl/sim/robot_model.hpp"

using jacrl::Rng;
using jacrl::oracle::AnalyticFixture;
using jacrl::oracle::QuasiStaticSolver;
using jacrl::oracle::ridge_oracle;
using jacrl::sim::RobotModel;

namespace {

Eigen::MatrixXd finite_difference_jacobian(const AnalyticFixture& f,
                                           const Eigen::VectorXd& q, double h) {
  Eigen::MatrixXd j(2, f.dof());
  for (int i = 0; i < f.dof(); ++i) {
    Eigen::VectorXd qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Eigen::Vector2d d = (f.tip(qp) - f.tip(qm)) / (2.0 * h);
    j.col(i) = d;
  }
  return j;
}

}  // namespace

TEST_CASE("two-link arm Jacobian matches the hand-derived value at rest") {
  const auto arm = AnalyticFixture::two_link_arm(1.0, 1.0);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd j = arm.jacobian(q);
  // Hand evaluation of the revolute-column formula z_i x (p_e - p_i):
  // row x = [0, 0], row y = [2, 1].
  CHECK(j(0, 0) == doctest::Approx(0.0));
  CHECK(j(0, 1) == doctest::Approx(0.0));
  CHECK(j(1, 0) == doctest::Approx(2.0));
  CHECK(j(1, 1) == doctest::Approx(1.0));
  CHECK(arm.singular(q));  // fully extended
}

TEST_CASE("linear map fixture returns its matrix for any configuration") {
  Rng rng(7);
  Eigen::MatrixXd m(5, 15);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  const auto fix = AnalyticFixture::linear_map(m);
  Eigen::VectorXd q(5);
  for (int i = 0; i < 5; ++i) q[i] = rng.normal();
  CHECK((fix.jacobian(q) - m).norm() == 0.0);
  CHECK((fix.observe(q) - m.transpose() * q).norm() == doctest::Approx(0.0));
}

TEST_CASE("constant-curvature tip Jacobian has the L^2/2 lateral limit") {
  const double L = 3.0;
  const auto seg = AnalyticFixture::constant_curvature(L);
  Eigen::VectorXd q(1);
  q[0] = 0.0;
  const Eigen::MatrixXd j = seg.jacobian(q);
  CHECK(j(0, 0) == doctest::Approx(L * L / 2.0));  // lateral term
  CHECK(j(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("fixture Jacobians self-validate against finite differences") {
  const auto arm = AnalyticFixture::two_link_arm(1.3, 0.8);
  const auto seg = AnalyticFixture::constant_curvature(2.5);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd qa(2);
    qa << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
    const Eigen::MatrixXd ja = arm.jacobian(qa);
    const Eigen::MatrixXd fa = finite_difference_jacobian(arm, qa, 1e-6);
    CHECK((ja - fa).cwiseAbs().maxCoeff() / std::max(1.0, ja.cwiseAbs().maxCoeff()) < 1e-6);

    Eigen::VectorXd qs(1);
    qs << rng.uniform(-0.4, 0.4);
    const Eigen::MatrixXd js = seg.jacobian(qs);
    const Eigen::MatrixXd fs = finite_difference_jacobian(seg, qs, 1e-6);
    CHECK((js - fs).cwiseAbs().maxCoeff() / std::max(1.0, js.cwiseAbs().maxCoeff()) < 1e-6);
  }
}

TEST_CASE("ridge oracle identity and scaled-identity closed forms") {
  Rng rng(3);
  Eigen::MatrixXd O(5, 15);
  for (int i = 0; i < O.size(); ++i) O.data()[i] = rng.normal();

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(5, 5);
  CHECK((ridge_oracle(eye, O, 0.0) - O).cwiseAbs().maxCoeff() < 1e-12);

  // 0.05 / (0.05^2 + 0.01) = 4
  const Eigen::MatrixXd x = ridge_oracle(0.05 * eye, O, 0.01);
  CHECK((x - 4.0 * O).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ridge oracle rejects rank-deficient unregularized systems") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
  A.row(0).setOnes();
  A.row(1).setOnes();  // duplicate direction -> rank 1
  Eigen::MatrixXd O = Eigen::MatrixXd::Ones(5, 15);
  CHECK_THROWS_AS((void)ridge_oracle(A, O, 0.0), jacrl::SingularSystem);
  CHECK_NOTHROW((void)ridge_oracle(A, O, 0.01));
}

TEST_CASE("quasi-static solver: zero tendon state is the straight rest shape") {
  const RobotModel model = RobotModel::with_young_modulus(15000.0);
  QuasiStaticSolver solver(model);
  const Eigen::Vector3d tip = solver.solve_tip({0.0, 0.0, 0.0, 0.0});
  CHECK(tip.x() == doctest::Approx(model.total_length()));
  CHECK(tip.y() == doctest::Approx(0.0));
}

TEST_CASE("quasi-static solver: stiffer material deflects strictly less") {
  const std::array<double, 4> pull = {2.0, 0.0, 0.0, 0.0};
  double prev = std::numeric_limits<double>::max();
  for (double ym : {10000.0, 15000.0, 25000.0}) {
    const RobotModel model = RobotModel::with_young_modulus(ym);
    const Eigen::Vector3d tip = QuasiStaticSolver(model).solve_tip(pull);
    const double deflection = std::abs(tip.y());
    CHECK(deflection > 0.0);
    CHECK(deflection < prev);
    prev = deflection;
  }
}

TEST_CASE("quasi-static solver: small pull matches the linearized prediction") {
  const RobotModel model = RobotModel::with_young_modulus(15000.0);
  QuasiStaticSolver solver(model);
  const std::array<double, 4> pull = {0.2, 0.0, 0.0, 0.0};
  const Eigen::Vector3d tip = solver.solve_tip(pull);
  const Eigen::Vector3d lin = solver.linearized_tip(pull);
  const Eigen::Vector3d rest(model.total_length(), 0.0, 0.0);
  const double got = (tip - rest).norm();
  const double expect = (lin - rest).norm();
  CHECK(got == doctest::Approx(expect).epsilon(0.10));
}
