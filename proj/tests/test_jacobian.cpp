#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>

#include "jacrl/jac/analytic_check.hpp"
#include "jacrl/jac/probe.hpp"
#include "jacrl/oracle/fixtures.hpp"
#include "jacrl/oracle/ridge.hpp"
#include "jacrl/rng.hpp"
#include "jacrl/sim/scene_config.hpp"

using namespace jacrl;
using namespace jacrl::jac;
using jacrl::oracle::AnalyticFixture;

namespace {

std::string config_dir() {
  const char* d = std::getenv("JACRL_CONFIG_DIR");
  return d ? d : "configs";
}

AnalyticFixture random_linear_fixture(uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(5, 15);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return AnalyticFixture::linear_map(m);
}

// A straight channel used for the contact-vs-free comparison.
sim::LumenScene channel_scene(double half_width) {
  sim::LumenScene sc;
  sc.kind = sim::SceneKind::Stomach;
  sc.wall_rest = {{-10.0, -half_width}, {150.0, -half_width},
                  {150.0, half_width},  {-10.0, half_width}};
  sc.peristalsis_amplitude = 0.0;
  sc.target_region = {{50.0, -2.0}, {60.0, -2.0}, {60.0, 2.0}, {50.0, 2.0}};
  sc.finalize();
  return sc;
}

}  // namespace

TEST_CASE("probing a linear stub recovers scaled rows of its matrix") {
  const auto fix = random_linear_fixture(17);
  detail::FixtureHandle handle(fix, Eigen::VectorXd::Zero(5));
  const auto schedule = ProbeSchedule::scaled_identity(0.05);
  const ObservationDelta deltas = explore(handle, schedule);
  const Eigen::MatrixXd m = fix.jacobian(Eigen::VectorXd::Zero(5));
  for (int i = 0; i < 5; ++i) {
    CHECK((deltas.delta_matrix.row(i) - 0.05 * m.row(i)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("probe schedules with zero or non-orthogonal columns are rejected") {
  ProbeSchedule zero;
  zero.probe_matrix.setZero();
  CHECK_THROWS_AS(zero.validate(), ValidationError);

  ProbeSchedule skew = ProbeSchedule::scaled_identity(0.05);
  skew.probe_matrix(0, 1) = 0.05;  // columns 0 and 1 no longer orthogonal
  CHECK_THROWS_AS(skew.validate(), ValidationError);

  ProbeSchedule wide = ProbeSchedule::scaled_identity(0.45);  // beyond bounds
  CHECK_THROWS_AS(wide.validate(), ValidationError);
}

TEST_CASE("restore returns a linear stub to its entry state") {
  const auto fix = random_linear_fixture(23);
  detail::FixtureHandle handle(fix, Eigen::VectorXd::Zero(5));
  (void)explore(handle, ProbeSchedule::scaled_identity(0.05));
  CHECK(handle.q().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scaled-identity probes give the closed-form ridge factor") {
  Rng rng(31);
  ObservationDelta deltas;
  for (int i = 0; i < deltas.delta_matrix.size(); ++i) {
    deltas.delta_matrix.data()[i] = rng.normal();
  }
  for (double c : {0.01, 0.05, 0.2}) {
    for (double reg : {0.0, 0.01, 1.0}) {
      const auto schedule = ProbeSchedule::scaled_identity(c);
      const JacobianEstimate est = estimate_jacobian(schedule, deltas, reg);
      const double factor = c / (c * c + reg);
      const double err =
          (est.matrix - factor * deltas.delta_matrix).cwiseAbs().maxCoeff();
      CHECK(err < 1e-12 * std::max(1.0, std::abs(factor)));
      CHECK(est.condition_number == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("default schedule: estimate equals exactly 4x the deltas") {
  Rng rng(37);
  ObservationDelta deltas;
  for (int i = 0; i < deltas.delta_matrix.size(); ++i) {
    deltas.delta_matrix.data()[i] = rng.normal();
  }
  const JacobianEstimate est =
      estimate_jacobian(ProbeSchedule::scaled_identity(0.05), deltas, 0.01);
  CHECK((est.matrix - 4.0 * deltas.delta_matrix).cwiseAbs().maxCoeff() < 1e-13);

  ObservationDelta zeros;
  const JacobianEstimate z =
      estimate_jacobian(ProbeSchedule::scaled_identity(0.05), zeros, 0.01);
  CHECK(z.matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimator agrees with the independent ridge oracle to 1e-10") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    // Random orthogonal probe matrix: scaled permutation with random signs.
    ProbeSchedule schedule;
    schedule.probe_matrix.setZero();
    int perm[5] = {0, 1, 2, 3, 4};
    for (int i = 4; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    const double scale = rng.uniform(0.01, 0.3);
    schedule.probe_scale = scale;
    for (int i = 0; i < 5; ++i) {
      schedule.probe_matrix(perm[i], i) = rng.uniform() < 0.5 ? scale : -scale;
    }
    ObservationDelta deltas;
    for (int i = 0; i < deltas.delta_matrix.size(); ++i) {
      deltas.delta_matrix.data()[i] = rng.normal();
    }
    const double reg = rng.uniform(0.0, 0.05);

    const JacobianEstimate est = estimate_jacobian(schedule, deltas, reg);
    const Eigen::MatrixXd ref =
        oracle::ridge_oracle(schedule.probe_matrix, deltas.delta_matrix, reg);
    const double scale_ref = std::max(1.0, ref.cwiseAbs().maxCoeff());
    CHECK((est.matrix - ref).cwiseAbs().maxCoeff() / scale_ref < 1e-10);
  }
}

TEST_CASE("rank-deficient unregularized probes raise SingularSystem") {
  ProbeSchedule degenerate = ProbeSchedule::scaled_identity(0.05);
  degenerate.probe_matrix.col(4).setZero();
  ObservationDelta deltas;
  CHECK_THROWS_AS((void)estimate_jacobian(degenerate, deltas, 0.0), SingularSystem);
}

TEST_CASE("Frobenius norm of the estimate is non-increasing in reg") {
  Rng rng(43);
  ObservationDelta deltas;
  for (int i = 0; i < deltas.delta_matrix.size(); ++i) {
    deltas.delta_matrix.data()[i] = rng.normal();
  }
  const auto schedule = ProbeSchedule::scaled_identity(0.05);
  double prev = std::numeric_limits<double>::max();
  for (double reg : {0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
    const double norm = estimate_jacobian(schedule, deltas, reg).matrix.norm();
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("permuting probe order leaves the estimate unchanged") {
  const auto fix = random_linear_fixture(47);
  const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(5);

  detail::FixtureHandle h1(fix, q0);
  const auto id = ProbeSchedule::scaled_identity(0.05);
  const JacobianEstimate a = estimate_jacobian(id, explore(h1, id), 0.01);

  // Reversed probe order: columns of the probe matrix and hence rows of the
  // recorded deltas arrive permuted.
  ProbeSchedule rev;
  rev.probe_scale = 0.05;
  rev.probe_matrix.setZero();
  for (int i = 0; i < 5; ++i) rev.probe_matrix(4 - i, i) = 0.05;
  detail::FixtureHandle h2(fix, q0);
  const JacobianEstimate b = estimate_jacobian(rev, explore(h2, rev), 0.01);

  CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("augmented state layout and round trip") {
  Eigen::Matrix<double, 15, 1> obs = Eigen::Matrix<double, 15, 1>::Zero();
  JacobianEstimate jac;
  const AugmentedVector zeros = augment(obs, jac);
  CHECK(zeros.cwiseAbs().maxCoeff() == 0.0);

  jac.matrix(2, 3) = 7.0;
  obs[1] = -2.5;
  const AugmentedVector v = augment(obs, jac);
  CHECK(v[48] == 7.0);  // 15 + 2*15 + 3
  CHECK(v[1] == -2.5);
  CHECK(v.head<15>() == obs);

  const auto [obs2, jac2] = de_augment(v);
  CHECK(obs2 == obs);
  CHECK(jac2 == jac.matrix);

  CHECK_THROWS_AS((void)augment(Eigen::VectorXd::Zero(12), Eigen::MatrixXd::Zero(5, 15)),
                  ShapeMismatch);
  CHECK_THROWS_AS((void)augment(Eigen::VectorXd::Zero(15), Eigen::MatrixXd::Zero(3, 15)),
                  ShapeMismatch);
}

TEST_CASE("two-link arm recovery: corrected estimate within 1e-3") {
  const auto arm = AnalyticFixture::two_link_arm(1.0, 1.0);
  Eigen::VectorXd q0(2);
  q0 << 0.3, 0.8;
  const auto rep =
      jacobian_vs_analytic(arm, q0, ProbeSchedule::scaled_identity(1e-4), 1e-8);
  CHECK(rep.max_rel_error < 1e-3);
}

TEST_CASE("two-link arm shrinkage at probe 0.05, reg 0.01 is about 0.2") {
  const auto arm = AnalyticFixture::two_link_arm(1.0, 1.0);
  Eigen::VectorXd q0(2);
  q0 << 0.3, 0.8;
  const auto rep =
      jacobian_vs_analytic(arm, q0, ProbeSchedule::scaled_identity(0.05), 0.01);
  CHECK(rep.shrinkage_expected == doctest::Approx(0.2));
  CHECK(rep.shrinkage_measured == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("constant-curvature segment recovery within 1e-2 at probe 1e-3") {
  const auto seg = AnalyticFixture::constant_curvature(10.0);
  Eigen::VectorXd q0(1);
  q0 << 0.1;  // one-radian arc, away from the straight degeneracy
  const auto rep =
      jacobian_vs_analytic(seg, q0, ProbeSchedule::scaled_identity(1e-3), 1e-8);
  CHECK(rep.max_rel_error < 1e-2);
}

TEST_CASE("probes past actuator limits are skipped, zeroed and flagged") {
  auto cfg = sim::load_scene_config(config_dir() + "/stomach.json");
  sim::Simulator sim(cfg.robot, cfg.scene);
  sim::SimState s = sim.reset(1);
  s.tendon_displacements[0] = cfg.robot.max_tendon_travel - 0.01;

  const auto res = explore_simulator(sim, s, ProbeSchedule::scaled_identity(0.05));
  CHECK(res.deltas.skipped[0]);
  CHECK(res.deltas.delta_matrix.row(0).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 1; i < 5; ++i) CHECK_FALSE(res.deltas.skipped[i]);
  CHECK(res.deltas.delta_matrix.row(4).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("restore residual stays within the hysteresis bound") {
  auto cfg = sim::load_scene_config(config_dir() + "/stomach.json");
  sim::Simulator sim(cfg.robot, cfg.scene);
  sim::SimState s = sim.reset(2);
  // Perturb the state first so probes act away from equilibrium.
  for (int i = 0; i < 5; ++i) s = sim.step(s, sim::ActionVector({0.3, 0, 0, 0, 0.2}));

  const auto res = explore_simulator(sim, s, ProbeSchedule::scaled_identity(0.05));
  CHECK(res.probe_displacement > 0.0);
  CHECK(res.restore_residual <= 10.0 * res.probe_displacement);
}

TEST_CASE("contact shifts the estimate increasingly with contact force") {
  auto cfg = sim::load_scene_config(config_dir() + "/stomach.json");
  const auto contact_scene = channel_scene(8.0);
  auto free_scene = channel_scene(800.0);  // walls far away

  const sim::Simulator pressed(cfg.robot, contact_scene);
  const sim::Simulator free_sim(cfg.robot, free_scene);
  const auto schedule = ProbeSchedule::scaled_identity(0.05);

  double prev_dist = -1.0, prev_force = -1.0;
  for (double pull_mm : {1.2, 2.4, 4.0}) {
    auto run = [&](const sim::Simulator& sim) {
      sim::SimState s = sim.reset(3);
      const int pulls = static_cast<int>(std::round(pull_mm / 0.4));
      for (int i = 0; i < pulls; ++i) s = sim.step(s, sim::ActionVector({0.4, 0, 0, 0, 0}));
      for (int i = 0; i < 120; ++i) s = sim.step(s, sim::ActionVector{});
      const auto res = explore_simulator(sim, s, schedule);
      const JacobianEstimate est = estimate_jacobian(schedule, res.deltas, 0.01);
      Eigen::Vector3d net = Eigen::Vector3d::Zero();
      for (const auto& f : s.contact_forces) net += f;
      return std::make_pair(est.matrix, net.norm());
    };
    const auto [j_contact, force] = run(pressed);
    const auto [j_free, zero_force] = run(free_sim);
    CHECK(zero_force == 0.0);
    CHECK(force > prev_force);
    const double dist = (j_contact - j_free).norm();
    CHECK(dist > prev_dist);
    prev_dist = dist;
    prev_force = force;
  }
}
