#include "jacrl/harness/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "jacrl/jac/analytic_check.hpp"
#include "jacrl/oracle/quasistatic.hpp"
#include "jacrl/oracle/ridge.hpp"

namespace jacrl::harness {

namespace fs = std::filesystem;

namespace {

sim::SceneConfig load_scene_for(const ExperimentPlan& plan) {
  return sim::load_scene_config(plan.scene_config_path);
}

// Training target list: A in the stomach, both branch lists in the vessel.
env::TargetList training_list(const sim::SceneConfig& scene) {
  if (scene.scene.kind == sim::SceneKind::Stomach) {
    return env::make_target_list(scene, env::TargetListId::A);
  }
  env::TargetList ub = env::make_target_list(scene, env::TargetListId::VesselUB);
  const env::TargetList lb = env::make_target_list(scene, env::TargetListId::VesselLB);
  ub.targets.insert(ub.targets.end(), lb.targets.begin(), lb.targets.end());
  return ub;
}

// Evaluation lists: B in the stomach, per-branch rows in the vessel.
std::vector<std::pair<std::string, env::TargetList>> eval_lists(
    const sim::SceneConfig& scene) {
  if (scene.scene.kind == sim::SceneKind::Stomach) {
    return {{"", env::make_target_list(scene, env::TargetListId::B)}};
  }
  return {{"UB", env::make_target_list(scene, env::TargetListId::VesselUB)},
          {"LB", env::make_target_list(scene, env::TargetListId::VesselLB)}};
}

rl::TrainConfig make_train_config(const ExperimentPlan& plan,
                                  const sim::SceneConfig& scene, uint64_t seed,
                                  const std::string& out_dir) {
  rl::TrainConfig cfg;
  cfg.mode = plan.mode;
  cfg.scene = scene;
  cfg.episode.max_macro_steps = plan.max_macro_steps;
  cfg.explicit_targets = training_list(scene);
  if (plan.ym_randomize) {
    cfg.ym_randomization = {plan.ym_low, plan.ym_high};
  } else {
    cfg.episode.young_modulus_override = plan.ym_list.front();
  }
  cfg.seed = seed;
  cfg.total_steps = plan.train_steps;
  cfg.rollout_len = plan.rollout_len;
  cfg.n_envs = plan.n_envs;
  cfg.lr = plan.lr;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

std::string run_hash(const ExperimentPlan& plan, uint64_t seed,
                     const std::string& scene_raw) {
  return rl::config_hash_hex(plan.raw_json + "|" + std::to_string(seed) + "|" +
                             scene_raw);
}

std::string run_dir_name(const ExperimentPlan& plan, uint64_t seed) {
  return plan.name + "_" + env::to_string(plan.mode) + "_seed" + std::to_string(seed);
}

TrainOutput cmd_train(const ExperimentPlan& plan, const std::string& out_root,
                      bool force) {
  plan.validate();
  const sim::SceneConfig scene = load_scene_for(plan);
  TrainOutput out;

  for (uint64_t seed : plan.seeds) {
    const fs::path dir = fs::path(out_root) / run_dir_name(plan, seed);
    if (fs::exists(dir)) {
      if (!force) {
        throw ValidationError("cmd_train: run directory exists, pass --force to overwrite: " +
                              dir.string());
      }
      fs::remove_all(dir);
    }
    fs::create_directories(dir);
    std::ofstream(dir / "config_snapshot.json") << scene.raw_json;
    std::ofstream(dir / "plan.json") << plan.raw_json;
    std::ofstream(dir / "run_hash.txt") << run_hash(plan, seed, scene.raw_json) << "\n";

    const rl::TrainConfig cfg = make_train_config(plan, scene, seed, dir.string());
    (void)rl::train(cfg);

    // Post-training evaluation feeding cmd_compare.
    ExperimentPlan eval_plan = plan;
    eval_plan.seeds = {seed};
    (void)cmd_eval((dir / "ckpt_final").string(), eval_plan,
                   (dir / "metrics.csv").string());
    out.run_dirs.push_back(dir.string());
  }
  return out;
}

ResultsTable cmd_eval(const std::string& checkpoint_base, const ExperimentPlan& plan,
                      const std::string& out_csv) {
  plan.validate();
  const rl::Checkpoint ckpt = rl::load_checkpoint(checkpoint_base);
  auto [net, norm] = rl::instantiate(ckpt);
  const sim::SceneConfig scene = load_scene_for(plan);

  ResultsTable table;
  const auto lists = eval_lists(scene);
  int condition_idx = 0;
  for (double ym : plan.ym_list) {
    for (double ps : plan.peristalsis_scales) {
      for (const auto& [branch, list] : lists) {
        env::EpisodeConfig ecfg;
        ecfg.max_macro_steps = plan.max_macro_steps;
        ecfg.young_modulus_override = ym;
        ecfg.peristalsis_scale = ps;

        rl::EvalOptions opt;
        opt.episodes = plan.eval_episodes;
        opt.seed = Rng::mix(plan.seeds.front() * 1000003ULL + condition_idx);
        opt.deterministic = true;
        const auto records =
            rl::evaluate(net, norm, ckpt.mode, scene, ecfg, list, opt);

        ResultRow row;
        row.policy = env::to_string(ckpt.mode);
        row.scene = sim::to_string(scene.scene.kind);
        row.ym = ym;
        row.peristalsis_scale = ps;
        row.metrics = env::aggregate_metrics(records);
        row.seed = plan.seeds.front();
        row.branch = branch;
        table.rows.push_back(row);
        ++condition_idx;
      }
    }
  }
  if (!out_csv.empty()) {
    table.write_csv(out_csv);
    std::ofstream(out_csv + ".txt") << table.human_readable();
  }
  return table;
}

ComparisonReport cmd_compare(const std::string& run_candidate,
                             const std::string& run_reference,
                             const std::string& out_dir) {
  const auto curves_a = rl::read_curve_csv(run_candidate + "/curves.csv");
  const auto curves_b = rl::read_curve_csv(run_reference + "/curves.csv");
  if (curves_a.empty() || curves_b.empty()) {
    throw IncompleteRun("cmd_compare: a run has an empty learning curve");
  }

  ComparisonReport rep;
  rep.candidate_convergence = convergence_step(curves_a);
  rep.reference_convergence = convergence_step(curves_b);
  rep.convergence_ratio = static_cast<double>(rep.reference_convergence) /
                          static_cast<double>(rep.candidate_convergence);

  // Post-convergence navigation efficiency and SR deltas from the stored
  // evaluation tables.
  ResultsTable ma, mb;
  bool have_metrics = true;
  try {
    ma = ResultsTable::read_csv(run_candidate + "/metrics.csv");
    mb = ResultsTable::read_csv(run_reference + "/metrics.csv");
  } catch (const IncompleteRun&) {
    have_metrics = false;
  }
  if (have_metrics) {
    double ns_a = 0.0, ns_b = 0.0;
    int ns_n = 0;
    for (const auto& ra : ma.rows) {
      for (const auto& rb : mb.rows) {
        if (ra.ym == rb.ym && ra.peristalsis_scale == rb.peristalsis_scale &&
            ra.branch == rb.branch) {
          char key[96];
          std::snprintf(key, sizeof(key), "ym=%g,ps=%g%s%s", ra.ym,
                        ra.peristalsis_scale, ra.branch.empty() ? "" : ",",
                        ra.branch.c_str());
          rep.sr_deltas.emplace_back(key,
                                     ra.metrics.sr_percent - rb.metrics.sr_percent);
          if (ra.metrics.ns && rb.metrics.ns) {
            ns_a += *ra.metrics.ns;
            ns_b += *rb.metrics.ns;
            ++ns_n;
          }
        }
      }
    }
    if (ns_n > 0 && ns_b > 0.0) rep.ns_ratio = ns_a / ns_b;
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream rep_out(fs::path(out_dir) / "comparison.csv");
    rep_out << "# schema=jacrl.comparison.v1\n";
    rep_out << "metric,value\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "convergence_ratio,%.17g\n", rep.convergence_ratio);
    rep_out << buf;
    std::snprintf(buf, sizeof(buf), "candidate_convergence_steps,%lld\n",
                  static_cast<long long>(rep.candidate_convergence));
    rep_out << buf;
    std::snprintf(buf, sizeof(buf), "reference_convergence_steps,%lld\n",
                  static_cast<long long>(rep.reference_convergence));
    rep_out << buf;
    if (rep.ns_ratio) {
      std::snprintf(buf, sizeof(buf), "ns_ratio,%.17g\n", *rep.ns_ratio);
      rep_out << buf;
    }
    for (const auto& [key, delta] : rep.sr_deltas) {
      rep_out << "sr_delta(" << key << ")," << delta << "\n";
    }

    // Plot-ready merged reward series.
    std::ofstream series(fs::path(out_dir) / "series.csv");
    series << "# schema=jacrl.series.v1\n";
    series << "env_steps,candidate_reward,reference_reward\n";
    const size_t n = std::max(curves_a.size(), curves_b.size());
    for (size_t i = 0; i < n; ++i) {
      const auto* a = i < curves_a.size() ? &curves_a[i] : nullptr;
      const auto* b = i < curves_b.size() ? &curves_b[i] : nullptr;
      series << (a ? a->env_steps : b->env_steps) << ",";
      if (a) series << a->ep_reward_mean;
      series << ",";
      if (b) series << b->ep_reward_mean;
      series << "\n";
    }
  }
  return rep;
}

TransferOutput cmd_transfer(const std::string& checkpoint_base,
                            const ExperimentPlan& vessel_plan,
                            const std::string& out_root, bool force) {
  vessel_plan.validate();
  const sim::SceneConfig scene = load_scene_for(vessel_plan);
  if (scene.scene.kind != sim::SceneKind::Vessel) {
    throw ConfigError("cmd_transfer: plan must reference a vessel scene config");
  }

  TransferOutput out;
  fs::create_directories(out_root);
  out.zero_shot = cmd_eval(checkpoint_base, vessel_plan,
                           (fs::path(out_root) / "zero_shot.csv").string());

  // Fine-tune with the plan budget, fresh optimizer state, reduced LR.
  const rl::Checkpoint ckpt = rl::load_checkpoint(checkpoint_base);
  const fs::path ft_dir = fs::path(out_root) / ("finetune_" + env::to_string(ckpt.mode));
  if (fs::exists(ft_dir)) {
    if (!force) {
      throw ValidationError("cmd_transfer: finetune directory exists: " + ft_dir.string());
    }
    fs::remove_all(ft_dir);
  }
  fs::create_directories(ft_dir);

  ExperimentPlan ft_plan = vessel_plan;
  ft_plan.mode = ckpt.mode;
  rl::TrainConfig cfg = make_train_config(ft_plan, scene, ft_plan.seeds.front(),
                                          ft_dir.string());
  (void)rl::finetune(ckpt, cfg);
  out.finetune_dir = ft_dir.string();

  out.fine_tuned = cmd_eval((ft_dir / "ckpt_final").string(), vessel_plan,
                            (fs::path(out_root) / "fine_tuned.csv").string());
  return out;
}

int cmd_oracle_check() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
  };

  // Closed-form two-link arm at rest.
  {
    const auto arm = oracle::AnalyticFixture::two_link_arm(1.0, 1.0);
    const Eigen::MatrixXd j = arm.jacobian(Eigen::VectorXd::Zero(2));
    check("two-link arm closed form at rest",
          std::abs(j(1, 0) - 2.0) < 1e-12 && std::abs(j(1, 1) - 1.0) < 1e-12 &&
              std::abs(j(0, 0)) < 1e-12);
  }

  // Finite-difference self-validation of both kinematic fixtures.
  {
    Rng rng(2);
    bool ok = true;
    const auto arm = oracle::AnalyticFixture::two_link_arm(1.2, 0.7);
    const auto seg = oracle::AnalyticFixture::constant_curvature(5.0);
    for (int t = 0; t < 10 && ok; ++t) {
      Eigen::VectorXd qa(2);
      qa << rng.uniform(-2, 2), rng.uniform(-2, 2);
      const Eigen::MatrixXd ja = arm.jacobian(qa);
      Eigen::MatrixXd fd(2, 2);
      for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd qp = qa, qm = qa;
        qp[i] += 1e-6;
        qm[i] -= 1e-6;
        fd.col(i) = (arm.tip(qp) - arm.tip(qm)) / 2e-6;
      }
      ok = (ja - fd).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, ja.cwiseAbs().maxCoeff());
      Eigen::VectorXd qs(1);
      qs << rng.uniform(-0.3, 0.3);
      Eigen::VectorXd qp = qs, qm = qs;
      qp[0] += 1e-6;
      qm[0] -= 1e-6;
      const Eigen::MatrixXd js = seg.jacobian(qs);
      const Eigen::Vector2d fds = (seg.tip(qp) - seg.tip(qm)) / 2e-6;
      ok = ok && (js.col(0) - fds).cwiseAbs().maxCoeff() <
                     1e-6 * std::max(1.0, js.cwiseAbs().maxCoeff());
    }
    check("fixture Jacobians agree with finite differences", ok);
  }

  // Ridge reference solver closed forms and estimator agreement.
  {
    Rng rng(3);
    Eigen::MatrixXd O(5, 15);
    for (int i = 0; i < O.size(); ++i) O.data()[i] = rng.normal();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(5, 5);
    bool ok = (oracle::ridge_oracle(eye, O, 0.0) - O).cwiseAbs().maxCoeff() < 1e-12;
    ok = ok && (oracle::ridge_oracle(0.05 * eye, O, 0.01) - 4.0 * O).cwiseAbs().maxCoeff() <
                   1e-12;
    check("ridge reference closed forms", ok);

    jac::ObservationDelta deltas;
    deltas.delta_matrix = O;
    const auto schedule = jac::ProbeSchedule::scaled_identity(0.13);
    const auto est = jac::estimate_jacobian(schedule, deltas, 0.007);
    const Eigen::MatrixXd ref = oracle::ridge_oracle(schedule.probe_matrix, O, 0.007);
    check("estimator agrees with the ridge reference",
          (est.matrix - ref).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Quasi-static solver properties.
  {
    const auto model = sim::RobotModel::with_young_modulus(15000.0);
    const Eigen::Vector3d rest = oracle::quasi_static_oracle(model, {0, 0, 0, 0});
    bool ok = std::abs(rest.x() - model.total_length()) < 1e-9 && std::abs(rest.y()) < 1e-9;
    double prev = 1e18;
    for (double ym : {10000.0, 15000.0, 25000.0}) {
      const auto m = sim::RobotModel::with_young_modulus(ym);
      const double defl = std::abs(oracle::quasi_static_oracle(m, {2, 0, 0, 0}).y());
      ok = ok && defl < prev && defl > 0.0;
      prev = defl;
    }
    check("quasi-static equilibrium rest shape and stiffness monotonicity", ok);
  }

  // Probe-based recovery of an analytic Jacobian.
  {
    const auto arm = oracle::AnalyticFixture::two_link_arm(1.0, 1.0);
    Eigen::VectorXd q0(2);
    q0 << 0.3, 0.8;
    const auto rep = jac::jacobian_vs_analytic(
        arm, q0, jac::ProbeSchedule::scaled_identity(1e-4), 1e-8);
    check("probe estimation recovers the analytic Jacobian", rep.max_rel_error < 1e-3);
  }

  return failures;
}

}  // namespace jacrl::harness
