#include "jacrl/rl/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace jacrl::rl {

namespace {

constexpr const char* kCurveSchema = "# schema=jacrl.curves.v1";

// Shared training loop: the two policy modes differ only in the input width
// and in EnvInstance's state construction hook.
TrainingRun train_loop(const TrainConfig& cfg, PolicyValueNet net,
                       RunningNormalizer norm, double lr) {
  cfg.validate();
  const int in_dim = cfg.input_dim();
  if (net.input_dim() != in_dim) {
    throw CheckpointMismatch("train: network width does not match mode");
  }

  Rng master(cfg.seed);
  Rng policy_rng = master.spawn(1);
  Rng update_rng = master.spawn(2);

  const env::TargetList list = cfg.explicit_targets
                                   ? *cfg.explicit_targets
                                   : env::make_target_list(cfg.scene, cfg.target_list);
  std::vector<std::unique_ptr<env::EnvInstance>> envs;
  for (int e = 0; e < cfg.n_envs; ++e) {
    envs.push_back(std::make_unique<env::EnvInstance>(
        cfg.scene, cfg.mode, cfg.episode, list, master.spawn(100 + e).next_u64()));
    if (cfg.ym_randomization) {
      envs.back()->set_ym_randomization(cfg.ym_randomization->first,
                                        cfg.ym_randomization->second);
    }
    envs.back()->begin_episode();
  }

  Adam opt(net.param_count(), lr);
  KLController kl;

  TrainingRun run;
  run.mode = cfg.mode;

  const bool persist = !cfg.out_dir.empty();
  std::string curve_path;
  if (persist) {
    std::filesystem::create_directories(cfg.out_dir);
    curve_path = cfg.out_dir + "/curves.csv";
    std::ofstream(curve_path) << kCurveSchema
                              << "\nenv_steps,ep_reward_mean,ep_len_mean,kl,entropy,beta\n";
  }

  const int steps_per_env = cfg.rollout_len / cfg.n_envs;
  double carry_reward = 0.0, carry_len = 0.0;

  int64_t env_steps = 0;
  int iteration = 0;
  while (env_steps < cfg.total_steps) {
    RolloutBatch batch;
    batch.states.resize(cfg.rollout_len, in_dim);
    batch.actions.resize(cfg.rollout_len, kActionDim);
    batch.log_probs.resize(cfg.rollout_len);
    batch.rewards.resize(cfg.rollout_len);
    batch.values.resize(cfg.rollout_len);
    batch.dones.assign(cfg.rollout_len, 0);
    batch.old_means.resize(cfg.rollout_len, kActionDim);
    batch.bootstrap = Eigen::VectorXd::Zero(cfg.rollout_len);
    batch.old_log_std = net.log_std();

    double ep_reward_acc = 0.0, ep_len_acc = 0.0;
    int ep_count = 0;

    Eigen::MatrixXd obs_block(cfg.n_envs, in_dim);
    const auto log_std = net.log_std();
    Eigen::Matrix<double, kActionDim, 1> sd;
    for (int j = 0; j < kActionDim; ++j) sd[j] = std::exp(log_std[j]);

    for (int t = 0; t < steps_per_env; ++t) {
      for (int e = 0; e < cfg.n_envs; ++e) {
        const Eigen::VectorXd raw = envs[e]->policy_state();
        norm.update(raw);
        obs_block.row(e) = norm.normalize(raw).transpose();
      }
      const auto fwd = net.forward(obs_block);

      for (int e = 0; e < cfg.n_envs; ++e) {
        const int idx = t * cfg.n_envs + e;
        Eigen::RowVectorXd a(kActionDim);
        std::array<double, kActionDim> clamped;
        for (int j = 0; j < kActionDim; ++j) {
          a[j] = fwd.mean(e, j) + sd[j] * policy_rng.normal();
          clamped[j] = std::clamp(a[j], -kActionBound, kActionBound);
        }
        batch.states.row(idx) = obs_block.row(e);
        batch.actions.row(idx) = a;
        batch.log_probs[idx] = GaussianPolicy::log_prob(a, fwd.mean.row(e), log_std);
        batch.values[idx] = fwd.value[e];
        batch.old_means.row(idx) = fwd.mean.row(e);

        const auto res = envs[e]->step(sim::ActionVector(clamped));
        batch.rewards[idx] = res.reward;
        batch.dones[idx] = res.done ? 1 : 0;
        if (res.done) {
          const auto& rec = envs[e]->record();
          ep_reward_acc += rec.reward_sum;
          ep_len_acc += rec.nav_steps;
          ++ep_count;
          envs[e]->begin_episode();
        }
      }
    }

    // Bootstrap values for rollouts truncated mid-episode.
    {
      Eigen::MatrixXd tail(cfg.n_envs, in_dim);
      for (int e = 0; e < cfg.n_envs; ++e) {
        const Eigen::VectorXd raw = envs[e]->policy_state();  // cached until step()
        tail.row(e) = norm.normalize(raw).transpose();
      }
      const auto fwd = net.forward(tail);
      for (int e = 0; e < cfg.n_envs; ++e) {
        const int idx = (steps_per_env - 1) * cfg.n_envs + e;
        batch.bootstrap[idx] = fwd.value[e];
      }
    }

    compute_gae(batch, cfg.n_envs, cfg.gamma, cfg.gae_lambda);
    const UpdateStats stats = ppo_update(net, opt, batch, kl, cfg.ppo, update_rng);

    env_steps += cfg.rollout_len;
    ++iteration;
    if (ep_count > 0) {
      carry_reward = ep_reward_acc / ep_count;
      carry_len = ep_len_acc / ep_count;
    }
    CurvePoint point{env_steps, carry_reward, carry_len,
                     stats.approx_kl, stats.entropy, stats.beta};
    run.curve.push_back(point);
    if (persist) {
      append_curve_csv(curve_path, point, false);
      if (cfg.checkpoint_every > 0 && iteration % cfg.checkpoint_every == 0) {
        save_checkpoint(cfg.out_dir + "/ckpt_" + std::to_string(iteration), net, norm,
                        cfg.mode, config_hash_hex(cfg.scene.raw_json));
      }
    }
  }

  run.env_steps = env_steps;
  run.net = std::make_shared<PolicyValueNet>(std::move(net));
  run.normalizer = std::make_shared<RunningNormalizer>(std::move(norm));
  if (persist) {
    run.checkpoint_base = cfg.out_dir + "/ckpt_final";
    save_checkpoint(run.checkpoint_base, *run.net, *run.normalizer, cfg.mode,
                    config_hash_hex(cfg.scene.raw_json));
  }
  return run;
}

}  // namespace

TrainingRun train(const TrainConfig& cfg) {
  cfg.validate();
  PolicyValueNet net(cfg.input_dim(), cfg.hidden, Rng::mix(cfg.seed));
  RunningNormalizer norm(cfg.input_dim());
  return train_loop(cfg, std::move(net), std::move(norm), cfg.lr);
}

TrainingRun finetune(const Checkpoint& ckpt, const TrainConfig& cfg) {
  cfg.validate();
  if (ckpt.input_dim != cfg.input_dim() || ckpt.mode != cfg.mode) {
    throw CheckpointMismatch("finetune: checkpoint mode/input_dim mismatch");
  }
  auto [net, norm] = instantiate(ckpt);
  return train_loop(cfg, std::move(net), std::move(norm), cfg.lr * 0.3);
}

std::vector<env::EpisodeRecord> evaluate(const PolicyValueNet& net,
                                         const RunningNormalizer& norm,
                                         env::PolicyMode mode,
                                         const sim::SceneConfig& scene,
                                         const env::EpisodeConfig& episode,
                                         const env::TargetList& list,
                                         const EvalOptions& opt) {
  if (opt.episodes <= 0) throw ValidationError("evaluate: episodes must be > 0");
  RunningNormalizer frozen = norm;
  frozen.freeze(true);
  Rng sample_rng(Rng::mix(opt.seed ^ 0xe7a1ULL));

  env::EnvInstance env(scene, mode, episode, list, opt.seed);
  std::vector<env::EpisodeRecord> records;
  records.reserve(opt.episodes);

  const auto log_std = net.log_std();
  Eigen::Matrix<double, kActionDim, 1> sd;
  for (int j = 0; j < kActionDim; ++j) sd[j] = std::exp(log_std[j]);

  env::PolicyFn policy = [&](const Eigen::VectorXd& raw) {
    Eigen::MatrixXd x(1, net.input_dim());
    x.row(0) = frozen.normalize(raw).transpose();
    const auto fwd = net.forward(x);
    std::array<double, kActionDim> a;
    for (int j = 0; j < kActionDim; ++j) {
      double v = fwd.mean(0, j);
      if (!opt.deterministic) v += sd[j] * sample_rng.normal();
      a[j] = std::clamp(v, -kActionBound, kActionBound);
    }
    return a;
  };

  std::vector<env::ProbeAudit> all_audit;
  for (int i = 0; i < opt.episodes; ++i) {
    records.push_back(env::run_episode(env, policy));
    if (!opt.episode_log_path.empty()) {
      env::append_episode_jsonl(opt.episode_log_path, records.back(), mode,
                                sim::to_string(scene.scene.kind), opt.seed);
    }
    if (!opt.probe_audit_path.empty() && mode == env::PolicyMode::JacobianAugmented) {
      for (auto a : env.probe_audit()) {
        a.step += i * episode.max_macro_steps;
        all_audit.push_back(a);
      }
    }
  }
  if (!opt.probe_audit_path.empty() && !all_audit.empty()) {
    env::write_probe_audit_csv(opt.probe_audit_path, all_audit);
  }
  return records;
}

void append_curve_csv(const std::string& path, const CurvePoint& p, bool header) {
  std::ofstream out(path, header ? std::ios::trunc : std::ios::app);
  if (!out) throw ValidationError("append_curve_csv: cannot open " + path);
  if (header) {
    out << kCurveSchema << "\nenv_steps,ep_reward_mean,ep_len_mean,kl,entropy,beta\n";
  }
  char buf[240];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                static_cast<long long>(p.env_steps), p.ep_reward_mean, p.ep_len_mean,
                p.kl, p.entropy, p.beta);
  out << buf;
}

std::vector<CurvePoint> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IncompleteRun("read_curve_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCurveSchema) {
    throw ValidationError("read_curve_csv: schema mismatch in " + path);
  }
  std::getline(in, line);  // column header
  std::vector<CurvePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CurvePoint p;
    long long steps;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf,%lf,%lf,%lf", &steps, &p.ep_reward_mean,
                    &p.ep_len_mean, &p.kl, &p.entropy, &p.beta) != 6) {
      throw ValidationError("read_curve_csv: bad row in " + path);
    }
    p.env_steps = steps;
    out.push_back(p);
  }
  return out;
}

}  // namespace jacrl::rl
