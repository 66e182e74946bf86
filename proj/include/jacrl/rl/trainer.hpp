#ifndef JACRL_RL_TRAINER_HPP_
#define JACRL_RL_TRAINER_HPP_

#include <memory>
#include <optional>
#include <string>

#include "jacrl/env/episode.hpp"
#include "jacrl/env/metrics.hpp"
#include "jacrl/rl/checkpoint.hpp"
#include "jacrl/rl/ppo.hpp"

namespace jacrl::rl {

struct TrainConfig {
  env::PolicyMode mode = env::PolicyMode::Baseline;
  sim::SceneConfig scene;
  env::EpisodeConfig episode;
  env::TargetListId target_list = env::TargetListId::A;
  std::optional<env::TargetList> explicit_targets;  // overrides target_list
  std::optional<std::pair<double, double>> ym_randomization;

  uint64_t seed = 1;
  int64_t total_steps = 100000;
  int rollout_len = 2048;
  int n_envs = 8;

  double lr = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  PpoParams ppo;
  std::vector<int> hidden = {256, 128, 64, 32};

  std::string out_dir;       // empty: keep everything in memory
  int checkpoint_every = 0;  // rollout iterations between checkpoints, 0 = final only

  int input_dim() const { return mode == env::PolicyMode::Baseline ? 15 : 90; }

  void validate() const {
    episode.validate();
    if (total_steps < 0) throw ValidationError("TrainConfig: total_steps >= 0");
    if (rollout_len <= 0 || n_envs <= 0 || rollout_len % n_envs != 0) {
      throw ValidationError("TrainConfig: rollout_len must be a multiple of n_envs");
    }
    if (hidden != std::vector<int>{256, 128, 64, 32}) {
      throw ValidationError("TrainConfig: hidden layers are fixed at 256,128,64,32");
    }
  }
};

struct CurvePoint {
  int64_t env_steps = 0;
  double ep_reward_mean = 0.0;
  double ep_len_mean = 0.0;
  double kl = 0.0;
  double entropy = 0.0;
  double beta = 0.0;
};

struct TrainingRun {
  std::vector<CurvePoint> curve;
  std::shared_ptr<PolicyValueNet> net;
  std::shared_ptr<RunningNormalizer> normalizer;
  env::PolicyMode mode = env::PolicyMode::Baseline;
  int64_t env_steps = 0;
  std::string checkpoint_base;  // when persisted
};

TrainingRun train(const TrainConfig& cfg);

// Resumes a checkpoint in a new scene with a fresh optimizer at 0.3x the
// configured learning rate. Throws CheckpointMismatch when the checkpoint's
// input width does not fit the requested mode.
TrainingRun finetune(const Checkpoint& ckpt, const TrainConfig& cfg);

struct EvalOptions {
  int episodes = 100;
  uint64_t seed = 9000;
  bool deterministic = true;
  std::string episode_log_path;  // optional JSONL sink
  std::string probe_audit_path;  // optional per-step probe CSV (jacaug only)
};

std::vector<env::EpisodeRecord> evaluate(const PolicyValueNet& net,
                                         const RunningNormalizer& norm,
                                         env::PolicyMode mode,
                                         const sim::SceneConfig& scene,
                                         const env::EpisodeConfig& episode,
                                         const env::TargetList& list,
                                         const EvalOptions& opt);

void append_curve_csv(const std::string& path, const CurvePoint& p, bool header);
std::vector<CurvePoint> read_curve_csv(const std::string& path);

}  // namespace jacrl::rl

#endif  // JACRL_RL_TRAINER_HPP_
