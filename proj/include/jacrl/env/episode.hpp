#ifndef JACRL_ENV_EPISODE_HPP_
#define JACRL_ENV_EPISODE_HPP_

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "jacrl/env/targets.hpp"
#include "jacrl/jac/probe.hpp"
#include "jacrl/sim/scene_config.hpp"
#include "jacrl/sim/simulator.hpp"

namespace jacrl::env {

enum class PolicyMode { Baseline, JacobianAugmented };

inline std::string to_string(PolicyMode m) {
  return m == PolicyMode::Baseline ? "baseline" : "jacaug";
}

struct EpisodeConfig {
  int max_macro_steps = 100;
  double success_radius = 3.0;  // [mm]
  std::optional<double> young_modulus_override;
  double peristalsis_scale = 1.0;

  void validate() const {
    if (max_macro_steps < 10) throw ValidationError("EpisodeConfig: max_macro_steps >= 10");
    if (success_radius <= 0.0) throw ValidationError("EpisodeConfig: success_radius > 0");
    if (peristalsis_scale < 0.0) throw ValidationError("EpisodeConfig: peristalsis_scale >= 0");
  }
};

struct RewardParams {
  double w_progress = 1.0;   // per mm of approach
  double w_time = 0.05;      // per macro-step
  double success_bonus = 10.0;
  double w_force = 0.01;     // per N above the safe contact level
  double f_safe = 3.0;       // 2 * wall_stiffness * (success_radius / 10)
};

// Shaped reward: progress toward the target, a step penalty, a terminal
// bonus, and a penalty on contact force above the safe threshold.
// Observations here are simulator-frame (absolute tip position).
double compute_reward(const sim::Observation& obs, const sim::Observation& prev_obs,
                      const Eigen::Vector3d& target, bool success_transition,
                      const RewardParams& params);

struct StepLog {
  Eigen::VectorXd observation;  // policy-frame 15-dim observation
  Eigen::Matrix<double, 5, 1> action;
  double reward = 0.0;
};

struct EpisodeRecord {
  bool success = false;
  double final_error = 0.0;       // [mm]
  int nav_steps = 0;
  double trajectory_length = 0.0;  // macro-step tip path [mm]
  double reward_sum = 0.0;
  std::vector<StepLog> per_step_log;

  double probe_path = 0.0;  // tip path during exploration micro-motions [mm]
  bool blowup = false;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
};

// Per-step probe diagnostics (optional audit CSV is written from these).
struct ProbeAudit {
  int step = 0;
  double condition_number = 0.0;
  double jacobian_norm = 0.0;
  double restore_residual = 0.0;
};

// One episode runtime: owns a simulator instance, the sampled target, and
// the policy-facing state construction for either mode. Instances are
// independent and single-threaded.
class EnvInstance {
 public:
  EnvInstance(const sim::SceneConfig& cfg, PolicyMode mode, EpisodeConfig episode,
              TargetList list, uint64_t env_seed);

  // Starts a fresh episode: draws a target (and a per-episode modulus when
  // randomization is enabled), resets the simulator.
  void begin_episode();

  void set_ym_randomization(double lo, double hi) { ym_range_ = {lo, hi}; }

  int state_dim() const { return mode_ == PolicyMode::Baseline ? 15 : 90; }

  // Policy-facing raw state for the current step. In JacobianAugmented mode
  // this runs the exploration phase (mutating the simulator state) and
  // augments the observation with the ridge estimate. Cached until the next
  // step() so rollout-boundary bootstrap reads never probe twice.
  Eigen::VectorXd policy_state();

  struct StepResult {
    double reward = 0.0;
    bool done = false;
    bool success = false;
  };
  StepResult step(const sim::ActionVector& action);

  bool episode_over() const { return done_; }
  const EpisodeRecord& record() const { return record_; }
  EpisodeRecord take_record();
  const std::vector<ProbeAudit>& probe_audit() const { return audit_; }
  const Eigen::Vector3d& target() const { return target_; }
  int steps_taken() const { return steps_; }
  double current_young_modulus() const { return model_.young_modulus; }
  const sim::Simulator& simulator() const { return *sim_; }

 private:
  Eigen::VectorXd policy_observation(const sim::Observation& absolute) const;

  sim::SceneConfig cfg_;
  PolicyMode mode_;
  EpisodeConfig episode_;
  TargetList list_;
  Rng rng_;
  std::optional<std::pair<double, double>> ym_range_;

  sim::RobotModel model_;
  std::unique_ptr<sim::Simulator> sim_;
  sim::SimState state_;
  sim::Observation last_obs_;  // absolute frame, for reward deltas
  sim::ActionVector prev_action_;
  Eigen::Vector3d target_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d prev_tip_ = Eigen::Vector3d::Zero();

  EpisodeRecord record_;
  std::vector<ProbeAudit> audit_;
  Eigen::VectorXd pending_policy_obs_;  // logged with the next action
  std::optional<Eigen::VectorXd> cached_state_;
  bool done_ = true;
  int steps_ = 0;
  uint64_t episode_counter_ = 0;
};

// Scripted or learned controller: maps the policy-facing raw state to an
// action in [-0.4, 0.4]^5.
using PolicyFn = std::function<std::array<double, 5>(const Eigen::VectorXd&)>;

// Runs one full episode; propagates NumericalBlowup after marking the
// record failed.
EpisodeRecord run_episode(EnvInstance& env, const PolicyFn& policy);

}  // namespace jacrl::env

#endif  // JACRL_ENV_EPISODE_HPP_
