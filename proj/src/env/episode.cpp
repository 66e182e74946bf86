#include "jacrl/env/episode.hpp"

#include <cmath>

namespace jacrl::env {

double compute_reward(const sim::Observation& obs, const sim::Observation& prev_obs,
                      const Eigen::Vector3d& target, bool success_transition,
                      const RewardParams& p) {
  const double d_curr = (obs.segment<3>(0) - target).norm();
  const double d_prev = (prev_obs.segment<3>(0) - target).norm();
  const double contact = obs.segment<3>(11).norm();
  double r = p.w_progress * (d_prev - d_curr) - p.w_time;
  if (success_transition) r += p.success_bonus;
  r -= p.w_force * std::max(0.0, contact - p.f_safe);
  return r;
}

EnvInstance::EnvInstance(const sim::SceneConfig& cfg, PolicyMode mode,
                         EpisodeConfig episode, TargetList list, uint64_t env_seed)
    : cfg_(cfg),
      mode_(mode),
      episode_(episode),
      list_(std::move(list)),
      rng_(env_seed) {
  episode_.validate();
  model_ = cfg_.robot;
  if (episode_.young_modulus_override) {
    model_.set_young_modulus(*episode_.young_modulus_override);
  }
}

void EnvInstance::begin_episode() {
  ++episode_counter_;
  target_ = sample_target(list_, rng_);

  model_ = cfg_.robot;
  if (ym_range_) {
    model_.set_young_modulus(rng_.uniform(ym_range_->first, ym_range_->second));
  } else if (episode_.young_modulus_override) {
    model_.set_young_modulus(*episode_.young_modulus_override);
  }
  sim_ = std::make_unique<sim::Simulator>(model_, cfg_.scene);
  state_ = sim_->reset(rng_.next_u64(), episode_.peristalsis_scale);

  prev_action_ = sim::ActionVector{};
  last_obs_ = sim_->observe(state_, prev_action_);
  prev_tip_ = sim_->tip_position(state_);

  record_ = EpisodeRecord{};
  record_.target = target_;
  audit_.clear();
  cached_state_.reset();
  done_ = false;
  steps_ = 0;
}

Eigen::VectorXd EnvInstance::policy_observation(const sim::Observation& absolute) const {
  Eigen::VectorXd o = absolute;
  // The policy sees the tip in target-relative coordinates; the pinned
  // 15-dim observation has no separate target slot.
  o.segment<3>(0) = absolute.segment<3>(0) - target_;
  return o;
}

Eigen::VectorXd EnvInstance::policy_state() {
  if (done_) throw ValidationError("EnvInstance: episode is over");
  if (cached_state_) return *cached_state_;
  const sim::Observation obs = sim_->observe(state_, prev_action_);
  Eigen::VectorXd rel = policy_observation(obs);

  if (mode_ == PolicyMode::Baseline) {
    pending_policy_obs_ = rel;
    cached_state_ = rel;
    return rel;
  }

  // Phase 1: probe, estimate, augment.
  const auto schedule = jac::ProbeSchedule::scaled_identity(0.05);
  const auto explored = jac::explore_simulator(*sim_, state_, schedule);
  state_ = explored.state;
  record_.probe_path += explored.tip_path;
  const jac::JacobianEstimate est =
      jac::estimate_jacobian(schedule, explored.deltas, 0.01);
  audit_.push_back({steps_, est.condition_number, est.matrix.norm(),
                    explored.restore_residual});

  pending_policy_obs_ = rel;
  Eigen::Matrix<double, 15, 1> rel_fixed = rel;
  cached_state_ = Eigen::VectorXd(jac::augment(rel_fixed, est));
  return *cached_state_;
}

EnvInstance::StepResult EnvInstance::step(const sim::ActionVector& action) {
  if (done_) throw ValidationError("EnvInstance: episode is over");
  cached_state_.reset();
  StepResult out;
  try {
    state_ = sim_->step(state_, action);
  } catch (const NumericalBlowup&) {
    record_.blowup = true;
    record_.success = false;
    done_ = true;
    throw;
  }
  prev_action_ = action;
  ++steps_;

  const sim::Observation obs = sim_->observe(state_, action);
  const double d_curr = (obs.segment<3>(0) - target_).norm();
  const bool success = d_curr < episode_.success_radius;
  const bool timeout = steps_ >= episode_.max_macro_steps;

  out.success = success;
  out.done = success || timeout;
  out.reward = compute_reward(obs, last_obs_, target_, success, RewardParams{});

  const Eigen::Vector3d tip = sim_->tip_position(state_);
  record_.trajectory_length += (tip - prev_tip_).norm();
  prev_tip_ = tip;
  record_.reward_sum += out.reward;
  record_.per_step_log.push_back(
      {pending_policy_obs_, Eigen::Matrix<double, 5, 1>(action.values().data()),
       out.reward});
  // Log the post-step policy-frame observation as the closing entry when the
  // episode ends, so final distances are recomputable from the log alone.
  last_obs_ = obs;

  if (out.done) {
    done_ = true;
    record_.success = success;
    record_.final_error = d_curr;
    record_.nav_steps = steps_;
    record_.per_step_log.push_back(
        {policy_observation(obs), Eigen::Matrix<double, 5, 1>::Zero(), 0.0});
  }
  return out;
}

EpisodeRecord EnvInstance::take_record() {
  done_ = true;
  return std::move(record_);
}

EpisodeRecord run_episode(EnvInstance& env, const PolicyFn& policy) {
  env.begin_episode();
  try {
    while (!env.episode_over()) {
      const Eigen::VectorXd state = env.policy_state();
      const std::array<double, 5> a = policy(state);
      env.step(sim::ActionVector(a));
    }
  } catch (const NumericalBlowup&) {
    env.take_record();
    throw;
  }
  return env.take_record();
}

}  // namespace jacrl::env
