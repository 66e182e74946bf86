#ifndef JACRL_RL_PPO_HPP_
#define JACRL_RL_PPO_HPP_

#include <Eigen/Dense>

#include "jacrl/rl/net.hpp"

namespace jacrl::rl {

// Diagonal-Gaussian head helpers. Actions are sampled unbounded, the copy
// sent to the environment is clamped to [-0.4, 0.4]^5; log-probabilities and
// ratios always refer to the unclamped sample.
struct GaussianPolicy {
  static double log_prob(const Eigen::RowVectorXd& action, const Eigen::RowVectorXd& mean,
                         const Eigen::Matrix<double, kActionDim, 1>& log_std);
  static double entropy(const Eigen::Matrix<double, kActionDim, 1>& log_std);
  // Entropy at the log-std clamp ceiling / floor, used by the adaptive
  // KL threshold.
  static double max_entropy();
  static double min_entropy();
  // KL(old || new) for one sample.
  static double kl(const Eigen::RowVectorXd& mean_old,
                   const Eigen::Matrix<double, kActionDim, 1>& log_std_old,
                   const Eigen::RowVectorXd& mean_new,
                   const Eigen::Matrix<double, kActionDim, 1>& log_std_new);
};

// One on-policy rollout. All rows come from the same policy version.
struct RolloutBatch {
  Eigen::MatrixXd states;      // N x input_dim (normalized)
  Eigen::MatrixXd actions;     // N x 5, unclamped samples
  Eigen::VectorXd log_probs;   // N
  Eigen::VectorXd rewards;     // N
  Eigen::VectorXd values;      // N
  std::vector<uint8_t> dones;  // N, episode ended after this transition
  Eigen::MatrixXd old_means;   // N x 5
  Eigen::Matrix<double, kActionDim, 1> old_log_std;
  Eigen::VectorXd bootstrap;   // N, value of the successor state (0 if done)

  Eigen::VectorXd advantages;  // filled by compute_gae
  Eigen::VectorXd returns;     // advantages + values (pre-standardization)

  int size() const { return static_cast<int>(rewards.size()); }
};

// Generalized advantage estimation over a rollout laid out as n_envs
// interleaved streams: row index = step * n_envs + env.
void compute_gae(RolloutBatch& batch, int n_envs, double gamma, double lam);

// Adaptive KL penalty controller. The target threshold itself adapts with
// policy entropy: higher entropy allows larger steps.
struct KLController {
  double target_kl = 0.01;
  double beta = 1.0;
  double adapt_factor = 1.5;
  double entropy_floor = GaussianPolicy::min_entropy();

  double adapted_delta(double entropy) const {
    const double h_norm = std::max(entropy, entropy_floor) / GaussianPolicy::max_entropy();
    return std::clamp(target_kl * (1.0 + h_norm), 0.005, 0.05);
  }

  // beta *= f if kl > 1.5 delta, beta /= f if kl < delta / 1.5.
  void adapt(double measured_kl, double delta) {
    if (measured_kl > 1.5 * delta) {
      beta *= adapt_factor;
    } else if (measured_kl < delta / 1.5) {
      beta /= adapt_factor;
    }
    beta = std::clamp(beta, 1e-4, 1e4);
  }
};

// Single-state policy query. Samples from the Gaussian head (or returns the
// mean when rng is null) and clamps the emitted action into bounds; the
// log-probability refers to the unclamped sample.
struct ActResult {
  std::array<double, kActionDim> action;
  Eigen::Matrix<double, kActionDim, 1> raw_sample;
  double log_prob = 0.0;
  double value = 0.0;
};
ActResult act(const PolicyValueNet& net, const Eigen::VectorXd& state, Rng* rng);

struct PpoParams {
  int epochs = 10;
  int minibatch = 64;
  double clip = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 1e-3;
  double max_grad_norm = 0.5;
};

struct UpdateStats {
  double pg_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  int epochs_run = 0;
};

// Loss and gradient on one minibatch: clipped surrogate + beta-weighted KL
// penalty + value loss - entropy bonus. Pure function of (net params, rows),
// which is what the finite-difference gradient check exercises.
double ppo_loss_and_grad(const PolicyValueNet& net, const RolloutBatch& batch,
                         const std::vector<int>& rows, double beta,
                         const PpoParams& params, Eigen::VectorXd& grad);

// Runs the epoch/minibatch loop with early stopping at KL > 2 delta, then
// adapts beta. Restores the pre-update parameters on non-finite loss.
UpdateStats ppo_update(PolicyValueNet& net, Adam& opt, const RolloutBatch& batch,
                       KLController& kl, const PpoParams& params, Rng& rng);

}  // namespace jacrl::rl

#endif  // JACRL_RL_PPO_HPP_
