#include "jacrl/rl/ppo.hpp"

#include <cmath>
#include <numeric>

namespace jacrl::rl {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
}

double GaussianPolicy::log_prob(const Eigen::RowVectorXd& action,
                                const Eigen::RowVectorXd& mean,
                                const Eigen::Matrix<double, kActionDim, 1>& log_std) {
  double lp = -0.5 * kActionDim * kLog2Pi;
  for (int j = 0; j < kActionDim; ++j) {
    const double sd = std::exp(log_std[j]);
    const double z = (action[j] - mean[j]) / sd;
    lp += -0.5 * z * z - log_std[j];
  }
  return lp;
}

double GaussianPolicy::entropy(const Eigen::Matrix<double, kActionDim, 1>& log_std) {
  double h = 0.5 * kActionDim * (kLog2Pi + 1.0);
  for (int j = 0; j < kActionDim; ++j) h += log_std[j];
  return h;
}

double GaussianPolicy::max_entropy() {
  Eigen::Matrix<double, kActionDim, 1> top;
  top.setConstant(kLogStdMax);
  return entropy(top);
}

double GaussianPolicy::min_entropy() {
  Eigen::Matrix<double, kActionDim, 1> bottom;
  bottom.setConstant(kLogStdMin);
  return entropy(bottom);
}

double GaussianPolicy::kl(const Eigen::RowVectorXd& mean_old,
                          const Eigen::Matrix<double, kActionDim, 1>& log_std_old,
                          const Eigen::RowVectorXd& mean_new,
                          const Eigen::Matrix<double, kActionDim, 1>& log_std_new) {
  double kl = 0.0;
  for (int j = 0; j < kActionDim; ++j) {
    const double vo = std::exp(2.0 * log_std_old[j]);
    const double vn = std::exp(2.0 * log_std_new[j]);
    const double dm = mean_old[j] - mean_new[j];
    kl += (log_std_new[j] - log_std_old[j]) + (vo + dm * dm) / (2.0 * vn) - 0.5;
  }
  return kl;
}

void compute_gae(RolloutBatch& batch, int n_envs, double gamma, double lam) {
  const int n = batch.size();
  if (n % n_envs != 0) throw ShapeMismatch("compute_gae: batch not divisible by n_envs");
  const int steps = n / n_envs;
  batch.advantages = Eigen::VectorXd::Zero(n);
  batch.returns = Eigen::VectorXd::Zero(n);

  for (int e = 0; e < n_envs; ++e) {
    double gae = 0.0;
    for (int t = steps - 1; t >= 0; --t) {
      const int idx = t * n_envs + e;
      const bool done = batch.dones[idx] != 0;
      const double next_v = done ? 0.0
                            : (t == steps - 1 ? batch.bootstrap[idx]
                                              : batch.values[(t + 1) * n_envs + e]);
      const double nonterminal = done ? 0.0 : 1.0;
      const double delta = batch.rewards[idx] + gamma * next_v - batch.values[idx];
      gae = delta + gamma * lam * nonterminal * gae;
      batch.advantages[idx] = gae;
    }
  }
  batch.returns = batch.advantages + batch.values;
}

double ppo_loss_and_grad(const PolicyValueNet& net, const RolloutBatch& batch,
                         const std::vector<int>& rows, double beta,
                         const PpoParams& params, Eigen::VectorXd& grad) {
  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd x(m, net.input_dim());
  for (int i = 0; i < m; ++i) x.row(i) = batch.states.row(rows[i]);

  const auto f = net.forward(x);
  const auto s = net.log_std();
  Eigen::Matrix<double, kActionDim, 1> sd, inv_var;
  for (int j = 0; j < kActionDim; ++j) {
    sd[j] = std::exp(s[j]);
    inv_var[j] = 1.0 / (sd[j] * sd[j]);
  }

  Eigen::MatrixXd d_mean = Eigen::MatrixXd::Zero(m, kActionDim);
  Eigen::VectorXd d_value = Eigen::VectorXd::Zero(m);
  Eigen::Matrix<double, kActionDim, 1> d_logstd;
  d_logstd.setZero();

  double pg_loss = 0.0, kl_sum = 0.0, v_loss = 0.0;
  const double inv_m = 1.0 / m;

  for (int i = 0; i < m; ++i) {
    const int r_idx = rows[i];
    // New log-probability and z-scores.
    double logp = -0.5 * kActionDim * kLog2Pi;
    Eigen::Matrix<double, kActionDim, 1> z;
    for (int j = 0; j < kActionDim; ++j) {
      z[j] = (batch.actions(r_idx, j) - f.mean(i, j)) / sd[j];
      logp += -0.5 * z[j] * z[j] - s[j];
    }
    const double ratio = std::exp(logp - batch.log_probs[r_idx]);
    const double adv = batch.advantages[r_idx];

    const double unclipped = -ratio * adv;
    const double clipped =
        -std::clamp(ratio, 1.0 - params.clip, 1.0 + params.clip) * adv;
    pg_loss += std::max(unclipped, clipped) * inv_m;

    // Gradient flows only through the unclipped branch when it is active.
    double g_logp = 0.0;
    if (unclipped >= clipped) g_logp = -adv * ratio * inv_m;

    // beta-weighted KL(old || new) penalty.
    double kl_i = 0.0;
    for (int j = 0; j < kActionDim; ++j) {
      const double vo = std::exp(2.0 * batch.old_log_std[j]);
      const double dm = batch.old_means(r_idx, j) - f.mean(i, j);
      kl_i += (s[j] - batch.old_log_std[j]) + (vo + dm * dm) * 0.5 * inv_var[j] - 0.5;
      d_mean(i, j) += beta * inv_m * (f.mean(i, j) - batch.old_means(r_idx, j)) * inv_var[j];
      d_logstd[j] += beta * inv_m * (1.0 - (vo + dm * dm) * inv_var[j]);
    }
    kl_sum += kl_i;

    for (int j = 0; j < kActionDim; ++j) {
      d_mean(i, j) += g_logp * z[j] / sd[j];
      d_logstd[j] += g_logp * (z[j] * z[j] - 1.0);
    }

    const double verr = f.value[i] - batch.returns[r_idx];
    v_loss += 0.5 * verr * verr * inv_m;
    d_value[i] = params.vf_coef * verr * inv_m;
  }

  const double entropy = GaussianPolicy::entropy(s);
  for (int j = 0; j < kActionDim; ++j) d_logstd[j] -= params.ent_coef;

  net.backward(f, d_mean, d_value, d_logstd, grad);
  return pg_loss + beta * kl_sum * inv_m + params.vf_coef * v_loss -
         params.ent_coef * entropy;
}

ActResult act(const PolicyValueNet& net, const Eigen::VectorXd& state, Rng* rng) {
  if (state.size() != net.input_dim()) {
    throw ShapeMismatch("act: state width does not match the policy input");
  }
  Eigen::MatrixXd x(1, net.input_dim());
  x.row(0) = state.transpose();
  const auto fwd = net.forward(x);
  const auto log_std = net.log_std();

  ActResult out;
  Eigen::RowVectorXd sample(kActionDim);
  for (int j = 0; j < kActionDim; ++j) {
    double v = fwd.mean(0, j);
    if (rng != nullptr) v += std::exp(log_std[j]) * rng->normal();
    sample[j] = v;
    out.raw_sample[j] = v;
    out.action[j] = std::clamp(v, -kActionBound, kActionBound);
  }
  out.log_prob = GaussianPolicy::log_prob(sample, fwd.mean.row(0), log_std);
  out.value = fwd.value[0];
  return out;
}

namespace {

// Full-batch KL(old || new) and entropy of the current policy.
std::pair<double, double> measure_kl(const PolicyValueNet& net, const RolloutBatch& batch) {
  const auto f = net.forward(batch.states);
  const auto s = net.log_std();
  double kl = 0.0;
  for (int i = 0; i < batch.size(); ++i) {
    kl += GaussianPolicy::kl(batch.old_means.row(i), batch.old_log_std, f.mean.row(i), s);
  }
  return {kl / batch.size(), GaussianPolicy::entropy(s)};
}

}  // namespace

UpdateStats ppo_update(PolicyValueNet& net, Adam& opt, const RolloutBatch& batch,
                       KLController& kl, const PpoParams& params, Rng& rng) {
  RolloutBatch b = batch;
  // Advantage standardization over the whole batch, before the epoch loop.
  const double mean = b.advantages.mean();
  const double sd = std::sqrt((b.advantages.array() - mean).square().mean());
  b.advantages = (b.advantages.array() - mean) / (sd + 1e-8);

  const Eigen::VectorXd snapshot = net.params();
  Eigen::VectorXd grad(net.param_count());

  UpdateStats stats;
  std::vector<int> order(b.size());
  std::iota(order.begin(), order.end(), 0);

  double measured_kl = 0.0;
  double delta = kl.adapted_delta(GaussianPolicy::entropy(net.log_std()));

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    // Fisher-Yates with the run's own stream keeps updates reproducible.
    for (int i = b.size() - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<int>(rng.uniform_index(i + 1))]);
    }
    for (int start = 0; start < b.size(); start += params.minibatch) {
      const int end = std::min<int>(start + params.minibatch, b.size());
      std::vector<int> rows(order.begin() + start, order.begin() + end);
      grad.setZero();
      const double loss = ppo_loss_and_grad(net, b, rows, kl.beta, params, grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        net.params() = snapshot;
        throw NonFiniteLoss("ppo_update: non-finite loss, weights restored");
      }
      const double gnorm = grad.norm();
      if (gnorm > params.max_grad_norm) grad *= params.max_grad_norm / gnorm;
      opt.step(net.params(), grad);
    }
    stats.epochs_run = epoch + 1;
    const auto [kl_now, entropy_now] = measure_kl(net, b);
    measured_kl = kl_now;
    stats.entropy = entropy_now;
    delta = kl.adapted_delta(entropy_now);
    if (measured_kl > 2.0 * delta) break;
  }

  kl.adapt(measured_kl, delta);

  // Final diagnostic pass on the full batch.
  std::vector<int> all(order.size());
  std::iota(all.begin(), all.end(), 0);
  grad.setZero();
  stats.pg_loss = ppo_loss_and_grad(net, b, all, kl.beta, params, grad);
  const auto fwd = net.forward(b.states);
  stats.value_loss = (fwd.value - b.returns).squaredNorm() / b.size();
  stats.approx_kl = measured_kl;
  stats.beta = kl.beta;
  stats.delta = delta;
  return stats;
}

}  // namespace jacrl::rl
