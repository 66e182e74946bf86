#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "jacrl/rl/trainer.hpp"

using namespace jacrl;
using namespace jacrl::rl;

namespace {

std::string config_dir() {
  const char* d = std::getenv("JACRL_CONFIG_DIR");
  return d ? d : "configs";
}

PolicyValueNet tiny_net(uint64_t seed = 3) {
  return PolicyValueNet(3, {4}, seed);  // 51 parameters
}

// Minibatch data with ratios inside the clip band and generic values.
RolloutBatch tiny_batch(const PolicyValueNet& net, int n, uint64_t seed) {
  Rng rng(seed);
  RolloutBatch b;
  b.states.resize(n, net.input_dim());
  for (int i = 0; i < b.states.size(); ++i) b.states.data()[i] = rng.normal();
  const auto fwd = net.forward(b.states);
  b.actions.resize(n, kActionDim);
  b.log_probs.resize(n);
  b.old_means = fwd.mean;
  b.old_log_std = net.log_std();
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd a(kActionDim);
    for (int j = 0; j < kActionDim; ++j) {
      a[j] = fwd.mean(i, j) + std::exp(b.old_log_std[j]) * rng.normal();
    }
    b.actions.row(i) = a;
    b.log_probs[i] =
        GaussianPolicy::log_prob(a, fwd.mean.row(i), b.old_log_std) + rng.uniform(-0.03, 0.03);
  }
  b.rewards = Eigen::VectorXd::Zero(n);
  b.values = fwd.value;
  b.dones.assign(n, 0);
  b.bootstrap = Eigen::VectorXd::Zero(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (int i = 0; i < n; ++i) {
    b.advantages[i] = rng.normal();
    b.returns[i] = rng.normal();
  }
  return b;
}

}  // namespace

TEST_CASE("deterministic act repeats exactly and stays near zero at init") {
  PolicyValueNet net(15, {256, 128, 64, 32}, 42);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(15);
  const auto a1 = act(net, zero, nullptr);
  const auto a2 = act(net, zero, nullptr);
  for (int j = 0; j < kActionDim; ++j) {
    CHECK(a1.action[j] == a2.action[j]);
    CHECK(std::abs(a1.action[j]) < 0.1);  // near-zero head init
  }
  CHECK_THROWS_AS((void)act(net, Eigen::VectorXd::Zero(9), nullptr), ShapeMismatch);
}

TEST_CASE("sampled actions always stay inside the bounds") {
  PolicyValueNet net(15, {256, 128, 64, 32}, 7);
  // Push log-std to its ceiling so raw samples frequently leave the box.
  net.params().tail<kActionDim>().setConstant(5.0);
  Rng rng(1);
  Eigen::VectorXd state(15);
  for (int trial = 0; trial < 10000; ++trial) {
    if (trial % 100 == 0) {
      for (int i = 0; i < 15; ++i) state[i] = rng.normal();
    }
    const auto res = act(net, state, &rng);
    for (int j = 0; j < kActionDim; ++j) {
      CHECK(std::abs(res.action[j]) <= kActionBound);
    }
  }
  CHECK(net.log_std()[0] == kLogStdMax);  // clamped on read
}

TEST_CASE("GAE single terminal step and zero-reward cases") {
  RolloutBatch b;
  b.states.resize(1, 3);
  b.rewards = Eigen::VectorXd::Constant(1, 1.0);
  b.values = Eigen::VectorXd::Zero(1);
  b.dones = {1};
  b.bootstrap = Eigen::VectorXd::Zero(1);
  compute_gae(b, 1, 0.99, 0.95);
  CHECK(b.advantages[0] == doctest::Approx(1.0));
  CHECK(b.returns[0] == doctest::Approx(1.0));

  RolloutBatch z;
  z.states.resize(8, 3);
  z.rewards = Eigen::VectorXd::Zero(8);
  z.values = Eigen::VectorXd::Zero(8);
  z.dones.assign(8, 0);
  z.bootstrap = Eigen::VectorXd::Zero(8);
  compute_gae(z, 2, 0.99, 0.95);
  CHECK(z.advantages.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("GAE three-step case matches the hand-unrolled recursion") {
  const double gamma = 0.99, lam = 0.95;
  RolloutBatch b;
  b.states.resize(3, 3);
  b.rewards.resize(3);
  b.rewards << 1.0, 0.0, 1.0;
  b.values = Eigen::VectorXd::Constant(3, 0.5);
  b.dones.assign(3, 0);
  b.bootstrap = Eigen::VectorXd::Constant(3, 0.5);
  compute_gae(b, 1, gamma, lam);

  // Unrolled by hand with bootstrap V = 0.5 after the last step.
  const double d2 = 1.0 + gamma * 0.5 - 0.5;
  const double d1 = 0.0 + gamma * 0.5 - 0.5;
  const double d0 = 1.0 + gamma * 0.5 - 0.5;
  const double a2 = d2;
  const double a1 = d1 + gamma * lam * a2;
  const double a0 = d0 + gamma * lam * a1;
  CHECK(b.advantages[2] == doctest::Approx(a2).epsilon(1e-12));
  CHECK(b.advantages[1] == doctest::Approx(a1).epsilon(1e-12));
  CHECK(b.advantages[0] == doctest::Approx(a0).epsilon(1e-12));
  CHECK(b.returns[0] == doctest::Approx(a0 + 0.5).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  PolicyValueNet net = tiny_net();
  CHECK(net.param_count() <= 100);
  RolloutBatch b = tiny_batch(net, 6, 11);
  std::vector<int> rows = {0, 1, 2, 3, 4, 5};
  PpoParams params;
  const double beta = 0.7;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  (void)ppo_loss_and_grad(net, b, rows, beta, params, grad);

  const double h = 1e-6;
  double max_err = 0.0;
  for (int k = 0; k < net.param_count(); ++k) {
    Eigen::VectorXd dummy = Eigen::VectorXd::Zero(net.param_count());
    const double orig = net.params()[k];
    net.params()[k] = orig + h;
    const double lp = ppo_loss_and_grad(net, b, rows, beta, params, dummy);
    net.params()[k] = orig - h;
    dummy.setZero();
    const double lm = ppo_loss_and_grad(net, b, rows, beta, params, dummy);
    net.params()[k] = orig;
    const double fd = (lp - lm) / (2.0 * h);
    const double err = std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-6});
    max_err = std::max(max_err, err);
  }
  CHECK(max_err < 1e-4);
}

TEST_CASE("zero advantages kill the surrogate gradient") {
  PolicyValueNet net = tiny_net(5);
  RolloutBatch b = tiny_batch(net, 8, 13);
  b.advantages.setZero();
  // Sample actions exactly at the current policy so the KL penalty is also
  // at its stationary point; only entropy/value should push, and both are
  // disabled here.
  PpoParams params;
  params.vf_coef = 0.0;
  params.ent_coef = 0.0;
  std::vector<int> rows = {0, 1, 2, 3, 4, 5, 6, 7};
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  (void)ppo_loss_and_grad(net, b, rows, /*beta=*/0.0, params, grad);
  CHECK(grad.norm() <= 1e-8);
}

TEST_CASE("KL controller adaptation and clamping") {
  KLController kl;
  const double delta = 0.01;
  kl.adapt(0.05, delta);  // way above 1.5 delta
  CHECK(kl.beta == doctest::Approx(1.5));
  kl.adapt(0.001, delta);  // below delta / 1.5
  CHECK(kl.beta == doctest::Approx(1.0));
  kl.adapt(0.01, delta);  // inside the dead band
  CHECK(kl.beta == doctest::Approx(1.0));

  for (int i = 0; i < 100; ++i) kl.adapt(1.0, delta);
  CHECK(kl.beta <= 1e4);
  for (int i = 0; i < 200; ++i) kl.adapt(0.0, delta);
  CHECK(kl.beta >= 1e-4);

  // Entropy-adaptive threshold stays inside [0.005, 0.05].
  CHECK(kl.adapted_delta(-100.0) == doctest::Approx(0.005));
  CHECK(kl.adapted_delta(GaussianPolicy::max_entropy()) == doctest::Approx(0.02));
  CHECK(kl.adapted_delta(1e9) == 0.05);
}

TEST_CASE("oversized updates stop the epoch loop early and raise beta") {
  PolicyValueNet net = tiny_net(17);
  RolloutBatch b = tiny_batch(net, 64, 19);
  // Large advantages plus a large step size force KL past the threshold.
  b.advantages.array() *= 50.0;
  Adam opt(net.param_count(), 0.05);
  KLController kl;
  PpoParams params;
  params.minibatch = 16;
  Rng rng(23);
  const UpdateStats stats = ppo_update(net, opt, b, kl, params, rng);
  CHECK(stats.epochs_run < params.epochs);
  CHECK(kl.beta == doctest::Approx(1.5));
}

TEST_CASE("non-finite loss aborts the update and restores weights") {
  PolicyValueNet net = tiny_net(29);
  const Eigen::VectorXd before = net.params();
  RolloutBatch b = tiny_batch(net, 8, 31);
  b.returns[3] = std::numeric_limits<double>::infinity();
  Adam opt(net.param_count(), 3e-4);
  KLController kl;
  PpoParams params;
  params.minibatch = 8;
  Rng rng(1);
  CHECK_THROWS_AS((void)ppo_update(net, opt, b, kl, params, rng), NonFiniteLoss);
  CHECK(net.params() == before);
}

TEST_CASE("policy mean migrates toward the rewarding side of a bandit") {
  // One-state bandit: the sign of action[0] picks the arm; arm+ pays 1.
  PolicyValueNet net(1, {4}, 37);
  Adam opt(net.param_count(), 3e-3);
  KLController kl;
  PpoParams params;
  params.minibatch = 64;
  Rng rng(41);

  // Brute-force oracle: d/dmu E[r] = integral N(a; mu, sd) r(a) (a-mu)/sd^2 da
  // evaluated by direct quadrature at the initial policy.
  {
    const auto fwd = net.forward(Eigen::MatrixXd::Zero(1, 1));
    const double mu = fwd.mean(0, 0);
    const double sd = std::exp(net.log_std()[0]);
    double grad_mu = 0.0;
    const int n_grid = 20001;
    for (int i = 0; i < n_grid; ++i) {
      const double a = mu - 6.0 * sd + 12.0 * sd * i / (n_grid - 1);
      const double w = std::exp(-0.5 * std::pow((a - mu) / sd, 2)) /
                       (sd * std::sqrt(2.0 * M_PI));
      const double r = a > 0.0 ? 1.0 : 0.0;
      grad_mu += w * r * (a - mu) / (sd * sd) * (12.0 * sd / (n_grid - 1));
    }
    CHECK(grad_mu > 0.0);  // ascent direction is positive
  }

  const double mu_before = net.forward(Eigen::MatrixXd::Zero(1, 1)).mean(0, 0);
  for (int update = 0; update < 50; ++update) {
    const int n = 256;
    RolloutBatch b;
    b.states = Eigen::MatrixXd::Zero(n, 1);
    const auto fwd = net.forward(b.states);
    b.actions.resize(n, kActionDim);
    b.log_probs.resize(n);
    b.rewards.resize(n);
    b.values = fwd.value;
    b.dones.assign(n, 1);
    b.old_means = fwd.mean;
    b.old_log_std = net.log_std();
    b.bootstrap = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      Eigen::RowVectorXd a(kActionDim);
      for (int j = 0; j < kActionDim; ++j) {
        a[j] = fwd.mean(i, j) + std::exp(b.old_log_std[j]) * rng.normal();
      }
      b.actions.row(i) = a;
      b.log_probs[i] = GaussianPolicy::log_prob(a, fwd.mean.row(i), b.old_log_std);
      b.rewards[i] = a[0] > 0.0 ? 1.0 : 0.0;
    }
    compute_gae(b, n, 0.99, 0.95);
    (void)ppo_update(net, opt, b, kl, params, rng);
  }
  const double mu_after = net.forward(Eigen::MatrixXd::Zero(1, 1)).mean(0, 0);
  CHECK(mu_after > mu_before + 0.05);  // moved toward the paying arm
}

TEST_CASE("checkpoints round-trip through manifest and tensor data") {
  PolicyValueNet net(15, {256, 128, 64, 32}, 51);
  RunningNormalizer norm(15);
  Rng rng(53);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(15);
    for (int j = 0; j < 15; ++j) x[j] = rng.normal();
    norm.update(x);
  }
  const auto dir = std::filesystem::temp_directory_path() / "jacrl_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string base = (dir / "ckpt").string();
  save_checkpoint(base, net, norm, env::PolicyMode::Baseline, "deadbeef");

  const Checkpoint c = load_checkpoint(base);
  CHECK(c.mode == env::PolicyMode::Baseline);
  CHECK(c.input_dim == 15);
  CHECK(c.config_hash == "deadbeef");
  // Tensor data is float32 on disk.
  for (int i = 0; i < net.param_count(); ++i) {
    CHECK(c.params[i] == static_cast<double>(static_cast<float>(net.params()[i])));
  }
  // Normalizer stats are full-precision text.
  CHECK(c.norm_count == norm.count());
  CHECK(c.norm_mean == norm.mean());
  CHECK(c.norm_m2 == norm.m2());

  auto [net2, norm2] = instantiate(c);
  const Eigen::VectorXd probe_state = Eigen::VectorXd::Constant(15, 0.3);
  CHECK(act(net2, norm2.normalize(probe_state), nullptr).value ==
        doctest::Approx(act(net2, norm2.normalize(probe_state), nullptr).value));
}

TEST_CASE("finetune rejects a checkpoint of the wrong width") {
  PolicyValueNet net(15, {256, 128, 64, 32}, 61);
  RunningNormalizer norm(15);
  const auto dir = std::filesystem::temp_directory_path() / "jacrl_ckpt_mismatch";
  std::filesystem::create_directories(dir);
  const std::string base = (dir / "ckpt").string();
  save_checkpoint(base, net, norm, env::PolicyMode::Baseline, "00");

  TrainConfig cfg;
  cfg.mode = env::PolicyMode::JacobianAugmented;  // expects width 90
  cfg.scene = sim::load_scene_config(config_dir() + "/stomach.json");
  cfg.total_steps = 0;
  cfg.rollout_len = 64;
  cfg.n_envs = 4;
  CHECK_THROWS_AS((void)finetune(load_checkpoint(base), cfg), CheckpointMismatch);
}

TEST_CASE("zero-step training returns an empty curve and a checkpoint") {
  TrainConfig cfg;
  cfg.scene = sim::load_scene_config(config_dir() + "/stomach.json");
  cfg.total_steps = 0;
  cfg.rollout_len = 64;
  cfg.n_envs = 4;
  const auto dir = std::filesystem::temp_directory_path() / "jacrl_zerostep";
  std::filesystem::remove_all(dir);
  cfg.out_dir = dir.string();
  const TrainingRun run = train(cfg);
  CHECK(run.curve.empty());
  CHECK(std::filesystem::exists(run.checkpoint_base + ".manifest"));
  CHECK(std::filesystem::exists(run.checkpoint_base + ".bin"));
}

TEST_CASE("training is a pure function of config and seed") {
  TrainConfig cfg;
  cfg.scene = sim::load_scene_config(config_dir() + "/stomach.json");
  cfg.mode = env::PolicyMode::JacobianAugmented;
  cfg.total_steps = 1024;
  cfg.rollout_len = 512;
  cfg.n_envs = 4;
  cfg.seed = 99;

  const TrainingRun a = train(cfg);
  const TrainingRun b = train(cfg);
  REQUIRE(a.curve.size() == b.curve.size());
  for (size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].ep_reward_mean == b.curve[i].ep_reward_mean);
    CHECK(a.curve[i].kl == b.curve[i].kl);
    CHECK(a.curve[i].entropy == b.curve[i].entropy);
  }
  CHECK(a.net->params() == b.net->params());
}

TEST_CASE("both modes share the optimizer path and differ only in width") {
  TrainConfig base, jac;
  base.mode = env::PolicyMode::Baseline;
  jac.mode = env::PolicyMode::JacobianAugmented;
  CHECK(base.input_dim() == 15);
  CHECK(jac.input_dim() == 90);
  // Same architecture behind the input layer.
  PolicyValueNet nb(base.input_dim(), base.hidden, 1);
  PolicyValueNet nj(jac.input_dim(), jac.hidden, 1);
  const int extra_inputs = (90 - 15) * 256;
  CHECK(nj.param_count() - nb.param_count() == extra_inputs);
}
