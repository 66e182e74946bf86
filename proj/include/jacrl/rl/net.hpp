#ifndef JACRL_RL_NET_HPP_
#define JACRL_RL_NET_HPP_

#include <Eigen/Dense>
#include <vector>

#include "jacrl/errors.hpp"
#include "jacrl/rng.hpp"

namespace jacrl::rl {

inline constexpr int kActionDim = 5;
inline constexpr double kActionBound = 0.4;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

// Shared-trunk policy/value network: tanh hidden layers, a Gaussian action
// head (means plus a state-independent log-std vector) and a scalar value
// head. Parameters live in one flat vector so gradients can be checked
// against finite differences and optimizer state stays trivial.
class PolicyValueNet {
 public:
  PolicyValueNet(int input_dim, std::vector<int> hidden, uint64_t init_seed);

  int input_dim() const { return input_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  int param_count() const { return static_cast<int>(params_.size()); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Activations cached for the backward pass.
  struct Forward {
    Eigen::MatrixXd input;               // N x in
    std::vector<Eigen::MatrixXd> acts;   // post-tanh per hidden layer, N x width
    Eigen::MatrixXd mean;                // N x 5
    Eigen::VectorXd value;               // N
  };

  Forward forward(const Eigen::MatrixXd& input) const;

  // Clamped log-std used by the Gaussian head.
  Eigen::Matrix<double, kActionDim, 1> log_std() const;
  // 1 inside the clamp interval, 0 where saturated.
  Eigen::Matrix<double, kActionDim, 1> log_std_grad_mask() const;

  // Accumulates dLoss/dparams into grad given head gradients.
  // d_mean: N x 5, d_value: N, d_logstd: 5 (w.r.t. the clamped value).
  void backward(const Forward& f, const Eigen::MatrixXd& d_mean,
                const Eigen::VectorXd& d_value,
                const Eigen::Matrix<double, kActionDim, 1>& d_logstd,
                Eigen::VectorXd& grad) const;

 private:
  struct TensorView {
    int offset, rows, cols;
  };

  Eigen::Map<const Eigen::MatrixXd> mat(const Eigen::VectorXd& v, const TensorView& t) const {
    return {v.data() + t.offset, t.rows, t.cols};
  }
  Eigen::Map<Eigen::MatrixXd> mat(Eigen::VectorXd& v, const TensorView& t) const {
    return {v.data() + t.offset, t.rows, t.cols};
  }

  int input_dim_;
  std::vector<int> hidden_;
  std::vector<TensorView> w_, b_;  // trunk + mean head + value head
  TensorView log_std_view_;
  Eigen::VectorXd params_;

 public:
  // Tensor layout for checkpoints: (name, rows, cols, offset).
  struct TensorInfo {
    std::string name;
    int rows, cols, offset;
  };
  std::vector<TensorInfo> tensor_layout() const;
};

// Standard Adam on the flat parameter vector.
class Adam {
 public:
  Adam(int n, double lr) : lr_(lr), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_.array().matrix() + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    params.array() -=
        lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
  }

 private:
  double lr_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int64_t t_ = 0;
  Eigen::VectorXd m_, v_;
};

// Running mean/variance of the policy input; frozen during evaluation.
class RunningNormalizer {
 public:
  explicit RunningNormalizer(int dim)
      : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }

  Eigen::VectorXd variance() const {
    if (count_ < 2.0) return Eigen::VectorXd::Ones(mean_.size());
    return m2_ / count_;
  }

  void update(const Eigen::VectorXd& x) {
    if (frozen_) return;
    count_ += 1.0;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / count_;
    m2_ += delta.cwiseProduct(x - mean_);
  }

  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd sd = (variance().array() + 1e-8).sqrt();
    return ((x - mean_).array() / sd.array()).cwiseMax(-10.0).cwiseMin(10.0);
  }

  void freeze(bool on) { frozen_ = on; }
  bool frozen() const { return frozen_; }

  void restore(double count, const Eigen::VectorXd& mean, const Eigen::VectorXd& m2) {
    count_ = count;
    mean_ = mean;
    m2_ = m2;
  }
  const Eigen::VectorXd& m2() const { return m2_; }

 private:
  Eigen::VectorXd mean_, m2_;
  double count_ = 0.0;
  bool frozen_ = false;
};

}  // namespace jacrl::rl

#endif  // JACRL_RL_NET_HPP_
