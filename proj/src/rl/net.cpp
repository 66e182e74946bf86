#include "jacrl/rl/net.hpp"

#include <cmath>

namespace jacrl::rl {

PolicyValueNet::PolicyValueNet(int input_dim, std::vector<int> hidden, uint64_t init_seed)
    : input_dim_(input_dim), hidden_(std::move(hidden)) {
  if (input_dim_ <= 0 || hidden_.empty()) {
    throw ValidationError("PolicyValueNet: bad architecture");
  }

  // Trunk layers, then mean head, then value head, then log_std.
  int offset = 0;
  auto add = [&](int rows, int cols) {
    w_.push_back({offset, rows, cols});
    offset += rows * cols;
    b_.push_back({offset, rows, 1});
    offset += rows;
  };
  int in = input_dim_;
  for (int width : hidden_) {
    add(width, in);
    in = width;
  }
  add(kActionDim, in);  // mean head
  add(1, in);           // value head
  log_std_view_ = {offset, kActionDim, 1};
  offset += kActionDim;

  params_.resize(offset);
  Rng rng(init_seed);
  const size_t n_layers = w_.size();
  for (size_t l = 0; l < n_layers; ++l) {
    const bool head = l >= hidden_.size();
    const double limit = std::sqrt(6.0 / (w_[l].rows + w_[l].cols));
    const double scale = head ? 0.01 : 1.0;  // near-zero heads at init
    auto W = mat(params_, w_[l]);
    for (int i = 0; i < W.size(); ++i) {
      W.data()[i] = scale * rng.uniform(-limit, limit);
    }
    mat(params_, b_[l]).setZero();
  }
  mat(params_, log_std_view_).setConstant(-1.2);
}

PolicyValueNet::Forward PolicyValueNet::forward(const Eigen::MatrixXd& input) const {
  if (input.cols() != input_dim_) {
    throw ShapeMismatch("PolicyValueNet: input has wrong dimension");
  }
  Forward f;
  f.input = input;
  f.acts.reserve(hidden_.size());
  const Eigen::MatrixXd* cur = &f.input;
  for (size_t l = 0; l < hidden_.size(); ++l) {
    Eigen::MatrixXd z = (*cur) * mat(params_, w_[l]).transpose();
    z.rowwise() += mat(params_, b_[l]).col(0).transpose();
    f.acts.push_back(z.array().tanh().matrix());
    cur = &f.acts.back();
  }
  const auto& wm = w_[hidden_.size()];
  const auto& bm = b_[hidden_.size()];
  const auto& wv = w_[hidden_.size() + 1];
  const auto& bv = b_[hidden_.size() + 1];
  f.mean = (*cur) * mat(params_, wm).transpose();
  f.mean.rowwise() += mat(params_, bm).col(0).transpose();
  f.value = (*cur) * mat(params_, wv).transpose().col(0);
  f.value.array() += mat(params_, bv)(0, 0);
  return f;
}

Eigen::Matrix<double, kActionDim, 1> PolicyValueNet::log_std() const {
  return mat(params_, log_std_view_)
      .col(0)
      .cwiseMax(kLogStdMin)
      .cwiseMin(kLogStdMax);
}

Eigen::Matrix<double, kActionDim, 1> PolicyValueNet::log_std_grad_mask() const {
  Eigen::Matrix<double, kActionDim, 1> mask;
  const auto raw = mat(params_, log_std_view_).col(0);
  for (int i = 0; i < kActionDim; ++i) {
    mask[i] = (raw[i] > kLogStdMin && raw[i] < kLogStdMax) ? 1.0 : 0.0;
  }
  return mask;
}

void PolicyValueNet::backward(const Forward& f, const Eigen::MatrixXd& d_mean,
                              const Eigen::VectorXd& d_value,
                              const Eigen::Matrix<double, kActionDim, 1>& d_logstd,
                              Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());

  const size_t n_hidden = hidden_.size();
  const Eigen::MatrixXd& last = f.acts.back();
  const auto& wm = w_[n_hidden];
  const auto& wv = w_[n_hidden + 1];

  // Head gradients.
  mat(grad, wm) += d_mean.transpose() * last;
  mat(grad, b_[n_hidden]).col(0) += d_mean.colwise().sum().transpose();
  mat(grad, wv) += (d_value.transpose() * last);
  mat(grad, b_[n_hidden + 1])(0, 0) += d_value.sum();

  // Backprop into the trunk.
  Eigen::MatrixXd delta = d_mean * mat(params_, wm) +
                          d_value * mat(params_, wv).row(0);
  for (int l = static_cast<int>(n_hidden) - 1; l >= 0; --l) {
    // Through tanh.
    delta = delta.cwiseProduct((1.0 - f.acts[l].array().square()).matrix());
    const Eigen::MatrixXd& below = l == 0 ? f.input : f.acts[l - 1];
    mat(grad, w_[l]) += delta.transpose() * below;
    mat(grad, b_[l]).col(0) += delta.colwise().sum().transpose();
    if (l > 0) delta = delta * mat(params_, w_[l]);
  }

  mat(grad, log_std_view_).col(0) += d_logstd.cwiseProduct(log_std_grad_mask());
}

std::vector<PolicyValueNet::TensorInfo> PolicyValueNet::tensor_layout() const {
  std::vector<TensorInfo> out;
  const size_t n_hidden = hidden_.size();
  for (size_t l = 0; l < w_.size(); ++l) {
    std::string base;
    if (l < n_hidden) {
      base = "trunk" + std::to_string(l);
    } else if (l == n_hidden) {
      base = "mean_head";
    } else {
      base = "value_head";
    }
    out.push_back({base + ".w", w_[l].rows, w_[l].cols, w_[l].offset});
    out.push_back({base + ".b", b_[l].rows, 1, b_[l].offset});
  }
  out.push_back({"log_std", kActionDim, 1, log_std_view_.offset});
  return out;
}

}  // namespace jacrl::rl
