#ifndef JACRL_RL_CHECKPOINT_HPP_
#define JACRL_RL_CHECKPOINT_HPP_

#include <string>

#include "jacrl/env/episode.hpp"
#include "jacrl/rl/net.hpp"

namespace jacrl::rl {

// Checkpoint on disk: <base>.manifest (text: schema version, mode, layer
// shapes, normalizer stats, config hash, tensor table) plus <base>.bin (raw
// little-endian float32 tensor data in table order).
struct Checkpoint {
  env::PolicyMode mode = env::PolicyMode::Baseline;
  int input_dim = 15;
  std::vector<int> hidden = {256, 128, 64, 32};
  std::string config_hash;

  Eigen::VectorXd params;      // float32 on disk, widened on load
  double norm_count = 0.0;
  Eigen::VectorXd norm_mean;
  Eigen::VectorXd norm_m2;
};

std::string config_hash_hex(const std::string& raw_config);

void save_checkpoint(const std::string& base, const PolicyValueNet& net,
                     const RunningNormalizer& norm, env::PolicyMode mode,
                     const std::string& config_hash);

// Throws CheckpointMismatch on schema or shape problems.
Checkpoint load_checkpoint(const std::string& base);

// Builds the net/normalizer pair a checkpoint describes.
std::pair<PolicyValueNet, RunningNormalizer> instantiate(const Checkpoint& c);

}  // namespace jacrl::rl

#endif  // JACRL_RL_CHECKPOINT_HPP_
