#ifndef JACRL_ENV_TARGETS_HPP_
#define JACRL_ENV_TARGETS_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "jacrl/rng.hpp"
#include "jacrl/sim/scene_config.hpp"

namespace jacrl::env {

enum class TargetListId { A, B, VesselUB, VesselLB };

std::string to_string(TargetListId id);

struct TargetList {
  TargetListId list_id;
  std::vector<Eigen::Vector3d> targets;
  uint64_t generator_seed = 0;
};

// Lists A and B are drawn from one generator stream inside the stomach
// target region and split alternately, so both share the spatial
// distribution while staying disjoint. Vessel lists sample the two branch
// end discs. Throws ConfigError when the scene lacks the needed geometry.
TargetList make_target_list(const sim::SceneConfig& cfg, TargetListId id);

// Uniform draw from the list, deterministic under the rng state.
Eigen::Vector3d sample_target(const TargetList& list, Rng& rng);

}  // namespace jacrl::env

#endif  // JACRL_ENV_TARGETS_HPP_
