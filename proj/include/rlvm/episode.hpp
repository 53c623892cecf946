#pragma once

#include <memory>

#include "rlvm/agent.hpp"
#include "rlvm/cluster.hpp"
#include "rlvm/metrics.hpp"
#include "rlvm/policies.hpp"

namespace rlvm {

struct EpisodeConfig {
  Method method = Method::kLrMmtPabfd;
  ClusterConfig cluster;
  DetectionConfig detection;
  std::uint64_t seed = 0;
  const PolicyParams* params = nullptr;  // required for the RL method
};

struct EpisodeOutput {
  std::vector<SlotAccounting> accounting;
  int host_count = 0;
};

// One full pass over the request: per slot, the method selects VMs and its
// placer maps them, then the slot advances.
EpisodeOutput run_episode(std::shared_ptr<const RequestSet> request, const EpisodeConfig& cfg);

}  // namespace rlvm
