#include "rlvm/episode.hpp"

#include "rlvm/error.hpp"

namespace rlvm {

EpisodeOutput run_episode(std::shared_ptr<const RequestSet> request, const EpisodeConfig& cfg) {
  if (cfg.method == Method::kRlPabfd && cfg.params == nullptr)
    throw InvalidSpecError("rl-pabfd needs trained policy parameters");

  ClusterState state = make_cluster(request, cfg.cluster);
  Prng rng(cfg.seed);
  std::unique_ptr<Placer> placer = make_placer(cfg.method, rng.split().next_u64());

  EpisodeOutput out;
  out.host_count = state.host_count();
  out.accounting.reserve(static_cast<std::size_t>(state.slot_count()));
  for (int t = 0; t < state.slot_count(); ++t) {
    MigrationSet mig = cfg.method == Method::kRlPabfd
                           ? rl_step(*cfg.params, state, cfg.detection)
                           : baseline_step(state, cfg.detection);
    out.accounting.push_back(advance_slot(state, mig, *placer));
  }
  return out;
}

}  // namespace rlvm
