#include "rlvm/policies.hpp"

#include <algorithm>
#include <cmath>

#include "rlvm/error.hpp"

namespace rlvm {

OverloadPrediction lr_overload_predict(std::span<const double> history,
                                       const DetectionConfig& cfg) {
  if (cfg.window < 3) throw InvalidSpecError("detection window must be at least 3");
  if (cfg.safety < 1.0) throw InvalidSpecError("detection safety must be at least 1");
  if (history.empty()) throw PreconditionError("utilization history is empty");
  for (double u : history)
    if (!std::isfinite(u)) throw PreconditionError("utilization history has non-finite values");

  OverloadPrediction out;
  const int n = static_cast<int>(history.size());
  if (n < cfg.window) {
    out.predicted_next = history.back();
    out.overloaded = history.back() >= 1.0 / cfg.safety;
    return out;
  }

  const int w = cfg.window;
  auto recent = history.subspan(static_cast<std::size_t>(n - w));
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (int k = 1; k <= w; ++k) {
    double frac = static_cast<double>(w - k) / static_cast<double>(w);
    double weight = std::pow(1.0 - frac * frac * frac, 3.0);
    double x = static_cast<double>(k);
    double y = recent[static_cast<std::size_t>(k - 1)];
    sw += weight;
    swx += weight * x;
    swy += weight * y;
    swxx += weight * x * x;
    swxy += weight * x * y;
  }
  double det = sw * swxx - swx * swx;
  double slope = det != 0.0 ? (sw * swxy - swx * swy) / det : 0.0;
  double intercept = (swy - slope * swx) / sw;
  out.predicted_next = intercept + slope * static_cast<double>(w + 1);
  out.overloaded = cfg.safety * out.predicted_next >= 1.0;
  return out;
}

Detector make_lr_detector(const DetectionConfig& cfg) {
  return [cfg](std::span<const double> history) { return lr_overload_predict(history, cfg); };
}

std::vector<double> utilization_series(const ClusterState& state, int j) {
  std::vector<double> series = state.history[static_cast<std::size_t>(j)];
  series.push_back(host_load(state, j, state.slot) /
                   state.hosts[static_cast<std::size_t>(j)].capacity_mhz);
  return series;
}

std::vector<int> mmt_select(const ClusterState& state, int j, const Detector& detector) {
  std::vector<double> series = utilization_series(state, j);
  if (!detector(series).overloaded)
    throw PreconditionError("host " + std::to_string(j) + " is not flagged as overloaded");

  const int t = state.slot;
  const HostSpec& host = state.hosts[static_cast<std::size_t>(j)];
  std::vector<int> remaining = state.placement.vms_on(j);
  double load = host_load(state, j, t);
  std::vector<int> picked;
  while (!remaining.empty()) {
    // Shortest migration time first: memory in flight over the host link.
    auto best = remaining.begin();
    double best_time = state.profile(*best).ram_usage_kb[static_cast<std::size_t>(t)] /
                       host.bandwidth_kbps;
    for (auto it = std::next(remaining.begin()); it != remaining.end(); ++it) {
      double time =
          state.profile(*it).ram_usage_kb[static_cast<std::size_t>(t)] / host.bandwidth_kbps;
      if (time < best_time) {
        best = it;
        best_time = time;
      }
    }
    int vm = *best;
    remaining.erase(best);
    picked.push_back(vm);
    load -= vm_energy(state.profile(vm), t);
    series.back() = load / host.capacity_mhz;
    if (!detector(series).overloaded) break;
  }
  return picked;
}

namespace {

// Shared placement pass: feasibility is identical for every strategy, only
// the choice among feasible hosts differs.
template <typename ChooseFn>
std::vector<int> place_pass(const PlacementProblem& problem, ChooseFn choose) {
  std::vector<PlacementHostState> hosts = problem.hosts;
  std::vector<int> destinations(problem.vms.size(), -1);
  std::vector<int> feasible;
  for (std::size_t i = 0; i < problem.vms.size(); ++i) {
    const PlacementVmItem& vm = problem.vms[i];
    feasible.clear();
    for (int j = 0; j < static_cast<int>(hosts.size()); ++j) {
      const PlacementHostState& h = hosts[static_cast<std::size_t>(j)];
      if (j != vm.source && h.load + vm.energy < h.capacity) feasible.push_back(j);
    }
    if (feasible.empty()) continue;
    int dst = choose(hosts, vm, feasible);
    destinations[i] = dst;
    hosts[static_cast<std::size_t>(dst)].load += vm.energy;
    hosts[static_cast<std::size_t>(dst)].vm_count += 1;
  }
  return destinations;
}

double estimate_power(const PlacementHostState& host, const PlacementVmItem& vm) {
  return (host.vm_count == 0 ? host.base_power : 0.0) + vm.energy;
}

}  // namespace

std::vector<int> pabfd_place(const PlacementProblem& problem) {
  return place_pass(problem, [](const std::vector<PlacementHostState>& hosts,
                                const PlacementVmItem& vm, const std::vector<int>& feasible) {
    int best = feasible.front();
    double best_power = estimate_power(hosts[static_cast<std::size_t>(best)], vm);
    for (std::size_t k = 1; k < feasible.size(); ++k) {
      int j = feasible[k];
      double power = estimate_power(hosts[static_cast<std::size_t>(j)], vm);
      if (power < best_power) {  // ties keep the lowest host index
        best = j;
        best_power = power;
      }
    }
    return best;
  });
}

std::vector<int> ff_place(const PlacementProblem& problem) {
  return place_pass(problem,
                    [](const std::vector<PlacementHostState>&, const PlacementVmItem&,
                       const std::vector<int>& feasible) { return feasible.front(); });
}

std::vector<int> random_place(const PlacementProblem& problem, Prng& rng) {
  return place_pass(problem,
                    [&rng](const std::vector<PlacementHostState>&, const PlacementVmItem&,
                           const std::vector<int>& feasible) {
                      return feasible[rng.uniform_int(feasible.size())];
                    });
}

const char* method_name(Method m) {
  switch (m) {
    case Method::kLrMmtRandom: return "lr-mmt-random";
    case Method::kLrMmtFf: return "lr-mmt-ff";
    case Method::kLrMmtPabfd: return "lr-mmt-pabfd";
    case Method::kRlPabfd: return "rl-pabfd";
  }
  return "?";
}

bool parse_method(std::string_view name, Method& out) {
  if (name == "lr-mmt-random") out = Method::kLrMmtRandom;
  else if (name == "lr-mmt-ff") out = Method::kLrMmtFf;
  else if (name == "lr-mmt-pabfd") out = Method::kLrMmtPabfd;
  else if (name == "rl-pabfd") out = Method::kRlPabfd;
  else return false;
  return true;
}

MigrationSet baseline_step(const ClusterState& state, const DetectionConfig& cfg) {
  Detector detector = make_lr_detector(cfg);
  MigrationSet mig;
  for (int j = 0; j < state.host_count(); ++j) {
    if (state.placement.vms_on(j).empty()) continue;
    if (!detector(utilization_series(state, j)).overloaded) continue;
    for (int vm : mmt_select(state, j, detector)) mig.entries.push_back({vm, j});
  }
  return mig;
}

std::unique_ptr<Placer> make_placer(Method method, std::uint64_t seed) {
  switch (method) {
    case Method::kLrMmtRandom: return std::make_unique<RandomPlacer>(seed);
    case Method::kLrMmtFf: return std::make_unique<FfPlacer>();
    case Method::kLrMmtPabfd:
    case Method::kRlPabfd: return std::make_unique<PabfdPlacer>();
  }
  return nullptr;
}

}  // namespace rlvm
