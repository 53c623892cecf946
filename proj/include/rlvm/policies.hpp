#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rlvm/cluster.hpp"
#include "rlvm/prng.hpp"

namespace rlvm {

struct DetectionConfig {
  int window = 10;      // history points fed to the regression
  double safety = 1.2;  // forecast inflation before comparing with capacity
};

struct OverloadPrediction {
  double predicted_next = 0.0;  // one-step-ahead normalized utilization
  bool overloaded = false;
};

// Local regression overload detector. Fits a tricube-weighted line over the
// last `window` utilization points (weights w_k = (1 - ((n-k)/n)^3)^3,
// k = 1..n with k = n the newest) and extrapolates one step. A host is
// flagged when safety * forecast reaches 1. With fewer than `window` points
// the last observation is used as the forecast and compared with 1/safety.
OverloadPrediction lr_overload_predict(std::span<const double> history,
                                       const DetectionConfig& cfg);

using Detector = std::function<OverloadPrediction(std::span<const double>)>;
Detector make_lr_detector(const DetectionConfig& cfg);

// Utilization history of host j extended with the current slot's value; the
// input shared by detection and the agent's forecast feature.
std::vector<double> utilization_series(const ClusterState& state, int j);

// Minimum-migration-time selection: starting from a host the detector
// flags, repeatedly evict the VM with the smallest ram_usage / bandwidth
// until the detector, re-evaluated with the reduced utilization in place of
// the newest point, clears the host. Returns VM indices in pick order.
std::vector<int> mmt_select(const ClusterState& state, int j, const Detector& detector);

// Destination per VM in list order, -1 when no host passes the feasibility
// filter (stays below capacity after the VM lands, and is not the VM's
// source). Hosts absorb each assignment immediately, so later VMs in the
// same pass see the updated loads.
std::vector<int> pabfd_place(const PlacementProblem& problem);  // least power increase
std::vector<int> ff_place(const PlacementProblem& problem);     // first feasible by index
std::vector<int> random_place(const PlacementProblem& problem, Prng& rng);

class PabfdPlacer final : public Placer {
 public:
  std::vector<int> place(const PlacementProblem& problem) override { return pabfd_place(problem); }
  std::string_view name() const override { return "pabfd"; }
};

class FfPlacer final : public Placer {
 public:
  std::vector<int> place(const PlacementProblem& problem) override { return ff_place(problem); }
  std::string_view name() const override { return "ff"; }
};

class RandomPlacer final : public Placer {
 public:
  explicit RandomPlacer(std::uint64_t seed) : rng_(seed) {}
  std::vector<int> place(const PlacementProblem& problem) override {
    return random_place(problem, rng_);
  }
  std::string_view name() const override { return "random"; }

 private:
  Prng rng_;
};

enum class Method { kLrMmtRandom, kLrMmtFf, kLrMmtPabfd, kRlPabfd };

const char* method_name(Method m);
bool parse_method(std::string_view name, Method& out);

// LR detection over every host followed by MMT selection on the flagged
// ones; the selection half of every baseline combo. Entries are grouped by
// ascending host index, in pick order within a host.
MigrationSet baseline_step(const ClusterState& state, const DetectionConfig& cfg);

// The placement half of a combo; the RL method shares the PABFD placer.
std::unique_ptr<Placer> make_placer(Method method, std::uint64_t seed);

}  // namespace rlvm
