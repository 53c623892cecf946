#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "rlvm/trace.hpp"

namespace rlvm {

struct HostSpec {
  int id = 0;
  double capacity_mhz = 0.0;    // max compute the host can provide
  double base_power = 0.0;      // energy per slot while active, independent of load
  double bandwidth_kbps = 0.0;  // used by migration-time ranking
};

// Assignment of every VM to exactly one host, with the induced per-host sets
// kept in sync (sorted ascending by VM index).
class Placement {
 public:
  Placement() = default;
  Placement(int vm_count, int host_count);
  static Placement from_assignment(std::vector<int> host_of_vm, int host_count);

  int host_of(int vm) const { return host_of_vm_[static_cast<std::size_t>(vm)]; }
  const std::vector<int>& vms_on(int host) const {
    return vms_on_host_[static_cast<std::size_t>(host)];
  }
  int vm_count() const { return static_cast<int>(host_of_vm_.size()); }
  int host_count() const { return static_cast<int>(vms_on_host_.size()); }

  void move(int vm, int dst_host);

  bool operator==(const Placement&) const = default;

 private:
  std::vector<int> host_of_vm_;
  std::vector<std::vector<int>> vms_on_host_;
};

// VMs selected for migration this slot, in emission order. Sources must
// match the current placement: a policy can only select VMs where they run.
struct MigrationEntry {
  int vm = 0;
  int source = 0;
};

struct MigrationSet {
  std::vector<MigrationEntry> entries;
  bool empty() const { return entries.empty(); }
};

// Energy ledger for a single slot. ec_total = ec_host + mc + slavc, summed
// in that exact order; parts are accumulated ascending by host index, then
// ascending by VM index within a host.
struct SlotAccounting {
  int slot = 0;
  double ec_host = 0.0;  // base + VM draw over active hosts
  double mc = 0.0;       // migration overhead (10% of each moved VM's draw)
  double slavc = 0.0;    // SLAV compensation over overloaded hosts
  double ec_total = 0.0;
  std::vector<std::uint8_t> chi;      // per host: 1 when at least one VM is assigned
  std::vector<std::uint8_t> upsilon;  // per host: 1 when the VM draw reaches capacity
  struct Move {
    int vm = 0;
    int src = 0;
    int dst = 0;
  };
  std::vector<Move> migrations;  // ascending by VM index
  int failed_placements = 0;     // selected VMs the placer could not host
};

struct ClusterConfig {
  int host_count = 0;             // 0: size fleet from mean demand at 70% target fill
  double capacity_mhz = 11704.0;  // matches the provisioned capacity seen in traces
  double base_power = -1.0;       // <0: 0.3 * capacity per slot
  double bandwidth_kbps = 100000.0;
  double slav_penalty_ratio = 0.5;  // in [0, 1]
};

struct ClusterState {
  std::vector<HostSpec> hosts;
  std::shared_ptr<const RequestSet> request;
  Placement placement;
  int slot = 0;
  double slav_penalty_ratio = 0.5;
  // Per host, the realized (post-migration) utilization of each completed
  // slot, normalized by capacity. Feeds the regression detector and the
  // agent's features.
  std::vector<std::vector<double>> history;

  const VmProfile& profile(int vm) const {
    return request->profiles[static_cast<std::size_t>(vm)];
  }
  int vm_count() const { return static_cast<int>(request->profiles.size()); }
  int host_count() const { return static_cast<int>(hosts.size()); }
  int slot_count() const { return request->slot_count; }
};

// Builds hosts from the config (auto-sizing the fleet when host_count == 0)
// and assigns the initial placement: VMs in id order, first host whose
// declared-demand fill stays within capacity, falling back to the host with
// the smallest declared load once all are nominally full. Hosts beyond the
// packed prefix start empty.
ClusterState make_cluster(std::shared_ptr<const RequestSet> request, const ClusterConfig& cfg);

// Energy drawn by one VM during slot t (slot length normalized to 1).
double vm_energy(const VmProfile& vm, int t);

// Sum of VM draw on host j at slot t, accumulated ascending by VM index.
double host_load(const ClusterState& state, int j, int t);

// Overload indicator: 1 when the VM draw on host j reaches its capacity.
int host_overloaded(const ClusterState& state, int j, int t);

// Total host energy at slot t: sum over active hosts of base + VM draw.
// Hosts without VMs are in energy-saving mode and contribute nothing.
double slot_host_energy(const ClusterState& state, int t);

// Migration overhead: 10% of each selected VM's draw at slot t.
double migration_cost(const ClusterState& state, const MigrationSet& mig, int t);

// SLAV compensation: penalty ratio times the declared demand of every VM on
// an overloaded host.
double slav_compensation(const ClusterState& state, int t);

// Placement input handed to a placer: current per-host committed load (VM
// draw excluding the VMs being migrated) and the migrating VMs in selection
// order, each with its draw at the current slot.
struct PlacementVmItem {
  int vm = 0;
  int source = 0;
  double energy = 0.0;
};

struct PlacementHostState {
  double capacity = 0.0;
  double base_power = 0.0;
  double load = 0.0;  // committed VM draw
  int vm_count = 0;   // committed VM count
};

struct PlacementProblem {
  std::vector<PlacementHostState> hosts;
  std::vector<PlacementVmItem> vms;
};

PlacementProblem build_placement_problem(const ClusterState& state, const MigrationSet& mig);

class Placer {
 public:
  virtual ~Placer() = default;
  // Destination host per migrating VM, parallel to problem.vms; -1 when no
  // feasible host exists.
  virtual std::vector<int> place(const PlacementProblem& problem) = 0;
  virtual std::string_view name() const = 0;
};

// Advances the cluster by one slot, mutating `state`:
//   1. the slot's usage takes effect;
//   2. the placer maps the selected VMs to destinations;
//   3. activity and overload are evaluated on the post-migration placement;
//   4. host energy, migration overhead (moved VMs only), SLAV compensation
//      and their total are accumulated in fixed order;
//   5. hosts left without VMs drop out of the energy sum;
//   6. the slot counter and per-host utilization history advance.
// Selected VMs the placer could not host stay on their source and are not
// charged migration overhead.
SlotAccounting advance_slot(ClusterState& state, const MigrationSet& mig, Placer& placer);

// Post-hoc audit of one placement round against the migration constraints.
struct PlacementCheckReport {
  std::vector<int> unassigned;          // selected VMs without a destination
  std::vector<int> source_destination;  // destination equals source
  std::vector<int> overloaded_hosts;    // hosts at/over capacity after the moves
  bool non_migrated_unmoved = true;
  bool all_pass() const {
    return unassigned.empty() && source_destination.empty() && overloaded_hosts.empty() &&
           non_migrated_unmoved;
  }
};

// `destinations` is the placer output parallel to mig.entries. Overload is
// evaluated at the state's current slot usages with the moves applied.
PlacementCheckReport validate_placement_result(const ClusterState& state, const MigrationSet& mig,
                                               const std::vector<int>& destinations);

}  // namespace rlvm
