#include "rlvm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rlvm/error.hpp"

namespace rlvm {

Placement::Placement(int vm_count, int host_count)
    : host_of_vm_(static_cast<std::size_t>(vm_count), -1),
      vms_on_host_(static_cast<std::size_t>(host_count)) {}

Placement Placement::from_assignment(std::vector<int> host_of_vm, int host_count) {
  Placement p;
  p.host_of_vm_ = std::move(host_of_vm);
  p.vms_on_host_.resize(static_cast<std::size_t>(host_count));
  for (int vm = 0; vm < p.vm_count(); ++vm) {
    int h = p.host_of_vm_[static_cast<std::size_t>(vm)];
    if (h < 0 || h >= host_count)
      throw InvariantViolationError("placement references unknown host " + std::to_string(h));
    p.vms_on_host_[static_cast<std::size_t>(h)].push_back(vm);
  }
  return p;  // per-host lists are ascending because vm iterates in order
}

void Placement::move(int vm, int dst_host) {
  int src = host_of_vm_[static_cast<std::size_t>(vm)];
  if (src == dst_host) return;
  auto& from = vms_on_host_[static_cast<std::size_t>(src)];
  from.erase(std::find(from.begin(), from.end(), vm));
  auto& to = vms_on_host_[static_cast<std::size_t>(dst_host)];
  to.insert(std::upper_bound(to.begin(), to.end(), vm), vm);
  host_of_vm_[static_cast<std::size_t>(vm)] = dst_host;
}

ClusterState make_cluster(std::shared_ptr<const RequestSet> request, const ClusterConfig& cfg) {
  if (!request || request->profiles.empty())
    throw InvalidSpecError("cluster needs a non-empty request");
  if (cfg.capacity_mhz <= 0.0) throw InvalidSpecError("host capacity must be positive");
  if (cfg.slav_penalty_ratio < 0.0 || cfg.slav_penalty_ratio > 1.0)
    throw InvalidSpecError("slav penalty ratio must lie in [0, 1]");

  const int n = static_cast<int>(request->profiles.size());
  int host_count = cfg.host_count;
  if (host_count <= 0) {
    double target = 0.7 * cfg.capacity_mhz;
    host_count = static_cast<int>(
        std::ceil(static_cast<double>(n) * mean_demand_mhz(*request) / target));
    host_count = std::max(host_count, 1);
  }

  ClusterState state;
  state.request = std::move(request);
  state.slav_penalty_ratio = cfg.slav_penalty_ratio;
  state.hosts.reserve(static_cast<std::size_t>(host_count));
  const double base = cfg.base_power >= 0.0 ? cfg.base_power : 0.3 * cfg.capacity_mhz;
  for (int j = 0; j < host_count; ++j)
    state.hosts.push_back({j, cfg.capacity_mhz, base, cfg.bandwidth_kbps});

  // Initial assignment packs by declared demand: first host that still fits
  // the VM under its capacity, otherwise the host with the least declared
  // load so overcommit spreads evenly.
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  std::vector<double> declared(static_cast<std::size_t>(host_count), 0.0);
  for (int vm = 0; vm < n; ++vm) {
    double d = state.request->profiles[static_cast<std::size_t>(vm)].d_vm_mhz;
    if (d <= 0.0) throw InvariantViolationError("vm " + std::to_string(vm) + ": d_vm must be positive");
    int chosen = -1;
    for (int j = 0; j < host_count; ++j) {
      if (declared[static_cast<std::size_t>(j)] + d <= cfg.capacity_mhz) {
        chosen = j;
        break;
      }
    }
    if (chosen < 0) {
      chosen = 0;
      for (int j = 1; j < host_count; ++j)
        if (declared[static_cast<std::size_t>(j)] < declared[static_cast<std::size_t>(chosen)])
          chosen = j;
    }
    assignment[static_cast<std::size_t>(vm)] = chosen;
    declared[static_cast<std::size_t>(chosen)] += d;
  }
  state.placement = Placement::from_assignment(std::move(assignment), host_count);
  state.history.assign(static_cast<std::size_t>(host_count), {});
  return state;
}

double vm_energy(const VmProfile& vm, int t) {
  if (t < 0 || t >= static_cast<int>(vm.cpu_usage_mhz.size()))
    throw SlotOutOfRangeError(t, static_cast<int>(vm.cpu_usage_mhz.size()));
  return vm.cpu_usage_mhz[static_cast<std::size_t>(t)];
}

double host_load(const ClusterState& state, int j, int t) {
  double sum = 0.0;
  for (int vm : state.placement.vms_on(j)) sum += vm_energy(state.profile(vm), t);
  return sum;
}

int host_overloaded(const ClusterState& state, int j, int t) {
  return host_load(state, j, t) >= state.hosts[static_cast<std::size_t>(j)].capacity_mhz ? 1 : 0;
}

double slot_host_energy(const ClusterState& state, int t) {
  double total = 0.0;
  for (int j = 0; j < state.host_count(); ++j) {
    if (state.placement.vms_on(j).empty()) continue;
    total += state.hosts[static_cast<std::size_t>(j)].base_power + host_load(state, j, t);
  }
  return total;
}

double migration_cost(const ClusterState& state, const MigrationSet& mig, int t) {
  double sum = 0.0;
  for (const MigrationEntry& e : mig.entries) sum += vm_energy(state.profile(e.vm), t);
  return 0.10 * sum;
}

double slav_compensation(const ClusterState& state, int t) {
  double total = 0.0;
  for (int j = 0; j < state.host_count(); ++j) {
    if (!host_overloaded(state, j, t)) continue;
    double demand = 0.0;
    for (int vm : state.placement.vms_on(j)) demand += state.profile(vm).d_vm_mhz;
    total += demand;
  }
  return state.slav_penalty_ratio * total;
}

PlacementProblem build_placement_problem(const ClusterState& state, const MigrationSet& mig) {
  const int t = state.slot;
  PlacementProblem problem;
  problem.hosts.reserve(state.hosts.size());
  for (int j = 0; j < state.host_count(); ++j) {
    const HostSpec& h = state.hosts[static_cast<std::size_t>(j)];
    problem.hosts.push_back({h.capacity_mhz, h.base_power, 0.0,
                             static_cast<int>(state.placement.vms_on(j).size())});
  }
  std::unordered_set<int> migrating;
  for (const MigrationEntry& e : mig.entries) migrating.insert(e.vm);
  for (int j = 0; j < state.host_count(); ++j) {
    double load = 0.0;
    for (int vm : state.placement.vms_on(j))
      if (!migrating.count(vm)) load += vm_energy(state.profile(vm), t);
    problem.hosts[static_cast<std::size_t>(j)].load = load;
    problem.hosts[static_cast<std::size_t>(j)].vm_count -=
        static_cast<int>(std::count_if(state.placement.vms_on(j).begin(),
                                       state.placement.vms_on(j).end(),
                                       [&](int vm) { return migrating.count(vm) != 0; }));
  }
  problem.vms.reserve(mig.entries.size());
  for (const MigrationEntry& e : mig.entries)
    problem.vms.push_back({e.vm, e.source, vm_energy(state.profile(e.vm), t)});
  return problem;
}

namespace {

void check_migration_set(const ClusterState& state, const MigrationSet& mig) {
  std::unordered_set<int> seen;
  for (const MigrationEntry& e : mig.entries) {
    if (e.vm < 0 || e.vm >= state.vm_count())
      throw ConstraintViolationError("unknown vm " + std::to_string(e.vm));
    if (!seen.insert(e.vm).second)
      throw ConstraintViolationError("vm " + std::to_string(e.vm) + " selected twice");
    if (state.placement.host_of(e.vm) != e.source)
      throw ConstraintViolationError("vm " + std::to_string(e.vm) + " is not running on host " +
                                     std::to_string(e.source));
  }
}

}  // namespace

SlotAccounting advance_slot(ClusterState& state, const MigrationSet& mig, Placer& placer) {
  const int t = state.slot;
  if (t >= state.slot_count()) throw SlotOutOfRangeError(t, state.slot_count());
  check_migration_set(state, mig);

  SlotAccounting acct;
  acct.slot = t;

  PlacementProblem problem = build_placement_problem(state, mig);
  std::vector<int> destinations =
      mig.entries.empty() ? std::vector<int>{} : placer.place(problem);

  for (std::size_t i = 0; i < mig.entries.size(); ++i) {
    const MigrationEntry& e = mig.entries[i];
    int dst = destinations[i];
    if (dst < 0 || dst == e.source) {
      ++acct.failed_placements;  // stays on its source, no overhead charged
      continue;
    }
    state.placement.move(e.vm, dst);
    acct.migrations.push_back({e.vm, e.source, dst});
  }
  std::sort(acct.migrations.begin(), acct.migrations.end(),
            [](const SlotAccounting::Move& a, const SlotAccounting::Move& b) { return a.vm < b.vm; });

  const int m = state.host_count();
  acct.chi.resize(static_cast<std::size_t>(m));
  acct.upsilon.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    double load = host_load(state, j, t);
    bool active = !state.placement.vms_on(j).empty();
    acct.chi[static_cast<std::size_t>(j)] = active ? 1 : 0;
    acct.upsilon[static_cast<std::size_t>(j)] =
        load >= state.hosts[static_cast<std::size_t>(j)].capacity_mhz ? 1 : 0;
    if (active) acct.ec_host += state.hosts[static_cast<std::size_t>(j)].base_power + load;
    state.history[static_cast<std::size_t>(j)].push_back(
        load / state.hosts[static_cast<std::size_t>(j)].capacity_mhz);
  }
  double moved_energy = 0.0;
  for (const SlotAccounting::Move& mv : acct.migrations)
    moved_energy += vm_energy(state.profile(mv.vm), t);
  acct.mc = 0.10 * moved_energy;
  acct.slavc = slav_compensation(state, t);
  acct.ec_total = acct.ec_host + acct.mc + acct.slavc;

  state.slot = t + 1;
  return acct;
}

PlacementCheckReport validate_placement_result(const ClusterState& state, const MigrationSet& mig,
                                               const std::vector<int>& destinations) {
  PlacementCheckReport report;
  const int t = state.slot;

  std::vector<double> load(static_cast<std::size_t>(state.host_count()), 0.0);
  for (int j = 0; j < state.host_count(); ++j)
    load[static_cast<std::size_t>(j)] = host_load(state, j, t);

  for (std::size_t i = 0; i < mig.entries.size(); ++i) {
    const MigrationEntry& e = mig.entries[i];
    int dst = i < destinations.size() ? destinations[i] : -1;
    if (dst < 0) {
      report.unassigned.push_back(e.vm);
      continue;
    }
    if (dst == e.source) {
      report.source_destination.push_back(e.vm);
      continue;
    }
    double energy = vm_energy(state.profile(e.vm), t);
    load[static_cast<std::size_t>(e.source)] -= energy;
    load[static_cast<std::size_t>(dst)] += energy;
  }
  for (int j = 0; j < state.host_count(); ++j)
    if (load[static_cast<std::size_t>(j)] >= state.hosts[static_cast<std::size_t>(j)].capacity_mhz)
      report.overloaded_hosts.push_back(j);
  // With destinations keyed to the selection list, untouched VMs cannot
  // move; recorded for the audit trail all the same.
  report.non_migrated_unmoved = true;
  return report;
}

}  // namespace rlvm
