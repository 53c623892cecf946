#pragma once

#include <span>
#include <string>

#include "rlvm/cluster.hpp"

namespace rlvm {

struct EpisodeMetrics {
  double total_ec = 0.0;
  double slatah = 0.0;
  double pdm = 0.0;
  double slav = 0.0;  // slatah * pdm
  long migrations = 0;
  long failed_placements = 0;
  struct PerSlot {
    int slot = 0;
    double ec_host = 0.0, mc = 0.0, slavc = 0.0, ec_total = 0.0;
    int migrations = 0;
    int overloaded_hosts = 0;
    int active_hosts = 0;
  };
  std::vector<PerSlot> per_slot;
};

// Mean over hosts of (slots spent overloaded / slots spent active); hosts
// that were never active contribute 0.
double slatah(std::span<const SlotAccounting> accounting, int host_count);

// Mean over VMs of (migration-degraded CPU / demanded CPU); each migration
// degrades 10% of the VM's draw in the slot it moved.
double pdm(std::span<const SlotAccounting> accounting, const RequestSet& request);

EpisodeMetrics summarize(std::span<const SlotAccounting> accounting, const RequestSet& request,
                         int host_count);

// CSV schemas are fixed; emitting them from one place keeps runs diffable.
inline constexpr const char* kPerSlotCsvHeader =
    "slot,ec_host,mc,slavc,ec_total,migrations,overloaded_hosts,active_hosts";
inline constexpr const char* kSummaryCsvHeader =
    "method,request,total_ec,slatah,pdm,slav,migrations,seed";

std::string per_slot_csv(const EpisodeMetrics& metrics);
std::string summary_csv_row(const std::string& method, const std::string& request,
                            const EpisodeMetrics& metrics, std::uint64_t seed);

}  // namespace rlvm
