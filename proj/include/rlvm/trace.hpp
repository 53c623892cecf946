#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rlvm {

// One sampled row of a Bitbrains-style VM usage trace. Column order:
//   timestamp [ms]; CPU cores; CPU capacity provisioned [MHz];
//   CPU usage [%]; CPU usage [MHz]; memory provisioned [KB];
//   memory usage [KB]; disk read [KB/s]; disk write [KB/s];
//   net rx [KB/s]; net tx [KB/s]
struct TraceRecord {
  std::int64_t timestamp_ms = 0;
  int cpu_cores = 0;
  double cpu_capacity_provisioned = 0.0;  // MHz
  double cpu_usage_pct = 0.0;
  double cpu_usage_mhz = 0.0;
  double mem_provisioned_kb = 0.0;
  double mem_usage_kb = 0.0;
  double disk_read_kbps = 0.0;
  double disk_write_kbps = 0.0;
  double net_rx_kbps = 0.0;
  double net_tx_kbps = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

// Usage noise above provisioned capacity tolerated before a record is
// rejected as corrupt.
inline constexpr double kTraceCapacityTolerance = 0.01;

// One VM's declared demand plus its per-slot usage series.
struct VmProfile {
  std::string vm_id;
  double d_vm_mhz = 0.0;       // initial CPU demand
  double ram_demand_kb = 0.0;  // provisioned memory
  std::vector<double> cpu_usage_mhz;  // one entry per slot
  std::vector<double> ram_usage_kb;   // one entry per slot

  bool operator==(const VmProfile&) const = default;
};

struct RequestSet {
  std::string name;
  double slot_length_s = 300.0;
  int slot_count = 0;
  std::vector<VmProfile> profiles;  // sorted ascending by vm_id

  bool operator==(const RequestSet&) const = default;
};

// Parses one per-VM trace file. `delimiter` of '\0' auto-detects ';' vs ','
// from the header line. The header row is always skipped.
std::vector<TraceRecord> parse_trace_file(const std::filesystem::path& path,
                                          char delimiter = '\0');

// Samples `vm_count` distinct VMs uniformly (seeded, without replacement)
// from the per-VM files in `trace_dir` and cuts a window of `slot_count`
// consecutive samples starting at `window_start`. VMs whose trace cannot
// cover the window are skipped and a replacement is drawn.
RequestSet build_request(const std::filesystem::path& trace_dir, int vm_count,
                         int window_start, std::uint64_t seed,
                         int slot_count = 288, const std::string& name = "request");

enum class SynthPattern { kConstant, kSquareWave, kSinusoidNoise };

struct SynthSpec {
  int vm_count = 0;
  int slot_count = 0;
  SynthPattern pattern = SynthPattern::kConstant;
  double amplitude_mhz = 0.0;
  int period_slots = 24;
  double duty = 0.5;            // square wave: fraction of the period spent high
  double base_mhz = 0.0;        // level between spikes / sinusoid floor
  double d_vm_mhz = 0.0;        // <= 0 defaults to base + amplitude
  double ram_demand_kb = 1048576.0;
  double ram_spread = 0.5;      // per-VM demand drawn from [1-s, 1+s] * ram_demand_kb
  double noise_frac = 0.1;      // sinusoid: gaussian noise stddev as fraction of amplitude
  bool random_phase = false;    // per-VM phase offset in [0, period)
  std::uint64_t seed = 0;
  std::string name = "synth";
  double slot_length_s = 300.0;
};

RequestSet synth_request(const SynthSpec& spec);

// Request file format:
//   # request <name> slots=<n> slot_s=<T>
//   <vm_id>,<d_vm_mhz>,<ram_kb>,<n cpu values>,<n ram values>
std::string serialize_request(const RequestSet& request);
RequestSet parse_request(const std::string& text);
void write_request_file(const RequestSet& request, const std::filesystem::path& path);
RequestSet read_request_file(const std::filesystem::path& path);

// Mean of d_vm over all profiles; used for fleet sizing.
double mean_demand_mhz(const RequestSet& request);

}  // namespace rlvm
