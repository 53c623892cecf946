#include "rlvm/metrics.hpp"

#include "rlvm/util.hpp"

namespace rlvm {

double slatah(std::span<const SlotAccounting> accounting, int host_count) {
  if (host_count <= 0) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < host_count; ++j) {
    long active = 0, overloaded = 0;
    for (const SlotAccounting& slot : accounting) {
      if (slot.chi[static_cast<std::size_t>(j)]) ++active;
      if (slot.upsilon[static_cast<std::size_t>(j)]) ++overloaded;
    }
    if (active > 0) sum += static_cast<double>(overloaded) / static_cast<double>(active);
  }
  return sum / static_cast<double>(host_count);
}

double pdm(std::span<const SlotAccounting> accounting, const RequestSet& request) {
  const std::size_t n = request.profiles.size();
  if (n == 0) return 0.0;
  std::vector<double> degraded(n, 0.0);
  for (const SlotAccounting& slot : accounting)
    for (const SlotAccounting::Move& mv : slot.migrations)
      degraded[static_cast<std::size_t>(mv.vm)] +=
          0.10 * request.profiles[static_cast<std::size_t>(mv.vm)]
                     .cpu_usage_mhz[static_cast<std::size_t>(slot.slot)];
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double demanded = request.profiles[i].d_vm_mhz * static_cast<double>(request.slot_count);
    if (demanded > 0.0) sum += degraded[i] / demanded;
  }
  return sum / static_cast<double>(n);
}

EpisodeMetrics summarize(std::span<const SlotAccounting> accounting, const RequestSet& request,
                         int host_count) {
  EpisodeMetrics m;
  m.per_slot.reserve(accounting.size());
  for (const SlotAccounting& slot : accounting) {
    EpisodeMetrics::PerSlot row;
    row.slot = slot.slot;
    row.ec_host = slot.ec_host;
    row.mc = slot.mc;
    row.slavc = slot.slavc;
    row.ec_total = slot.ec_total;
    row.migrations = static_cast<int>(slot.migrations.size());
    for (std::uint8_t u : slot.upsilon) row.overloaded_hosts += u;
    for (std::uint8_t c : slot.chi) row.active_hosts += c;
    m.per_slot.push_back(row);
    m.total_ec += slot.ec_total;
    m.migrations += static_cast<long>(slot.migrations.size());
    m.failed_placements += slot.failed_placements;
  }
  m.slatah = slatah(accounting, host_count);
  m.pdm = pdm(accounting, request);
  m.slav = m.slatah * m.pdm;
  return m;
}

std::string per_slot_csv(const EpisodeMetrics& metrics) {
  std::string out = kPerSlotCsvHeader;
  out += '\n';
  for (const auto& row : metrics.per_slot) {
    out += std::to_string(row.slot);
    out += ',' + fmt_double(row.ec_host);
    out += ',' + fmt_double(row.mc);
    out += ',' + fmt_double(row.slavc);
    out += ',' + fmt_double(row.ec_total);
    out += ',' + std::to_string(row.migrations);
    out += ',' + std::to_string(row.overloaded_hosts);
    out += ',' + std::to_string(row.active_hosts);
    out += '\n';
  }
  return out;
}

std::string summary_csv_row(const std::string& method, const std::string& request,
                            const EpisodeMetrics& metrics, std::uint64_t seed) {
  std::string out = method;
  out += ',' + request;
  out += ',' + fmt_double(metrics.total_ec);
  out += ',' + fmt_double(metrics.slatah);
  out += ',' + fmt_double(metrics.pdm);
  out += ',' + fmt_double(metrics.slav);
  out += ',' + std::to_string(metrics.migrations);
  out += ',' + std::to_string(seed);
  return out;
}

}  // namespace rlvm
