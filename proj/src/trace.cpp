#include "rlvm/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rlvm/error.hpp"
#include "rlvm/prng.hpp"
#include "rlvm/util.hpp"

namespace rlvm {

namespace {

constexpr int kTraceColumns = 11;

void validate_record(const TraceRecord& r, std::size_t line) {
  const double fields[] = {r.cpu_capacity_provisioned, r.cpu_usage_pct, r.cpu_usage_mhz,
                           r.mem_provisioned_kb,       r.mem_usage_kb,  r.disk_read_kbps,
                           r.disk_write_kbps,          r.net_rx_kbps,   r.net_tx_kbps};
  for (double f : fields) {
    if (!std::isfinite(f) || f < 0.0)
      throw InvariantViolationError("line " + std::to_string(line) +
                                    ": non-finite or negative usage field");
  }
  if (r.cpu_usage_mhz > r.cpu_capacity_provisioned * (1.0 + kTraceCapacityTolerance))
    throw InvariantViolationError("line " + std::to_string(line) +
                                  ": cpu usage exceeds provisioned capacity");
}

}  // namespace

std::vector<TraceRecord> parse_trace_file(const std::filesystem::path& path, char delimiter) {
  std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::vector<TraceRecord> records;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = trim(line);
    if (lineno == 1) {
      // Header row. It also decides the delimiter when not forced.
      if (delimiter == '\0') delimiter = row.find(';') != std::string_view::npos ? ';' : ',';
      continue;
    }
    if (row.empty()) continue;
    auto fields = split(row, delimiter);
    if (fields.size() != kTraceColumns)
      throw MalformedRowError(lineno, "expected " + std::to_string(kTraceColumns) +
                                          " columns, got " + std::to_string(fields.size()));
    double v[kTraceColumns];
    for (int i = 0; i < kTraceColumns; ++i) {
      auto parsed = parse_double(fields[i]);
      if (!parsed)
        throw MalformedRowError(lineno, "non-numeric field " + std::to_string(i + 1) + ": '" +
                                            std::string(fields[i]) + "'");
      v[i] = *parsed;
    }
    TraceRecord r;
    r.timestamp_ms = static_cast<std::int64_t>(std::llround(v[0]));
    r.cpu_cores = static_cast<int>(std::llround(v[1]));
    r.cpu_capacity_provisioned = v[2];
    r.cpu_usage_pct = v[3];
    r.cpu_usage_mhz = v[4];
    r.mem_provisioned_kb = v[5];
    r.mem_usage_kb = v[6];
    r.disk_read_kbps = v[7];
    r.disk_write_kbps = v[8];
    r.net_rx_kbps = v[9];
    r.net_tx_kbps = v[10];
    validate_record(r, lineno);
    records.push_back(r);
  }
  return records;
}

RequestSet build_request(const std::filesystem::path& trace_dir, int vm_count, int window_start,
                         std::uint64_t seed, int slot_count, const std::string& name) {
  namespace fs = std::filesystem;
  if (vm_count <= 0 || slot_count <= 0 || window_start < 0)
    throw InvalidSpecError("vm_count, slot_count and window_start must be positive");
  if (!fs::is_directory(trace_dir)) throw MissingFileError(trace_dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(trace_dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  // Directory iteration order is platform-dependent; sorting keeps the
  // seeded sample reproducible everywhere.
  std::sort(files.begin(), files.end());
  if (files.size() < static_cast<std::size_t>(vm_count))
    throw InsufficientVmsError(files.size(), static_cast<std::size_t>(vm_count));

  std::vector<std::size_t> order(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Prng rng(seed);
  rng.shuffle(order);

  RequestSet request;
  request.name = name;
  request.slot_length_s = 300.0;
  request.slot_count = slot_count;
  std::string last_skipped;
  for (std::size_t idx : order) {
    if (request.profiles.size() == static_cast<std::size_t>(vm_count)) break;
    const fs::path& file = files[idx];
    std::string vm_id = file.stem().string();
    auto records = parse_trace_file(file);
    if (records.size() < static_cast<std::size_t>(window_start) + slot_count ||
        records.front().cpu_capacity_provisioned <= 0.0) {
      last_skipped = vm_id;
      continue;  // unusable for this window; draw a replacement
    }
    VmProfile p;
    p.vm_id = vm_id;
    p.d_vm_mhz = records.front().cpu_capacity_provisioned;
    p.ram_demand_kb = records.front().mem_provisioned_kb;
    p.cpu_usage_mhz.reserve(slot_count);
    p.ram_usage_kb.reserve(slot_count);
    for (int k = 0; k < slot_count; ++k) {
      const TraceRecord& r = records[static_cast<std::size_t>(window_start) + k];
      p.cpu_usage_mhz.push_back(r.cpu_usage_mhz);
      p.ram_usage_kb.push_back(r.mem_usage_kb);
    }
    request.profiles.push_back(std::move(p));
  }
  if (request.profiles.size() < static_cast<std::size_t>(vm_count))
    throw ShortTraceError(last_skipped.empty() ? "<none>" : last_skipped);

  std::sort(request.profiles.begin(), request.profiles.end(),
            [](const VmProfile& a, const VmProfile& b) { return a.vm_id < b.vm_id; });
  return request;
}

RequestSet synth_request(const SynthSpec& spec) {
  if (spec.vm_count <= 0 || spec.slot_count <= 0)
    throw InvalidSpecError("vm_count and slot_count must be positive");
  if (spec.pattern != SynthPattern::kConstant && spec.period_slots <= 0)
    throw InvalidSpecError("period_slots must be positive");
  if (spec.amplitude_mhz < 0.0 || spec.base_mhz < 0.0)
    throw InvalidSpecError("amplitude and base level must be non-negative");
  const double d_vm = spec.d_vm_mhz > 0.0 ? spec.d_vm_mhz : spec.base_mhz + spec.amplitude_mhz;
  if (d_vm <= 0.0) throw InvalidSpecError("d_vm must be positive");
  if (spec.amplitude_mhz > d_vm) throw InvalidSpecError("amplitude exceeds d_vm");

  int width = 1;
  for (int n = spec.vm_count - 1; n >= 10; n /= 10) ++width;

  Prng master(spec.seed);
  RequestSet request;
  request.name = spec.name;
  request.slot_length_s = spec.slot_length_s;
  request.slot_count = spec.slot_count;
  request.profiles.reserve(spec.vm_count);
  for (int v = 0; v < spec.vm_count; ++v) {
    Prng rng = master.split();
    VmProfile p;
    std::string num = std::to_string(v);
    p.vm_id = "vm" + std::string(width > static_cast<int>(num.size())
                                     ? static_cast<std::size_t>(width) - num.size()
                                     : 0, '0') + num;
    p.d_vm_mhz = d_vm;
    double ram_jitter = spec.ram_spread > 0.0
                            ? 1.0 + spec.ram_spread * (2.0 * rng.next_double() - 1.0)
                            : 1.0;
    p.ram_demand_kb = spec.ram_demand_kb * ram_jitter;
    int phase = spec.random_phase && spec.period_slots > 0
                    ? static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.period_slots)))
                    : 0;
    p.cpu_usage_mhz.resize(spec.slot_count);
    p.ram_usage_kb.assign(spec.slot_count, 0.5 * p.ram_demand_kb);
    for (int t = 0; t < spec.slot_count; ++t) {
      double u = 0.0;
      switch (spec.pattern) {
        case SynthPattern::kConstant:
          u = spec.base_mhz + spec.amplitude_mhz;
          break;
        case SynthPattern::kSquareWave: {
          int pos = (t + phase) % spec.period_slots;
          bool high = pos < static_cast<int>(std::ceil(spec.duty * spec.period_slots - 1e-9));
          u = spec.base_mhz + (high ? spec.amplitude_mhz : 0.0);
          break;
        }
        case SynthPattern::kSinusoidNoise: {
          double angle = 2.0 * std::numbers::pi * (t + phase) / spec.period_slots;
          u = spec.base_mhz + 0.5 * spec.amplitude_mhz * (1.0 + std::sin(angle)) +
              spec.noise_frac * spec.amplitude_mhz * rng.gaussian();
          u = std::clamp(u, 0.0, d_vm);
          break;
        }
      }
      p.cpu_usage_mhz[t] = u;
    }
    request.profiles.push_back(std::move(p));
  }
  return request;
}

std::string serialize_request(const RequestSet& request) {
  std::string out;
  out += "# request " + request.name + " slots=" + std::to_string(request.slot_count) +
         " slot_s=" + fmt_double(request.slot_length_s) + "\n";
  for (const VmProfile& p : request.profiles) {
    out += p.vm_id;
    out += ',' + fmt_double(p.d_vm_mhz);
    out += ',' + fmt_double(p.ram_demand_kb);
    for (double u : p.cpu_usage_mhz) out += ',' + fmt_double(u);
    for (double r : p.ram_usage_kb) out += ',' + fmt_double(r);
    out += '\n';
  }
  return out;
}

RequestSet parse_request(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw MalformedRowError(1, "empty request file");
  std::string_view header = trim(line);
  RequestSet request;
  {
    auto tokens = split(header, ' ');
    if (tokens.size() != 5 || tokens[0] != "#" || tokens[1] != "request" ||
        !tokens[3].starts_with("slots=") || !tokens[4].starts_with("slot_s="))
      throw MalformedRowError(1, "bad request header: '" + std::string(header) + "'");
    request.name = std::string(tokens[2]);
    auto slots = parse_int(tokens[3].substr(6));
    auto slot_s = parse_double(tokens[4].substr(7));
    if (!slots || *slots <= 0 || !slot_s || *slot_s <= 0.0)
      throw MalformedRowError(1, "bad slots/slot_s in request header");
    request.slot_count = static_cast<int>(*slots);
    request.slot_length_s = *slot_s;
  }
  const std::size_t expected = 3 + 2 * static_cast<std::size_t>(request.slot_count);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    auto fields = split(row, ',');
    if (fields.size() != expected)
      throw MalformedRowError(lineno, "expected " + std::to_string(expected) + " fields, got " +
                                          std::to_string(fields.size()));
    VmProfile p;
    p.vm_id = std::string(fields[0]);
    auto d = parse_double(fields[1]);
    auto ram = parse_double(fields[2]);
    if (!d || !ram) throw MalformedRowError(lineno, "non-numeric demand field");
    p.d_vm_mhz = *d;
    p.ram_demand_kb = *ram;
    if (p.d_vm_mhz <= 0.0)
      throw InvariantViolationError("line " + std::to_string(lineno) + ": d_vm must be positive");
    p.cpu_usage_mhz.reserve(request.slot_count);
    p.ram_usage_kb.reserve(request.slot_count);
    for (int k = 0; k < request.slot_count; ++k) {
      auto v = parse_double(fields[3 + k]);
      if (!v) throw MalformedRowError(lineno, "non-numeric cpu value");
      p.cpu_usage_mhz.push_back(*v);
    }
    for (int k = 0; k < request.slot_count; ++k) {
      auto v = parse_double(fields[3 + request.slot_count + k]);
      if (!v) throw MalformedRowError(lineno, "non-numeric ram value");
      p.ram_usage_kb.push_back(*v);
    }
    request.profiles.push_back(std::move(p));
  }
  return request;
}

void write_request_file(const RequestSet& request, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_request(request));
}

RequestSet read_request_file(const std::filesystem::path& path) {
  return parse_request(read_file(path));
}

double mean_demand_mhz(const RequestSet& request) {
  if (request.profiles.empty()) return 0.0;
  double sum = 0.0;
  for (const VmProfile& p : request.profiles) sum += p.d_vm_mhz;
  return sum / static_cast<double>(request.profiles.size());
}

}  // namespace rlvm
