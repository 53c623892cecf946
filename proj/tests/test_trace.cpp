#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "rlvm/error.hpp"
#include "rlvm/prng.hpp"
#include "rlvm/trace.hpp"
#include "rlvm/util.hpp"

using namespace rlvm;
namespace fs = std::filesystem;

namespace {

const char* kHeader =
    "Timestamp [ms];CPU cores;CPU capacity provisioned [MHZ];CPU usage [%];CPU usage [MHZ];"
    "Memory capacity provisioned [KB];Memory usage [KB];Disk read throughput [KB/s];"
    "Disk write throughput [KB/s];Network received throughput [KB/s];"
    "Network transmitted throughput [KB/s]\n";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rlvm_trace_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

// Synthetic per-VM trace: capacity 4000 MHz, usage varies with the sample
// index so windows are distinguishable.
std::string make_trace(int samples, double capacity = 4000.0) {
  std::string text = kHeader;
  for (int i = 0; i < samples; ++i) {
    text += std::to_string(1376322046 + 300000LL * i) + ";4;" + fmt_double(capacity) + ";0.5;" +
            fmt_double(100.0 + i) + ";1048576;524288;0.0;0.0;1.0;1.0\n";
  }
  return text;
}

}  // namespace

TEST_CASE("trace row from the reference record parses field by field") {
  TempDir dir;
  write_text(dir.path / "101.csv",
             std::string(kHeader) +
                 "1376322046;4;11703.99824;0.55;64.37199032;6.7108864E7;0.0;0.0;1.4;0.0;1.0\n");
  auto records = parse_trace_file(dir.path / "101.csv");
  REQUIRE(records.size() == 1);
  const TraceRecord& r = records[0];
  CHECK(r.timestamp_ms == 1376322046);
  CHECK(r.cpu_cores == 4);
  CHECK(r.cpu_capacity_provisioned == 11703.99824);
  CHECK(r.cpu_usage_pct == 0.55);
  CHECK(r.cpu_usage_mhz == 64.37199032);
  CHECK(r.mem_provisioned_kb == 6.7108864e7);
  CHECK(r.mem_usage_kb == 0.0);
  CHECK(r.disk_read_kbps == 0.0);
  CHECK(r.disk_write_kbps == 1.4);
  CHECK(r.net_rx_kbps == 0.0);
  CHECK(r.net_tx_kbps == 1.0);
}

TEST_CASE("header-only file yields an empty list") {
  TempDir dir;
  write_text(dir.path / "empty.csv", kHeader);
  CHECK(parse_trace_file(dir.path / "empty.csv").empty());
}

TEST_CASE("wrong column count is a malformed row") {
  TempDir dir;
  write_text(dir.path / "bad.csv",
             std::string(kHeader) + "1376322046;4;11703.99;0.55;64.37;6.7E7;0.0;0.0;1.4;0.0\n");
  CHECK_THROWS_AS(parse_trace_file(dir.path / "bad.csv"), MalformedRowError);
}

TEST_CASE("non-numeric field is a malformed row with its line number") {
  TempDir dir;
  write_text(dir.path / "bad.csv",
             std::string(kHeader) + "1;4;100;0.5;oops;1000;0;0;0;0;0\n");
  try {
    parse_trace_file(dir.path / "bad.csv");
    FAIL("expected MalformedRowError");
  } catch (const MalformedRowError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("usage above provisioned capacity is rejected") {
  TempDir dir;
  write_text(dir.path / "bad.csv",
             std::string(kHeader) + "1;4;100;99;102;1000;0;0;0;0;0\n");
  CHECK_THROWS_AS(parse_trace_file(dir.path / "bad.csv"), InvariantViolationError);
  // One percent of headroom is trace noise, not corruption.
  write_text(dir.path / "ok.csv", std::string(kHeader) + "1;4;100;99;100.9;1000;0;0;0;0;0\n");
  CHECK(parse_trace_file(dir.path / "ok.csv").size() == 1);
}

TEST_CASE("negative usage fields are rejected") {
  TempDir dir;
  write_text(dir.path / "bad.csv", std::string(kHeader) + "1;4;100;0.5;-3;1000;0;0;0;0;0\n");
  CHECK_THROWS_AS(parse_trace_file(dir.path / "bad.csv"), InvariantViolationError);
}

TEST_CASE("comma-delimited traces are accepted") {
  TempDir dir;
  write_text(dir.path / "c.csv", "ts,cores,cap,pct,mhz,memcap,mem,dr,dw,rx,tx\n"
                                 "1,4,100,0.5,50,1000,0,0,0,0,0\n");
  auto records = parse_trace_file(dir.path / "c.csv");
  REQUIRE(records.size() == 1);
  CHECK(records[0].cpu_usage_mhz == 50.0);
}

TEST_CASE("missing file reports as such") {
  CHECK_THROWS_AS(parse_trace_file("/nonexistent/vm.csv"), MissingFileError);
}

TEST_CASE("build_request samples the requested shapes") {
  TempDir dir;
  const int files = 12;
  for (int i = 0; i < files; ++i)
    write_text(dir.path / (std::string("vm") + (i < 10 ? "0" : "") + std::to_string(i) + ".csv"),
               make_trace(20));
  RequestSet r = build_request(dir.path, 10, 3, 99, 16, "shape");
  CHECK(r.profiles.size() == 10);
  CHECK(r.slot_count == 16);
  CHECK(r.slot_length_s == 300.0);
  for (const VmProfile& p : r.profiles) {
    CHECK(p.cpu_usage_mhz.size() == 16);
    CHECK(p.ram_usage_kb.size() == 16);
    CHECK(p.d_vm_mhz == 4000.0);
    // window starts at sample 3 -> usage 103
    CHECK(p.cpu_usage_mhz[0] == 103.0);
  }
  CHECK(std::is_sorted(r.profiles.begin(), r.profiles.end(),
                       [](const VmProfile& a, const VmProfile& b) { return a.vm_id < b.vm_id; }));
}

TEST_CASE("build_request is deterministic for a fixed seed") {
  TempDir dir;
  for (int i = 0; i < 8; ++i)
    write_text(dir.path / ("vm" + std::to_string(i) + ".csv"), make_trace(12));
  RequestSet a = build_request(dir.path, 5, 0, 1234, 10);
  RequestSet b = build_request(dir.path, 5, 0, 1234, 10);
  CHECK(a == b);
  CHECK(serialize_request(a) == serialize_request(b));
  RequestSet c = build_request(dir.path, 5, 0, 1235, 10);
  CHECK(a.profiles.size() == c.profiles.size());
}

TEST_CASE("short traces are replaced, and exhaustion reports the failure") {
  TempDir dir;
  write_text(dir.path / "vm0.csv", make_trace(4));   // too short for 10 slots
  write_text(dir.path / "vm1.csv", make_trace(12));
  write_text(dir.path / "vm2.csv", make_trace(12));
  RequestSet r = build_request(dir.path, 2, 0, 7, 10);
  CHECK(r.profiles.size() == 2);
  for (const VmProfile& p : r.profiles) CHECK(p.vm_id != "vm0");
  CHECK_THROWS_AS(build_request(dir.path, 3, 0, 7, 10), ShortTraceError);
  CHECK_THROWS_AS(build_request(dir.path, 4, 0, 7, 10), InsufficientVmsError);
}

TEST_CASE("constant pattern is exactly flat") {
  SynthSpec spec;
  spec.vm_count = 1;
  spec.slot_count = 4;
  spec.pattern = SynthPattern::kConstant;
  spec.amplitude_mhz = 500.0;
  spec.seed = 1;
  RequestSet r = synth_request(spec);
  CHECK(r.profiles[0].cpu_usage_mhz == std::vector<double>{500.0, 500.0, 500.0, 500.0});
}

TEST_CASE("square wave alternates from the high phase") {
  SynthSpec spec;
  spec.vm_count = 1;
  spec.slot_count = 6;
  spec.pattern = SynthPattern::kSquareWave;
  spec.amplitude_mhz = 1000.0;
  spec.period_slots = 2;
  spec.seed = 1;
  RequestSet r = synth_request(spec);
  CHECK(r.profiles[0].cpu_usage_mhz ==
        std::vector<double>{1000.0, 0.0, 1000.0, 0.0, 1000.0, 0.0});
}

TEST_CASE("sinusoid with a fixed seed reproduces exactly") {
  SynthSpec spec;
  spec.vm_count = 3;
  spec.slot_count = 32;
  spec.pattern = SynthPattern::kSinusoidNoise;
  spec.amplitude_mhz = 800.0;
  spec.period_slots = 8;
  spec.seed = 42;
  RequestSet a = synth_request(spec);
  RequestSet b = synth_request(spec);
  CHECK(a == b);
}

TEST_CASE("invalid synth specs are rejected") {
  SynthSpec spec;
  spec.vm_count = 0;
  spec.slot_count = 4;
  spec.amplitude_mhz = 1.0;
  CHECK_THROWS_AS(synth_request(spec), InvalidSpecError);
  spec.vm_count = 2;
  spec.slot_count = -1;
  CHECK_THROWS_AS(synth_request(spec), InvalidSpecError);
  spec.slot_count = 4;
  spec.amplitude_mhz = 100.0;
  spec.d_vm_mhz = 50.0;  // amplitude above declared demand
  CHECK_THROWS_AS(synth_request(spec), InvalidSpecError);
}

TEST_CASE("request files round-trip exactly over random synth specs") {
  Prng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    SynthSpec spec;
    spec.vm_count = 1 + static_cast<int>(rng.uniform_int(6));
    spec.slot_count = 1 + static_cast<int>(rng.uniform_int(12));
    spec.pattern = static_cast<SynthPattern>(rng.uniform_int(3));
    spec.amplitude_mhz = 100.0 + 1000.0 * rng.next_double();
    spec.period_slots = 1 + static_cast<int>(rng.uniform_int(8));
    spec.duty = 0.1 + 0.8 * rng.next_double();
    spec.base_mhz = 50.0 * rng.next_double();
    spec.random_phase = rng.uniform_int(2) == 1;
    spec.seed = rng.next_u64();
    RequestSet r = synth_request(spec);
    RequestSet back = parse_request(serialize_request(r));
    CHECK(back == r);

    // Profile invariants hold for every generated VM.
    for (const VmProfile& p : r.profiles) {
      CHECK(p.d_vm_mhz > 0.0);
      CHECK(p.cpu_usage_mhz.size() == static_cast<std::size_t>(spec.slot_count));
      CHECK(p.ram_usage_kb.size() == static_cast<std::size_t>(spec.slot_count));
      for (double u : p.cpu_usage_mhz) {
        CHECK(u >= 0.0);
        CHECK(u <= p.d_vm_mhz * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("request files round-trip through disk") {
  TempDir dir;
  SynthSpec spec;
  spec.vm_count = 4;
  spec.slot_count = 8;
  spec.pattern = SynthPattern::kSinusoidNoise;
  spec.amplitude_mhz = 640.0;
  spec.period_slots = 4;
  spec.seed = 5;
  RequestSet r = synth_request(spec);
  write_request_file(r, dir.path / "a.request");
  CHECK(read_request_file(dir.path / "a.request") == r);
}

TEST_CASE("malformed request files are rejected") {
  CHECK_THROWS_AS(parse_request(""), MalformedRowError);
  CHECK_THROWS_AS(parse_request("# request x slots=2 slot_s=300\nvm0,100,10,1,2\n"),
                  MalformedRowError);  // wrong field count
  CHECK_THROWS_AS(parse_request("# nope\n"), MalformedRowError);
}
