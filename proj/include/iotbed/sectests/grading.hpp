#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iotbed/sectests/databases.hpp"
#include "iotbed/sectests/port_risk.hpp"
#include "iotbed/sectests/verdict.hpp"
#include "iotbed/simnet/device_spec.hpp"

namespace iotbed::sectests {

enum class TestKind {
  port_scan,
  scan_detectability,
  fingerprint,
  process_enumeration,
  data_leakage,
  data_collection,
  management_access,
  downgrade,
  replay,
  delay,
  tamper,
  known_vulns,
  vuln_probe,
};

std::string_view to_string(TestKind k);
std::optional<TestKind> test_kind_from_string(std::string_view s);
const std::vector<TestKind>& all_test_kinds();

// Raw measurements, one struct per plugin.

struct PortScanRaw {
  RiskAssessment assessment;
};

struct DetectabilityRaw {
  bool attributable = false;  // any record or answer traceable to the device
  std::vector<int> open_ports;
  std::size_t device_records = 0;
};

struct AppFinding {
  std::string name;
  std::string version;
  bool up_to_date = true;
  simnet::RiskClass risk_class = simnet::RiskClass::low;
};

struct FingerprintRaw {
  bool identified = false;
  std::string device_type;
  std::string os_name;
  std::string os_version;
  bool os_up_to_date = true;
  std::vector<AppFinding> apps;
  std::vector<std::string> banners;
  std::string beacon;
};

struct ProcessEnumRaw {
  bool channel_present = false;
  bool remote_without_admin = false;
  bool local_without_admin = false;
};

struct LeakRecord {
  std::size_t index = 0;  // position in the capture
  double entropy = 0.0;
  int size = 0;
  std::string marker;
};

struct DataLeakageRaw {
  std::size_t records = 0;    // device-emitted payload-bearing records
  std::size_t judged = 0;     // records large enough for the entropy test
  std::vector<LeakRecord> offending;
};

struct DataCollectionRaw {
  simnet::StoredDataClass stored = simnet::StoredDataClass::none;
};

struct ManagementRaw {
  std::vector<int> open_ports;
  std::vector<std::string> accepted;  // "port:user:password"
  std::size_t attempts = 0;
};

struct DowngradeRaw {
  bool encrypted_service = false;
  bool plaintext_established = false;
  std::string response;
};

struct ReplayRaw {
  std::size_t session_records = 0;
  bool service_present = false;
  bool accepted = false;
  int port = 0;
};

struct DelayRaw {
  double injected_ms = 0.0;
  std::vector<double> gaps_ms;
};

struct TamperRaw {
  double rate = 0.0;
  int requests = 0;
  int corrupted = 0;
  bool crashed = false;
  int new_anomalies = 0;
};

struct VulnMatch {
  std::string vuln_id;
  Severity severity = Severity::low;
  std::string component;
  std::string version;
  std::string description;
};

struct KnownVulnRaw {
  std::vector<VulnMatch> matches;
};

struct ProbeHit {
  std::string probe_id;
  Severity severity = Severity::low;
  int port = 0;
  std::string response;
};

struct VulnProbeRaw {
  int probes_run = 0;
  std::vector<ProbeHit> vulnerable;
};

using RawOutput = std::variant<PortScanRaw, DetectabilityRaw, FingerprintRaw, ProcessEnumRaw, DataLeakageRaw,
                               DataCollectionRaw, ManagementRaw, DowngradeRaw, ReplayRaw, DelayRaw, TamperRaw,
                               KnownVulnRaw, VulnProbeRaw>;

TestKind kind_of(const RawOutput& raw);

// Device/scenario specific success criteria. Only kinds listed in `kinds`
// may be graded.
struct CriteriaConfig {
  std::set<TestKind> kinds;
  RiskThresholds thresholds;
  std::set<int> common_ports{80, 443};
  std::set<int> management_ports{20, 21, 22, 23};
  std::set<int> management_access_ports{22, 23};
  std::optional<std::set<int>> expected_ports;
  double entropy_threshold = 7.0;
  int entropy_min_payload = 256;
  double timing_min_ms = 1000.0;
  double timing_max_ms = 3000.0;

  // Every kind enabled with the default constants.
  static CriteriaConfig defaults();
  // Defaults plus the device's declared expected ports and timing range.
  static CriteriaConfig for_device(const simnet::DeviceSpec& spec);
};

// Pure. Throws Error(validation) when `criteria` lacks the raw output's kind.
Verdict grade(const RawOutput& raw, const CriteriaConfig& criteria);

}  // namespace iotbed::sectests
