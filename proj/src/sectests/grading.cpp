#include "iotbed/sectests/grading.hpp"

#include <algorithm>
#include <array>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::sectests {

namespace {

constexpr std::array<std::pair<TestKind, std::string_view>, 13> kKindNames{{
    {TestKind::port_scan, "port_scan"},
    {TestKind::scan_detectability, "scan_detectability"},
    {TestKind::fingerprint, "fingerprint"},
    {TestKind::process_enumeration, "process_enumeration"},
    {TestKind::data_leakage, "data_leakage"},
    {TestKind::data_collection, "data_collection"},
    {TestKind::management_access, "management_access"},
    {TestKind::downgrade, "downgrade"},
    {TestKind::replay, "replay"},
    {TestKind::delay, "delay"},
    {TestKind::tamper, "tamper"},
    {TestKind::known_vulns, "known_vulns"},
    {TestKind::vuln_probe, "vuln_probe"},
}};

std::string ports_text(const std::vector<int>& ports) {
  if (ports.empty()) return "none";
  std::vector<std::string> s;
  for (int p : ports) s.push_back(std::to_string(p));
  return text::join(s, ",");
}

Grade risk_tier(simnet::RiskClass r) {
  switch (r) {
    case simnet::RiskClass::low: return Grade::MINOR_RISK;
    case simnet::RiskClass::major: return Grade::MAJOR_RISK;
    case simnet::RiskClass::critical: return Grade::CRITICAL_RISK;
  }
  return Grade::MINOR_RISK;
}

Verdict make(Grade g, std::string detail) { return Verdict{"", g, std::move(detail), {}}; }

Verdict grade_one(const PortScanRaw& r, const CriteriaConfig& c) {
  const auto& a = r.assessment;
  Grade g = risk_level_for(a.total_score, c.thresholds);
  std::vector<std::string> scored;
  for (const auto& s : a.scored) scored.push_back(std::to_string(s.port) + "=" + text::format_double(s.score));
  return make(g, "open ports: " + ports_text(a.open_ports) + "; scored: " +
                     (scored.empty() ? std::string("none") : text::join(scored, ",")) +
                     "; total: " + text::format_double(a.total_score));
}

Verdict grade_one(const DetectabilityRaw& r, const CriteriaConfig& c) {
  if (!r.attributable) return make(Grade::UNDETECTABLE, "no response or traffic attributable to the device");
  std::string ev = "device records: " + std::to_string(r.device_records) + "; open ports: " + ports_text(r.open_ports);
  if (r.open_ports.empty()) return make(Grade::SAFE, ev);
  if (c.expected_ports) {
    std::vector<int> extra;
    for (int p : r.open_ports) {
      if (!c.expected_ports->count(p)) extra.push_back(p);
    }
    if (!extra.empty()) return make(Grade::CRITICAL_RISK, ev + "; outside expected set: " + ports_text(extra));
  }
  std::vector<int> mgmt, uncommon;
  for (int p : r.open_ports) {
    if (c.management_ports.count(p)) mgmt.push_back(p);
    if (!c.common_ports.count(p)) uncommon.push_back(p);
  }
  if (!mgmt.empty()) return make(Grade::MAJOR_RISK, ev + "; management/transfer ports: " + ports_text(mgmt));
  if (!uncommon.empty()) return make(Grade::MAJOR_RISK, ev + "; uncommon ports: " + ports_text(uncommon));
  return make(Grade::MINOR_RISK, ev + "; only common ports");
}

Verdict grade_one(const FingerprintRaw& r, const CriteriaConfig&) {
  if (!r.identified) {
    std::string d = "no identity beacon";
    if (!r.banners.empty()) d += "; banners: " + text::join(r.banners, " | ");
    return make(Grade::UNIDENTIFIABLE, d);
  }
  std::string ev = "beacon: " + r.beacon;
  if (!r.os_name.empty() && !r.os_up_to_date) {
    return make(Grade::CRITICAL_RISK, ev + "; out-of-date OS " + r.os_name + " " + r.os_version);
  }
  Grade g = Grade::SAFE;
  std::vector<std::string> outdated;
  for (const auto& app : r.apps) {
    if (app.up_to_date) continue;
    outdated.push_back(app.name + " " + app.version);
    Grade t = risk_tier(app.risk_class);
    if (severity(t) > severity(g)) g = t;
  }
  if (outdated.empty()) return make(Grade::SAFE, ev + "; all versions up to date");
  return make(g, ev + "; out-of-date: " + text::join(outdated, ", "));
}

Verdict grade_one(const ProcessEnumRaw& r, const CriteriaConfig&) {
  if (!r.channel_present) return make(Grade::INDETERMINATE, "no introspection channel");
  if (r.remote_without_admin) return make(Grade::FAIL, "process list extracted remotely without admin");
  if (r.local_without_admin) return make(Grade::MODERATE_RISK, "process list extracted on the device without admin");
  return make(Grade::SAFE, "process list refused without admin privileges");
}

Verdict grade_one(const DataLeakageRaw& r, const CriteriaConfig& c) {
  if (r.records == 0) return make(Grade::INDETERMINATE, "empty capture");
  if (r.offending.empty() && r.judged == 0) {
    return make(Grade::INDETERMINATE, "no payload of at least " + std::to_string(c.entropy_min_payload) + " bytes");
  }
  if (r.offending.empty()) {
    return make(Grade::PASS, std::to_string(r.judged) + " payloads judged, all >= " +
                                 text::format_double(c.entropy_threshold) + " bits/byte, no markers");
  }
  std::vector<std::string> cited;
  for (std::size_t i = 0; i < r.offending.size() && i < 5; ++i) {
    const auto& o = r.offending[i];
    std::string s = "#" + std::to_string(o.index) + " size=" + std::to_string(o.size) +
                    " entropy=" + text::format_fixed(o.entropy, 3);
    if (!o.marker.empty()) s += " marker=" + o.marker;
    cited.push_back(s);
  }
  return make(Grade::FAIL, std::to_string(r.offending.size()) + " offending records: " + text::join(cited, "; "));
}

Verdict grade_one(const DataCollectionRaw& r, const CriteriaConfig&) {
  std::string ev = "stored data class: " + std::string(simnet::to_string(r.stored));
  switch (r.stored) {
    case simnet::StoredDataClass::none: return make(Grade::SAFE, ev);
    case simnet::StoredDataClass::normal: return make(Grade::MINOR_RISK, ev);
    case simnet::StoredDataClass::sensitive: return make(Grade::MAJOR_RISK, ev);
    case simnet::StoredDataClass::critical: return make(Grade::CRITICAL_RISK, ev);
  }
  return make(Grade::INDETERMINATE, ev);
}

Verdict grade_one(const ManagementRaw& r, const CriteriaConfig& c) {
  std::vector<std::string> checked;
  for (int p : c.management_access_ports) checked.push_back(std::to_string(p));
  if (r.open_ports.empty()) return make(Grade::PASS, "management ports " + text::join(checked, ",") + " closed");
  std::string d = "open management ports: " + ports_text(r.open_ports) + "; " + std::to_string(r.attempts) +
                  " login attempts; ";
  d += r.accepted.empty() ? "all logins refused" : "accepted credentials: " + text::join(r.accepted, ", ");
  return make(Grade::FAIL, d);
}

Verdict grade_one(const DowngradeRaw& r, const CriteriaConfig&) {
  if (!r.encrypted_service) return make(Grade::INDETERMINATE, "no encrypted service");
  if (r.plaintext_established) return make(Grade::FAIL, "plaintext session established: " + r.response);
  return make(Grade::PASS, "downgrade refused: " + r.response);
}

Verdict grade_one(const ReplayRaw& r, const CriteriaConfig&) {
  if (!r.service_present) return make(Grade::INDETERMINATE, "no service to replay against");
  std::string ev = "replayed " + std::to_string(r.session_records) + "-record session on port " + std::to_string(r.port);
  if (r.accepted) return make(Grade::FAIL, ev + "; replay accepted");
  return make(Grade::PASS, ev + "; replay rejected");
}

Verdict grade_one(const DelayRaw& r, const CriteriaConfig& c) {
  if (r.gaps_ms.empty()) return make(Grade::INDETERMINATE, "no transactions observed");
  double worst = *std::max_element(r.gaps_ms.begin(), r.gaps_ms.end());
  std::string ev = "injected " + text::format_double(r.injected_ms) + " ms; " + std::to_string(r.gaps_ms.size()) +
                   " gaps, max " + text::format_fixed(worst, 1) + " ms; normal range [" +
                   text::format_double(c.timing_min_ms) + ", " + text::format_double(c.timing_max_ms) + "]";
  if (worst > c.timing_max_ms) return make(Grade::UNSAFE, ev);
  return make(Grade::SAFE, ev);
}

Verdict grade_one(const TamperRaw& r, const CriteriaConfig&) {
  std::string ev = "rate " + text::format_double(r.rate) + "; " + std::to_string(r.corrupted) + "/" +
                   std::to_string(r.requests) + " requests corrupted";
  if (r.crashed) return make(Grade::UNSAFE, ev + "; device crashed");
  if (r.new_anomalies > 0) return make(Grade::UNSAFE, ev + "; " + std::to_string(r.new_anomalies) + " anomalous reactions");
  return make(Grade::SAFE, ev + "; device kept responding and ignored corrupted data");
}

Verdict grade_one(const KnownVulnRaw& r, const CriteriaConfig&) {
  if (r.matches.empty()) return make(Grade::SAFE, "no relevant vulnerabilities");
  bool serious = false;
  std::vector<std::string> ids;
  for (const auto& m : r.matches) {
    serious = serious || m.severity != Severity::low;
    ids.push_back(m.vuln_id + " (" + std::string(to_string(m.severity)) + ", " + m.component + " " + m.version + ")");
  }
  return make(serious ? Grade::UNSAFE : Grade::MINOR_RISK, "matches: " + text::join(ids, "; "));
}

Verdict grade_one(const VulnProbeRaw& r, const CriteriaConfig&) {
  if (r.vulnerable.empty()) {
    return make(Grade::SAFE, std::to_string(r.probes_run) + " probes run, all responses matched safe signatures");
  }
  bool serious = false;
  std::vector<std::string> hits;
  for (const auto& h : r.vulnerable) {
    serious = serious || h.severity != Severity::low;
    hits.push_back(h.probe_id + "@" + std::to_string(h.port) + " (" + std::string(to_string(h.severity)) + "): " +
                   h.response);
  }
  return make(serious ? Grade::UNSAFE : Grade::MINOR_RISK,
              std::to_string(r.probes_run) + " probes run; vulnerable: " + text::join(hits, "; "));
}

}  // namespace

std::string_view to_string(TestKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "port_scan";
}

std::optional<TestKind> test_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

const std::vector<TestKind>& all_test_kinds() {
  static const std::vector<TestKind> kinds = [] {
    std::vector<TestKind> v;
    for (const auto& [kind, name] : kKindNames) v.push_back(kind);
    return v;
  }();
  return kinds;
}

TestKind kind_of(const RawOutput& raw) {
  return all_test_kinds()[raw.index()];
}

CriteriaConfig CriteriaConfig::defaults() {
  CriteriaConfig c;
  for (TestKind k : all_test_kinds()) c.kinds.insert(k);
  return c;
}

CriteriaConfig CriteriaConfig::for_device(const simnet::DeviceSpec& spec) {
  CriteriaConfig c = defaults();
  c.expected_ports = spec.expected_ports;
  c.timing_min_ms = spec.timing_min_ms;
  c.timing_max_ms = spec.timing_max_ms;
  return c;
}

Verdict grade(const RawOutput& raw, const CriteriaConfig& criteria) {
  TestKind k = kind_of(raw);
  if (!criteria.kinds.count(k)) {
    fail(ErrorCode::validation, "no success criteria defined for test kind '" + std::string(to_string(k)) + "'");
  }
  Verdict v = std::visit([&](const auto& r) { return grade_one(r, criteria); }, raw);
  v.test_name = std::string(to_string(k));
  return v;
}

}  // namespace iotbed::sectests
