#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iotbed/sectests/grading.hpp"
#include "iotbed/simnet/network.hpp"

namespace iotbed::sectests {

// What a plugin may touch. `transport` is the backend probes go through;
// `net` provides the clock, local channels and proxies.
struct PluginContext {
  simnet::VirtualNetwork& net;
  simnet::Transport& transport;
  simnet::DeviceHandle target;
};

struct PortRange {
  int first = 1;
  int last = 65535;
};

// Parses "80", "1-1024" or "1-100,443".
std::vector<PortRange> parse_port_ranges(const std::string& text);

PortScanRaw run_port_scan(PluginContext& ctx, const std::vector<PortRange>& ranges, const PortScoreList& list,
                          const RiskThresholds& t = {});
// `prior` is traffic already captured for the run (may be empty).
DetectabilityRaw run_scan_detectability(PluginContext& ctx, const std::vector<PortRange>& ranges,
                                        const std::vector<simnet::CaptureRecord>& prior);
FingerprintRaw run_fingerprint(PluginContext& ctx);
ProcessEnumRaw run_process_enumeration(PluginContext& ctx);
// Pure judgement over a capture, counting only records sent by `address`.
DataLeakageRaw judge_data_leakage(const std::vector<simnet::CaptureRecord>& capture, const std::string& address,
                                  double entropy_threshold = 7.0, int min_payload = 256);
// Captures the device's traffic for `duration_s` of virtual time and judges it.
DataLeakageRaw run_data_leakage(PluginContext& ctx, double duration_s);
DataCollectionRaw run_data_collection(PluginContext& ctx);

struct CredentialPair {
  std::string user;
  std::string password;
};
std::vector<CredentialPair> default_dictionary();
std::vector<CredentialPair> parse_dictionary(const std::string& content);  // `user:password` lines

ManagementRaw run_management_access(PluginContext& ctx, const std::vector<CredentialPair>& dictionary,
                                    const std::set<int>& ports = {22, 23});
DowngradeRaw run_downgrade(PluginContext& ctx);
// Records a PING exchange with the service and replays it. A port the
// device does not serve leaves service_present false.
ReplayRaw run_replay(PluginContext& ctx, std::optional<int> port);
// Replays an already recorded session. Throws Error(runtime) when empty.
ReplayRaw replay_session(PluginContext& ctx, int port, const std::vector<simnet::CaptureRecord>& session);
// Requires a proxy on the device (Error(validation) otherwise). Observes
// `transactions` inter-transaction gaps under the injected delay.
DelayRaw run_delay(PluginContext& ctx, double delay_ms, int transactions = 4);
// Requires a proxy on the device. Sends corrupted requests at `rate` and
// lets background traffic run; a crashed device is restarted afterwards.
TamperRaw run_tamper(PluginContext& ctx, double rate, int requests = 20);
KnownVulnRaw match_known_vulns(const simnet::DeviceSpec& spec, const VulnDb& db);
VulnProbeRaw run_vuln_probe(PluginContext& ctx, const AttackDb& db);

}  // namespace iotbed::sectests
