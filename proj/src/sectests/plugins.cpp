#include "iotbed/sectests/plugins.hpp"

#include <algorithm>
#include <map>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::sectests {

using simnet::CaptureRecord;
using simnet::Direction;

std::vector<PortRange> parse_port_ranges(const std::string& spec) {
  std::vector<PortRange> out;
  for (const auto& part : text::split(spec, ',')) {
    std::string p = text::trim(part);
    if (p.empty()) continue;
    auto dash = p.find('-');
    auto lo = text::to_int(text::trim(p.substr(0, dash)));
    auto hi = dash == std::string::npos ? lo : text::to_int(text::trim(p.substr(dash + 1)));
    if (!lo || !hi || *lo < 1 || *hi > 65535 || *lo > *hi) {
      fail(ErrorCode::invalid_argument, "bad port range '" + p + "'");
    }
    out.push_back({static_cast<int>(*lo), static_cast<int>(*hi)});
  }
  if (out.empty()) fail(ErrorCode::invalid_argument, "empty port range");
  return out;
}

namespace {

std::vector<int> scan_ranges(PluginContext& ctx, const std::vector<PortRange>& ranges) {
  std::vector<int> open;
  for (const auto& r : ranges) {
    auto part = port_scan(ctx.transport, ctx.target.address, r.first, r.last);
    open.insert(open.end(), part.begin(), part.end());
  }
  std::sort(open.begin(), open.end());
  open.erase(std::unique(open.begin(), open.end()), open.end());
  return open;
}

std::vector<int> declared_ports(PluginContext& ctx) {
  std::vector<int> out;
  for (const auto& [port, svc] : ctx.net.spec(ctx.target).open_ports) out.push_back(port);
  return out;
}

}  // namespace

PortScanRaw run_port_scan(PluginContext& ctx, const std::vector<PortRange>& ranges, const PortScoreList& list,
                          const RiskThresholds& t) {
  return PortScanRaw{score_ports(scan_ranges(ctx, ranges), list, t)};
}

DetectabilityRaw run_scan_detectability(PluginContext& ctx, const std::vector<PortRange>& ranges,
                                        const std::vector<CaptureRecord>& prior) {
  DetectabilityRaw raw;
  const std::string& addr = ctx.target.address;
  auto cap = ctx.net.start_capture(simnet::CaptureScope::of({addr}));
  raw.open_ports = scan_ranges(ctx, ranges);
  auto sweep = ctx.net.stop_capture(cap);
  auto count = [&](const std::vector<CaptureRecord>& records) {
    for (const auto& r : records) {
      if (r.src_addr == addr) ++raw.device_records;
    }
  };
  count(prior);
  count(sweep);
  raw.attributable = raw.device_records > 0 || !raw.open_ports.empty();
  return raw;
}

FingerprintRaw run_fingerprint(PluginContext& ctx) {
  FingerprintRaw raw;
  const std::string& addr = ctx.target.address;
  for (int port : declared_ports(ctx)) {
    if (!ctx.transport.connect(addr, port)) continue;
    if (auto banner = ctx.transport.request(addr, port, "")) raw.banners.push_back(std::to_string(port) + ": " + *banner);
    auto reply = ctx.transport.request(addr, port, "IDENT");
    if (!reply || !text::starts_with(*reply, "IDENT ")) continue;
    raw.identified = true;
    raw.beacon = reply->substr(6);
    for (const auto& field : text::split(raw.beacon, ';')) {
      auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      std::string key = field.substr(0, eq);
      auto parts = text::split(field.substr(eq + 1), '/');
      if (key == "type") {
        raw.device_type = parts[0];
      } else if (key == "os" && parts.size() >= 3) {
        raw.os_name = parts[0];
        raw.os_version = parts[1];
        raw.os_up_to_date = parts[2] == "ok";
      } else if (key == "app" && parts.size() >= 4) {
        AppFinding app{parts[0], parts[1], parts[2] == "ok", simnet::RiskClass::low};
        if (parts[3] == "major") app.risk_class = simnet::RiskClass::major;
        if (parts[3] == "critical") app.risk_class = simnet::RiskClass::critical;
        raw.apps.push_back(app);
      }
    }
    break;
  }
  return raw;
}

ProcessEnumRaw run_process_enumeration(PluginContext& ctx) {
  ProcessEnumRaw raw;
  raw.channel_present = ctx.net.has_introspection_channel(ctx.target);
  if (!raw.channel_present) return raw;
  for (int port : declared_ports(ctx)) {
    auto reply = ctx.transport.request(ctx.target.address, port, "PS");
    if (reply && text::starts_with(*reply, "PROCS")) {
      raw.remote_without_admin = true;
      break;
    }
  }
  raw.local_without_admin = ctx.net.local_process_list(ctx.target, false).has_value();
  return raw;
}

DataLeakageRaw judge_data_leakage(const std::vector<CaptureRecord>& capture, const std::string& address,
                                  double entropy_threshold, int min_payload) {
  DataLeakageRaw raw;
  for (std::size_t i = 0; i < capture.size(); ++i) {
    const auto& r = capture[i];
    if (r.src_addr != address || r.size <= 0) continue;
    ++raw.records;
    bool large = r.size >= min_payload;
    if (large) ++raw.judged;
    if (!r.payload_marker.empty() || (large && r.payload_entropy < entropy_threshold)) {
      raw.offending.push_back({i, r.payload_entropy, r.size, r.payload_marker});
    }
  }
  return raw;
}

DataLeakageRaw run_data_leakage(PluginContext& ctx, double duration_s) {
  auto cap = ctx.net.start_capture(simnet::CaptureScope::of({ctx.target.address}));
  ctx.net.tick(static_cast<simnet::VirtualTime>(duration_s * simnet::kSecond));
  return judge_data_leakage(ctx.net.stop_capture(cap), ctx.target.address);
}

DataCollectionRaw run_data_collection(PluginContext& ctx) {
  return DataCollectionRaw{ctx.net.inspect_storage(ctx.target)};
}

std::vector<CredentialPair> default_dictionary() {
  return {{"admin", "admin"}, {"admin", "password"}, {"admin", "1234"}, {"root", "root"},
          {"root", "toor"},   {"user", "user"},      {"guest", "guest"}, {"support", "support"}};
}

std::vector<CredentialPair> parse_dictionary(const std::string& content) {
  std::vector<CredentialPair> out;
  int line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(line_no, 1, "expected user:password");
    out.push_back({line.substr(0, colon), line.substr(colon + 1)});
  }
  return out;
}

ManagementRaw run_management_access(PluginContext& ctx, const std::vector<CredentialPair>& dictionary,
                                    const std::set<int>& ports) {
  ManagementRaw raw;
  const std::string& addr = ctx.target.address;
  const auto& spec = ctx.net.spec(ctx.target);
  for (int port : ports) {
    if (!ctx.transport.connect(addr, port)) continue;
    raw.open_ports.push_back(port);
    std::vector<CredentialPair> tries = dictionary;
    if (auto it = spec.open_ports.find(port); it != spec.open_ports.end() && it->second.default_credentials) {
      tries.insert(tries.begin(), {it->second.default_credentials->user, it->second.default_credentials->password});
    }
    for (const auto& cred : tries) {
      ++raw.attempts;
      auto reply = ctx.transport.request(addr, port, "LOGIN " + cred.user + " " + cred.password);
      if (reply && *reply == "OK") {
        raw.accepted.push_back(std::to_string(port) + ":" + cred.user + ":" + cred.password);
        break;
      }
    }
  }
  return raw;
}

DowngradeRaw run_downgrade(PluginContext& ctx) {
  DowngradeRaw raw;
  const auto& spec = ctx.net.spec(ctx.target);
  if (spec.encryption.payload_class != simnet::PayloadClass::encrypted) return raw;
  for (int port : declared_ports(ctx)) {
    auto reply = ctx.transport.request(ctx.target.address, port, "STARTPLAIN");
    if (!reply) continue;
    raw.encrypted_service = true;
    raw.response = *reply;
    if (*reply == "PLAIN-OK") {
      raw.plaintext_established = true;
      break;
    }
  }
  return raw;
}

ReplayRaw replay_session(PluginContext& ctx, int port, const std::vector<CaptureRecord>& session) {
  if (session.empty()) fail(ErrorCode::runtime, "replay: empty recorded session");
  ReplayRaw raw;
  raw.port = port;
  raw.service_present = true;
  raw.session_records = session.size();
  std::string token = std::to_string(session.front().ts) + ":" + std::to_string(session.size());
  auto reply = ctx.transport.request(ctx.target.address, port, "REPLAY " + token);
  raw.accepted = reply && *reply == "ACCEPT";
  return raw;
}

ReplayRaw run_replay(PluginContext& ctx, std::optional<int> port) {
  ReplayRaw raw;
  auto ports = declared_ports(ctx);
  if (port) {
    if (std::find(ports.begin(), ports.end(), *port) == ports.end()) return raw;
    raw.port = *port;
  } else {
    if (ports.empty()) return raw;
    raw.port = ports.front();
  }
  const std::string& addr = ctx.target.address;
  auto cap = ctx.net.start_capture(simnet::CaptureScope::of({addr}));
  ctx.transport.request(addr, raw.port, "PING");
  auto session = ctx.net.stop_capture(cap);
  std::erase_if(session, [&](const CaptureRecord& r) {
    return !((r.src_addr == simnet::kTestbedAddress && r.dst_addr == addr) ||
             (r.src_addr == addr && r.dst_addr == simnet::kTestbedAddress));
  });
  return replay_session(ctx, raw.port, session);
}

namespace {

// Gap between the last device packet of one transaction and the first of
// the next, per source port session.
std::vector<double> transaction_gaps(const std::vector<CaptureRecord>& capture, const std::string& address) {
  std::vector<std::pair<simnet::VirtualTime, simnet::VirtualTime>> sessions;  // first, last
  std::map<int, std::size_t> by_port;
  for (const auto& r : capture) {
    if (r.src_addr != address || r.direction != Direction::from_dut || r.dst_addr == simnet::kTestbedAddress) continue;
    auto it = by_port.find(r.src_port);
    if (it == by_port.end()) {
      by_port[r.src_port] = sessions.size();
      sessions.push_back({r.ts, r.ts});
    } else {
      sessions[it->second].second = r.ts;
    }
  }
  std::vector<double> gaps;
  for (std::size_t i = 1; i < sessions.size(); ++i) {
    gaps.push_back(simnet::to_ms(sessions[i].first - sessions[i - 1].second));
  }
  return gaps;
}

}  // namespace

DelayRaw run_delay(PluginContext& ctx, double delay_ms, int transactions) {
  const std::string& addr = ctx.target.address;
  auto current = ctx.net.proxy_for(addr);
  if (!current) fail(ErrorCode::validation, "delay test requires a proxied device (" + addr + ")");
  const auto& spec = ctx.net.spec(ctx.target);
  DelayRaw raw;
  raw.injected_ms = delay_ms;
  if (!spec.traffic.enabled) return raw;
  simnet::Mutator injected = *current;
  injected.delay_ms = delay_ms;
  auto proxy = *ctx.net.proxy_handle(addr);
  ctx.net.set_mutator(proxy, injected);
  auto cap = ctx.net.start_capture(simnet::CaptureScope::of({addr}));
  double per_tx = spec.timing_max_ms + delay_ms + 1000.0;
  ctx.net.tick(simnet::from_ms(per_tx * (transactions + 1)));
  auto records = ctx.net.stop_capture(cap);
  ctx.net.set_mutator(proxy, *current);
  raw.gaps_ms = transaction_gaps(records, addr);
  // The first gap may straddle the mutator switch.
  if (!raw.gaps_ms.empty()) raw.gaps_ms.erase(raw.gaps_ms.begin());
  if (raw.gaps_ms.size() > static_cast<std::size_t>(transactions)) raw.gaps_ms.resize(transactions);
  return raw;
}

TamperRaw run_tamper(PluginContext& ctx, double rate, int requests) {
  const std::string& addr = ctx.target.address;
  auto current = ctx.net.proxy_for(addr);
  if (!current) fail(ErrorCode::validation, "tamper test requires a proxied device (" + addr + ")");
  TamperRaw raw;
  raw.rate = rate;
  raw.requests = requests;
  simnet::Mutator injected = *current;
  injected.corrupt_rate = rate;
  auto proxy = *ctx.net.proxy_handle(addr);
  ctx.net.set_mutator(proxy, injected);
  int before = ctx.net.anomaly_count(ctx.target);
  auto ports = declared_ports(ctx);
  double acc = 0.0;
  for (int i = 0; i < requests; ++i) {
    // Mirrors the proxy's deterministic schedule so the count is reportable.
    acc += rate;
    if (rate > 0 && acc >= 1.0 - 1e-12) {
      acc -= 1.0;
      ++raw.corrupted;
    }
    if (!ports.empty()) {
      ctx.transport.request(addr, ports[static_cast<std::size_t>(i) % ports.size()], "PING");
    }
    if (!ctx.net.alive(ctx.target)) break;
  }
  if (ctx.net.alive(ctx.target)) ctx.net.tick(5 * simnet::kSecond);
  raw.crashed = !ctx.net.alive(ctx.target);
  raw.new_anomalies = ctx.net.anomaly_count(ctx.target) - before;
  ctx.net.set_mutator(proxy, *current);
  if (raw.crashed) ctx.net.restart_device(ctx.target);
  return raw;
}

KnownVulnRaw match_known_vulns(const simnet::DeviceSpec& spec, const VulnDb& db) {
  KnownVulnRaw raw;
  for (const auto& rec : db.records) {
    auto slash = rec.device_type.find('/');
    std::string type = rec.device_type.substr(0, slash);
    if (type != "*" && type != spec.device_type) continue;
    if (slash == std::string::npos) {
      if (spec.identity.os_version.empty()) continue;
      if (rec.version_range.contains(spec.identity.os_version)) {
        raw.matches.push_back({rec.vuln_id, rec.severity, spec.identity.os_name.empty() ? "os" : spec.identity.os_name,
                               spec.identity.os_version, rec.description});
      }
      continue;
    }
    std::string app = rec.device_type.substr(slash + 1);
    for (const auto& [name, ver] : spec.identity.app_versions) {
      if ((app == "*" || app == name) && rec.version_range.contains(ver.version)) {
        raw.matches.push_back({rec.vuln_id, rec.severity, name, ver.version, rec.description});
      }
    }
  }
  return raw;
}

VulnProbeRaw run_vuln_probe(PluginContext& ctx, const AttackDb& db) {
  VulnProbeRaw raw;
  const auto& spec = ctx.net.spec(ctx.target);
  for (const auto& probe : db.probes) {
    for (const auto& [port, svc] : spec.open_ports) {
      const auto& m = probe.service_match;
      if (m != "*" && m != std::to_string(port) && text::lower(m) != text::lower(svc.protocol)) continue;
      ++raw.probes_run;
      auto reply = ctx.transport.request(ctx.target.address, port, "PROBE " + probe.payload_hex);
      std::string got = reply ? *reply : "<no response>";
      if (got != probe.expected_safe_signature) raw.vulnerable.push_back({probe.probe_id, probe.severity, port, got});
    }
  }
  return raw;
}

}  // namespace iotbed::sectests
