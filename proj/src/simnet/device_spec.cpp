#include "iotbed/simnet/device_spec.hpp"

#include <json.hpp>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::simnet {

using nlohmann::json;

namespace {

template <typename Enum, std::size_t N>
Enum enum_from(const std::string& s, const std::pair<Enum, std::string_view> (&table)[N],
               const char* what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  fail(ErrorCode::validation, std::string("invalid ") + what + " '" + s + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [e, name] : table) {
    if (e == v) return name;
  }
  return "?";
}

constexpr std::pair<RiskClass, std::string_view> kRisk[] = {
    {RiskClass::low, "low"}, {RiskClass::major, "major"}, {RiskClass::critical, "critical"}};
constexpr std::pair<PayloadClass, std::string_view> kPayload[] = {
    {PayloadClass::plaintext, "plaintext"}, {PayloadClass::encrypted, "encrypted"}};
constexpr std::pair<IntrospectionPolicy, std::string_view> kIntro[] = {
    {IntrospectionPolicy::absent, "absent"},
    {IntrospectionPolicy::none, "none"},
    {IntrospectionPolicy::local, "local"},
    {IntrospectionPolicy::remote_blocked, "remote_blocked"}};
constexpr std::pair<StoredDataClass, std::string_view> kStored[] = {
    {StoredDataClass::none, "none"},
    {StoredDataClass::normal, "normal"},
    {StoredDataClass::sensitive, "sensitive"},
    {StoredDataClass::critical, "critical"}};

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!obj.is_object()) fail(ErrorCode::validation, std::string(where) + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == it.key();
    if (!ok) fail(ErrorCode::validation, std::string("unknown key '") + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

ContextPredicate parse_predicate(const json& j) {
  check_keys(j, {"center", "radius_m", "time_window_s"}, "trigger");
  ContextPredicate p;
  if (j.contains("center")) {
    auto c = j.at("center");
    if (!c.is_array() || c.size() != 2) fail(ErrorCode::validation, "trigger center must be [lat, lon]");
    p.center = GeoPoint{c[0].get<double>(), c[1].get<double>()};
  }
  read(j, "radius_m", p.radius_m);
  if (j.contains("time_window_s")) {
    auto w = j.at("time_window_s");
    if (!w.is_array() || w.size() != 2) fail(ErrorCode::validation, "time_window_s must be [start, end]");
    p.time_window = std::make_pair(static_cast<VirtualTime>(w[0].get<double>() * kSecond),
                                   static_cast<VirtualTime>(w[1].get<double>() * kSecond));
  }
  return p;
}

}  // namespace

std::string_view to_string(RiskClass r) { return enum_name(r, kRisk); }
std::string_view to_string(PayloadClass p) { return enum_name(p, kPayload); }
std::string_view to_string(IntrospectionPolicy p) { return enum_name(p, kIntro); }
std::string_view to_string(StoredDataClass s) { return enum_name(s, kStored); }

void DeviceSpec::validate() const {
  if (device_type.empty()) fail(ErrorCode::validation, "device_type is empty");
  for (const auto& [port, svc] : open_ports) {
    if (port < 1 || port > 65535) fail(ErrorCode::validation, "port out of range: " + std::to_string(port));
    if (svc.banner.empty()) fail(ErrorCode::validation, "empty banner on port " + std::to_string(port));
  }
  if (timing_min_ms < 0 || timing_min_ms > timing_max_ms) {
    fail(ErrorCode::validation, "timing_normal_range must satisfy 0 <= min <= max");
  }
  if (traffic.size_stddev < 0 || traffic.interarrival_stddev_ms < 0 || traffic.size_mean < 0 ||
      traffic.interarrival_mean_ms < 0) {
    fail(ErrorCode::validation, "traffic distributions need non-negative mean and stddev");
  }
  if (traffic.enabled && traffic.packets_per_session < 1) {
    fail(ErrorCode::validation, "packets_per_session must be >= 1");
  }
  if (traffic.ttl < 1 || traffic.ttl > 255) fail(ErrorCode::validation, "ttl out of range");
  if (!(telemetry.period_ms > 0)) fail(ErrorCode::validation, "telemetry period must be positive");
  if (compromise) {
    compromise->trigger.validate();
    if (compromise->ports.empty()) fail(ErrorCode::validation, "compromise needs at least one port");
    if (!(compromise->probe_interval_ms > 0)) fail(ErrorCode::validation, "probe interval must be positive");
  }
  for (const auto& b : benign_bursts) {
    if (b.at_s < 0 || b.packets < 1 || !(b.interval_ms > 0)) {
      fail(ErrorCode::validation, "invalid benign burst");
    }
  }
}

DeviceSpec parse_device_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, std::string("device spec: ") + e.what());
  }
  DeviceSpec s;
  try {
    check_keys(j,
               {"device_type", "address", "connectivity", "open_ports", "expected_ports", "identity",
                "traffic", "timing_normal_range_ms", "robustness", "encryption", "introspection",
                "stored_data_class", "compromise", "telemetry", "benign_bursts"},
               "device spec");
    read(j, "device_type", s.device_type);
    read(j, "address", s.address);
    read(j, "connectivity", s.connectivity);

    if (j.contains("encryption")) {
      const auto& e = j.at("encryption");
      check_keys(e, {"payload_class", "accepts_downgrade", "replay_protected"}, "encryption");
      if (e.contains("payload_class")) s.encryption.payload_class = enum_from(e.at("payload_class").get<std::string>(), kPayload, "payload_class");
      read(e, "accepts_downgrade", s.encryption.accepts_downgrade);
      read(e, "replay_protected", s.encryption.replay_protected);
    }
    if (j.contains("open_ports")) {
      for (const auto& p : j.at("open_ports")) {
        check_keys(p, {"port", "protocol", "banner", "default_credentials", "freshness_check",
                       "crash_on_malformed", "vulnerable_probes"},
                   "open_ports entry");
        int port = p.at("port").get<int>();
        ServiceSpec svc;
        svc.freshness_check = s.encryption.replay_protected;
        read(p, "protocol", svc.protocol);
        read(p, "banner", svc.banner);
        if (p.contains("default_credentials")) {
          const auto& c = p.at("default_credentials");
          svc.default_credentials = Credentials{c.at("user").get<std::string>(), c.at("password").get<std::string>()};
        }
        read(p, "freshness_check", svc.freshness_check);
        read(p, "crash_on_malformed", svc.crash_on_malformed);
        if (p.contains("vulnerable_probes")) {
          for (const auto& h : p.at("vulnerable_probes")) svc.vulnerable_probes.insert(text::lower(h.get<std::string>()));
        }
        if (svc.protocol.empty()) svc.protocol = "tcp/" + std::to_string(port);
        if (!s.open_ports.emplace(port, svc).second) {
          fail(ErrorCode::validation, "duplicate port " + std::to_string(port));
        }
      }
    }
    if (j.contains("expected_ports")) s.expected_ports = j.at("expected_ports").get<std::set<int>>();
    if (j.contains("identity")) {
      const auto& id = j.at("identity");
      check_keys(id, {"os_name", "os_version", "os_up_to_date", "apps"}, "identity");
      read(id, "os_name", s.identity.os_name);
      read(id, "os_version", s.identity.os_version);
      read(id, "os_up_to_date", s.identity.os_up_to_date);
      if (id.contains("apps")) {
        for (const auto& a : id.at("apps")) {
          check_keys(a, {"name", "version", "up_to_date", "risk_class"}, "app");
          AppVersion v;
          v.version = a.at("version").get<std::string>();
          read(a, "up_to_date", v.up_to_date);
          if (a.contains("risk_class")) v.risk_class = enum_from(a.at("risk_class").get<std::string>(), kRisk, "risk_class");
          s.identity.app_versions[a.at("name").get<std::string>()] = v;
        }
      }
    }
    if (j.contains("traffic")) {
      const auto& t = j.at("traffic");
      check_keys(t, {"enabled", "size_mean", "size_stddev", "interarrival_mean_ms", "interarrival_stddev_ms",
                     "ttl", "packets_per_session"},
                 "traffic");
      read(t, "enabled", s.traffic.enabled);
      read(t, "size_mean", s.traffic.size_mean);
      read(t, "size_stddev", s.traffic.size_stddev);
      read(t, "interarrival_mean_ms", s.traffic.interarrival_mean_ms);
      read(t, "interarrival_stddev_ms", s.traffic.interarrival_stddev_ms);
      read(t, "ttl", s.traffic.ttl);
      read(t, "packets_per_session", s.traffic.packets_per_session);
    }
    if (j.contains("timing_normal_range_ms")) {
      auto r = j.at("timing_normal_range_ms");
      if (!r.is_array() || r.size() != 2) fail(ErrorCode::validation, "timing_normal_range_ms must be [min, max]");
      s.timing_min_ms = r[0].get<double>();
      s.timing_max_ms = r[1].get<double>();
    }
    if (j.contains("robustness")) {
      check_keys(j.at("robustness"), {"ignores_malformed"}, "robustness");
      read(j.at("robustness"), "ignores_malformed", s.robustness.ignores_malformed);
    }
    if (j.contains("introspection")) s.introspection = enum_from(j.at("introspection").get<std::string>(), kIntro, "introspection");
    if (j.contains("stored_data_class")) s.stored_data_class = enum_from(j.at("stored_data_class").get<std::string>(), kStored, "stored_data_class");
    if (j.contains("compromise")) {
      const auto& c = j.at("compromise");
      check_keys(c, {"trigger", "target_subnet", "ports", "probe_interval_ms"}, "compromise");
      Compromise comp;
      comp.trigger = parse_predicate(c.at("trigger"));
      read(c, "target_subnet", comp.target_subnet);
      read(c, "ports", comp.ports);
      read(c, "probe_interval_ms", comp.probe_interval_ms);
      s.compromise = comp;
    }
    if (j.contains("telemetry")) {
      const auto& t = j.at("telemetry");
      check_keys(t, {"period_ms", "cpu_baseline", "cpu_noise", "cpu_spike", "spike_hold_ms", "mem_baseline",
                     "mem_noise", "mem_spike", "fs_events_max"},
                 "telemetry");
      read(t, "period_ms", s.telemetry.period_ms);
      read(t, "cpu_baseline", s.telemetry.cpu_baseline);
      read(t, "cpu_noise", s.telemetry.cpu_noise);
      read(t, "cpu_spike", s.telemetry.cpu_spike);
      read(t, "spike_hold_ms", s.telemetry.spike_hold_ms);
      read(t, "mem_baseline", s.telemetry.mem_baseline);
      read(t, "mem_noise", s.telemetry.mem_noise);
      read(t, "mem_spike", s.telemetry.mem_spike);
      read(t, "fs_events_max", s.telemetry.fs_events_max);
    }
    if (j.contains("benign_bursts")) {
      for (const auto& b : j.at("benign_bursts")) {
        check_keys(b, {"at_s", "packets", "interval_ms"}, "benign burst");
        BenignBurst bb;
        read(b, "at_s", bb.at_s);
        read(b, "packets", bb.packets);
        read(b, "interval_ms", bb.interval_ms);
        s.benign_bursts.push_back(bb);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::validation, std::string("device spec: ") + e.what());
  }
  s.validate();
  return s;
}

DeviceSpec load_device_spec(const std::string& path) {
  try {
    return parse_device_spec(text::read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_found) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string device_spec_to_json(const DeviceSpec& s) {
  json j;
  j["device_type"] = s.device_type;
  if (!s.address.empty()) j["address"] = s.address;
  j["connectivity"] = s.connectivity;
  json ports = json::array();
  for (const auto& [port, svc] : s.open_ports) {
    json p{{"port", port},
           {"protocol", svc.protocol},
           {"banner", svc.banner},
           {"freshness_check", svc.freshness_check},
           {"crash_on_malformed", svc.crash_on_malformed}};
    if (svc.default_credentials) {
      p["default_credentials"] = {{"user", svc.default_credentials->user},
                                  {"password", svc.default_credentials->password}};
    }
    if (!svc.vulnerable_probes.empty()) p["vulnerable_probes"] = svc.vulnerable_probes;
    ports.push_back(p);
  }
  j["open_ports"] = ports;
  if (s.expected_ports) j["expected_ports"] = *s.expected_ports;
  json apps = json::array();
  for (const auto& [name, a] : s.identity.app_versions) {
    apps.push_back({{"name", name},
                    {"version", a.version},
                    {"up_to_date", a.up_to_date},
                    {"risk_class", to_string(a.risk_class)}});
  }
  j["identity"] = {{"os_name", s.identity.os_name},
                   {"os_version", s.identity.os_version},
                   {"os_up_to_date", s.identity.os_up_to_date},
                   {"apps", apps}};
  j["traffic"] = {{"enabled", s.traffic.enabled},
                  {"size_mean", s.traffic.size_mean},
                  {"size_stddev", s.traffic.size_stddev},
                  {"interarrival_mean_ms", s.traffic.interarrival_mean_ms},
                  {"interarrival_stddev_ms", s.traffic.interarrival_stddev_ms},
                  {"ttl", s.traffic.ttl},
                  {"packets_per_session", s.traffic.packets_per_session}};
  j["timing_normal_range_ms"] = {s.timing_min_ms, s.timing_max_ms};
  j["robustness"] = {{"ignores_malformed", s.robustness.ignores_malformed}};
  j["encryption"] = {{"payload_class", to_string(s.encryption.payload_class)},
                     {"accepts_downgrade", s.encryption.accepts_downgrade},
                     {"replay_protected", s.encryption.replay_protected}};
  j["introspection"] = to_string(s.introspection);
  j["stored_data_class"] = to_string(s.stored_data_class);
  if (s.compromise) {
    json trig;
    const auto& t = s.compromise->trigger;
    if (t.center) {
      trig["center"] = {t.center->lat, t.center->lon};
      trig["radius_m"] = t.radius_m;
    }
    if (t.time_window) {
      trig["time_window_s"] = {to_seconds(t.time_window->first), to_seconds(t.time_window->second)};
    }
    j["compromise"] = {{"trigger", trig},
                       {"target_subnet", s.compromise->target_subnet},
                       {"ports", s.compromise->ports},
                       {"probe_interval_ms", s.compromise->probe_interval_ms}};
  }
  j["telemetry"] = {{"period_ms", s.telemetry.period_ms},
                    {"cpu_baseline", s.telemetry.cpu_baseline},
                    {"cpu_noise", s.telemetry.cpu_noise},
                    {"cpu_spike", s.telemetry.cpu_spike},
                    {"spike_hold_ms", s.telemetry.spike_hold_ms},
                    {"mem_baseline", s.telemetry.mem_baseline},
                    {"mem_noise", s.telemetry.mem_noise},
                    {"mem_spike", s.telemetry.mem_spike},
                    {"fs_events_max", s.telemetry.fs_events_max}};
  json bursts = json::array();
  for (const auto& b : s.benign_bursts) {
    bursts.push_back({{"at_s", b.at_s}, {"packets", b.packets}, {"interval_ms", b.interval_ms}});
  }
  j["benign_bursts"] = bursts;
  return j.dump(2);
}

}  // namespace iotbed::simnet
