#include "iotbed/simnet/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/simnet/payload.hpp"

namespace iotbed::simnet {

namespace {

constexpr int kEphemeralFirst = 49152;
constexpr int kCloudTtl = 52;
constexpr int kMaxPacket = 1500;

std::mt19937_64 make_stream(std::uint64_t seed, std::size_t index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double normal(std::mt19937_64& rng, double mean, double stddev) {
  if (stddev <= 0) return mean;
  std::normal_distribution<double> d(mean, stddev);
  return d(rng);
}

bool step_schedule(double rate, double& acc) {
  if (rate <= 0) return false;
  acc += rate;
  if (acc >= 1.0 - 1e-12) {
    acc -= 1.0;
    return true;
  }
  return false;
}

std::uint32_t parse_ipv4(const std::string& s) {
  auto parts = text::split(s, '.');
  if (parts.size() != 4) fail(ErrorCode::validation, "bad IPv4 address '" + s + "'");
  std::uint32_t v = 0;
  for (const auto& p : parts) {
    auto n = text::to_int(p);
    if (!n || *n < 0 || *n > 255) fail(ErrorCode::validation, "bad IPv4 address '" + s + "'");
    v = (v << 8) | static_cast<std::uint32_t>(*n);
  }
  return v;
}

std::string format_ipv4(std::uint32_t v) {
  return std::to_string(v >> 24) + "." + std::to_string((v >> 16) & 255) + "." +
         std::to_string((v >> 8) & 255) + "." + std::to_string(v & 255);
}

std::string broadcast_of(const std::string& address) {
  auto parts = text::split(address, '.');
  if (parts.size() != 4) return "255.255.255.255";
  return parts[0] + "." + parts[1] + "." + parts[2] + ".255";
}

}  // namespace

std::vector<std::string> subnet_hosts(const std::string& cidr) {
  auto slash = cidr.find('/');
  if (slash == std::string::npos) return {cidr};
  auto prefix = text::to_int(cidr.substr(slash + 1));
  if (!prefix || *prefix < 16 || *prefix > 32) fail(ErrorCode::validation, "bad subnet '" + cidr + "'");
  std::uint32_t base = parse_ipv4(cidr.substr(0, slash));
  std::uint32_t mask = *prefix == 32 ? 0xffffffffu : ~((1u << (32 - *prefix)) - 1);
  base &= mask;
  std::uint32_t count = ~mask + 1u;
  std::vector<std::string> out;
  if (count <= 2) {
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(format_ipv4(base + i));
    return out;
  }
  for (std::uint32_t i = 1; i + 1 < count && out.size() < 1024; ++i) out.push_back(format_ipv4(base + i));
  return out;
}

struct VirtualNetwork::Device {
  DeviceSpec spec;
  std::string address;
  std::size_t index = 0;
  std::atomic<bool> alive{true};
  std::atomic<std::uint64_t> generation{0};
  VirtualTime spawned_at = 0;
  std::mt19937_64 traffic_rng;
  std::mt19937_64 status_rng;
  std::mt19937_64 payload_rng;
  int next_port = kEphemeralFirst;
  int session_port = 0;
  bool in_trigger = false;
  struct Burst {
    int src_port = 0;
    std::vector<std::pair<std::string, int>> targets;
  };
  std::vector<Burst> bursts;
  std::vector<std::pair<VirtualTime, VirtualTime>> spikes;
  std::vector<InternalStatusSample> samples;
  std::atomic<int> anomalies{0};
  std::uint64_t transactions = 0;
  mutable std::mutex mutex;

  int take_port() {
    int p = next_port++;
    if (next_port > 65535) next_port = kEphemeralFirst;
    return p;
  }
};

struct VirtualNetwork::Proxy {
  std::uint64_t id = 0;
  Mutator mutator;
  double corrupt_acc = 0.0;
  double drop_acc = 0.0;
  double replay_acc = 0.0;
};

VirtualNetwork::VirtualNetwork(NetworkOptions options) : options_(options) {}
VirtualNetwork::~VirtualNetwork() = default;

VirtualNetwork::Device& VirtualNetwork::device(const DeviceHandle& h) {
  if (h.index >= devices_.size()) fail(ErrorCode::not_found, "unknown device handle");
  return *devices_[h.index];
}

const VirtualNetwork::Device& VirtualNetwork::device(const DeviceHandle& h) const {
  if (h.index >= devices_.size()) fail(ErrorCode::not_found, "unknown device handle");
  return *devices_[h.index];
}

DeviceHandle VirtualNetwork::spawn_device(DeviceSpec spec) {
  spec.validate();
  std::string address = spec.address;
  if (address.empty()) {
    for (int host = 100 + static_cast<int>(devices_.size()); host < 255; ++host) {
      std::string candidate = "10.0.8." + std::to_string(host);
      if (!by_address_.count(candidate)) {
        address = candidate;
        break;
      }
    }
    if (address.empty()) fail(ErrorCode::runtime, "virtual subnet exhausted");
  }
  if (address == kTestbedAddress || address == kCloudAddress) {
    fail(ErrorCode::duplicate, "port conflict: address " + address + " is reserved");
  }
  if (auto it = by_address_.find(address); it != by_address_.end()) {
    const auto& other = devices_[it->second]->spec.open_ports;
    for (const auto& [port, svc] : spec.open_ports) {
      if (other.count(port)) {
        fail(ErrorCode::duplicate, "port conflict: " + address + ":" + std::to_string(port) + " already bound");
      }
    }
    fail(ErrorCode::duplicate, "port conflict: address " + address + " already in use");
  }
  auto d = std::make_unique<Device>();
  d->spec = std::move(spec);
  d->address = address;
  d->index = devices_.size();
  d->spawned_at = now_;
  d->traffic_rng = make_stream(options_.seed, d->index, 1);
  d->status_rng = make_stream(options_.seed, d->index, 2);
  d->payload_rng = make_stream(options_.seed, d->index, 3);
  by_address_[address] = d->index;
  devices_.push_back(std::move(d));
  start_device_actors(*devices_.back());
  return DeviceHandle{devices_.back()->index, address};
}

void VirtualNetwork::start_device_actors(Device& d) {
  std::uint64_t gen = d.generation.load();
  if (d.spec.traffic.enabled) {
    schedule({now_ + static_cast<VirtualTime>(d.index) * 7 * kMillisecond, 0, EventKind::tx_start, d.index, gen, 0, 0});
  }
  schedule({now_ + from_ms(d.spec.telemetry.period_ms), 0, EventKind::status, d.index, gen, 0, 0});
  for (std::size_t i = 0; i < d.spec.benign_bursts.size(); ++i) {
    const auto& b = d.spec.benign_bursts[i];
    VirtualTime at = d.spawned_at + static_cast<VirtualTime>(b.at_s * kSecond);
    if (at < now_) continue;
    for (int k = 0; k < b.packets; ++k) {
      schedule({at + from_ms(k * b.interval_ms), 0, EventKind::benign_packet, d.index, gen,
                static_cast<int>(i), k});
    }
  }
}

const DeviceSpec& VirtualNetwork::spec(const DeviceHandle& h) const { return device(h).spec; }

std::optional<DeviceHandle> VirtualNetwork::find_device(const std::string& address) const {
  auto it = by_address_.find(address);
  if (it == by_address_.end()) return std::nullopt;
  return DeviceHandle{it->second, address};
}

std::vector<DeviceHandle> VirtualNetwork::devices() const {
  std::vector<DeviceHandle> out;
  for (const auto& d : devices_) out.push_back({d->index, d->address});
  return out;
}

bool VirtualNetwork::alive(const DeviceHandle& h) const { return device(h).alive.load(); }

void VirtualNetwork::stop_device(const DeviceHandle& h) {
  auto& d = device(h);
  std::lock_guard lock(d.mutex);
  d.alive = false;
  ++d.generation;
}

void VirtualNetwork::restart_device(const DeviceHandle& h) {
  auto& d = device(h);
  {
    std::lock_guard lock(d.mutex);
    if (d.alive) return;
    d.alive = true;
    ++d.generation;
    d.in_trigger = false;
  }
  start_device_actors(d);
}

void VirtualNetwork::schedule(Event e) {
  e.seq = event_seq_++;
  queue_.push(e);
}

void VirtualNetwork::tick_to(VirtualTime t) {
  if (t < now_) fail(ErrorCode::invalid_argument, "virtual clock cannot move backwards");
  while (!queue_.empty() && queue_.top().t <= t) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.t;
    dispatch(e);
  }
  now_ = t;
}

void VirtualNetwork::advance_context(const std::vector<ContextEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.location.lat < -90 || e.location.lat > 90 || e.location.lon < -180 || e.location.lon > 180) {
      fail(ErrorCode::invalid_argument, "context event location out of range");
    }
    if (i > 0 && e.time < events[i - 1].time) fail(ErrorCode::invalid_argument, "unsorted context events");
  }
  if (!events.empty() && events.front().time < now_) {
    fail(ErrorCode::invalid_argument, "context time regression");
  }
  for (const auto& e : events) {
    tick_to(e.time);
    context_ = e;
    context_log_.push_back(e);
    for (auto& dp : devices_) {
      Device& d = *dp;
      if (!d.spec.compromise || !d.alive) continue;
      bool match = d.spec.compromise->trigger.matches(e);
      if (match && !d.in_trigger) start_attack_burst(d);
      d.in_trigger = match;
    }
  }
  // Let in-flight scans finish so their probes land in active captures.
  if (pending_probes_until_ > now_) tick_to(pending_probes_until_);
}

void VirtualNetwork::start_attack_burst(Device& d) {
  const auto& c = *d.spec.compromise;
  Device::Burst burst;
  burst.src_port = d.take_port();
  for (const auto& host : subnet_hosts(c.target_subnet)) {
    if (host == d.address) continue;
    for (int port : c.ports) burst.targets.emplace_back(host, port);
  }
  int burst_index = static_cast<int>(d.bursts.size());
  std::uint64_t gen = d.generation.load();
  VirtualTime last = now_;
  for (std::size_t i = 0; i < burst.targets.size(); ++i) {
    last = now_ + from_ms(static_cast<double>(i) * c.probe_interval_ms);
    schedule({last, 0, EventKind::probe, d.index, gen, burst_index, static_cast<int>(i)});
  }
  d.bursts.push_back(std::move(burst));
  d.spikes.emplace_back(now_, last + from_ms(d.spec.telemetry.spike_hold_ms));
  pending_probes_until_ = std::max(pending_probes_until_, last);
}

VirtualNetwork::Proxy* VirtualNetwork::proxy_of(const std::string& address) {
  auto it = proxies_.find(address);
  return it == proxies_.end() ? nullptr : it->second.get();
}

void VirtualNetwork::begin_transaction(Device& d) {
  d.session_port = d.take_port();
  const auto& tp = d.spec.traffic;
  VirtualTime t = now_;
  std::uint64_t gen = d.generation.load();
  for (int i = 0; i < tp.packets_per_session; ++i) {
    schedule({t, 0, EventKind::tx_packet, d.index, gen, d.session_port, i});
    double gap = std::max(0.0, normal(d.traffic_rng, tp.interarrival_mean_ms, tp.interarrival_stddev_ms));
    t += from_ms(gap);
  }
}

void VirtualNetwork::dispatch(const Event& e) {
  Device& d = *devices_[e.device];
  if (e.generation != d.generation.load() || !d.alive) return;
  const auto& spec = d.spec;
  const bool encrypted = spec.encryption.payload_class == PayloadClass::encrypted;
  const int cloud_port = encrypted ? 443 : 80;
  switch (e.kind) {
    case EventKind::tx_start:
      begin_transaction(d);
      break;
    case EventKind::tx_packet: {
      int size = static_cast<int>(std::lround(normal(d.traffic_rng, spec.traffic.size_mean, spec.traffic.size_stddev)));
      size = std::clamp(size, 1, kMaxPacket);
      std::string marker;
      if (e.b == 0 && !encrypted && spec.stored_data_class >= StoredDataClass::sensitive) {
        GeoPoint loc = context_ ? context_->location : GeoPoint{};
        marker = "GPS=" + text::format_fixed(loc.lat, 6) + "," + text::format_fixed(loc.lon, 6);
      }
      std::string payload = synthesize_payload(d.payload_rng, size, spec.encryption.payload_class, marker);
      emit({now_, d.address, std::string(kCloudAddress), e.a, cloud_port, Proto::tcp, spec.traffic.ttl, size,
            byte_entropy(payload), marker, Direction::from_dut});
      if (e.b == spec.traffic.packets_per_session - 1) {
        Proxy* px = proxy_of(d.address);
        VirtualTime delay = px ? from_ms(px->mutator.delay_ms) : 0;
        if (px && step_schedule(px->mutator.drop_rate, px->drop_acc)) {
          double think = std::max(0.0, spec.timing_min_ms - options_.server_latency_ms);
          schedule({now_ + from_ms(options_.server_latency_ms + options_.response_timeout_ms + think), 0,
                    EventKind::tx_start, d.index, e.generation, 0, 0});
        } else {
          schedule({now_ + from_ms(options_.server_latency_ms) + delay, 0, EventKind::server_response, d.index,
                    e.generation, e.a, 0});
        }
      }
      break;
    }
    case EventKind::server_response: {
      int size = std::clamp(static_cast<int>(std::lround(normal(d.payload_rng, 160.0, 16.0))), 32, kMaxPacket);
      std::string payload = synthesize_payload(d.payload_rng, size, spec.encryption.payload_class);
      CaptureRecord r{now_, std::string(kCloudAddress), d.address, cloud_port, e.a, Proto::tcp, kCloudTtl, size,
                      byte_entropy(payload), "", Direction::to_dut};
      emit(r);
      if (Proxy* px = proxy_of(d.address)) {
        if (step_schedule(px->mutator.replay_rate, px->replay_acc)) emit(r);
        if (step_schedule(px->mutator.corrupt_rate, px->corrupt_acc) && !spec.robustness.ignores_malformed) {
          ++d.anomalies;
        }
      }
      ++d.transactions;
      double think = std::max(0.0, spec.timing_min_ms - options_.server_latency_ms);
      schedule({now_ + from_ms(think), 0, EventKind::tx_start, d.index, e.generation, 0, 0});
      break;
    }
    case EventKind::status:
      d.samples.push_back(take_sample(d));
      schedule({now_ + from_ms(spec.telemetry.period_ms), 0, EventKind::status, d.index, e.generation, 0, 0});
      break;
    case EventKind::probe: {
      const auto& burst = d.bursts[static_cast<std::size_t>(e.a)];
      const auto& [host, port] = burst.targets[static_cast<std::size_t>(e.b)];
      emit({now_, d.address, host, burst.src_port, port, Proto::tcp, spec.traffic.ttl, 0, 0.0, "", Direction::lateral});
      if (auto it = by_address_.find(host); it != by_address_.end()) {
        Device& target = *devices_[it->second];
        if (target.alive && target.spec.open_ports.count(port)) {
          emit({now_, host, d.address, port, burst.src_port, Proto::tcp, target.spec.traffic.ttl, 0, 0.0, "",
                Direction::lateral});
        }
      }
      break;
    }
    case EventKind::benign_packet: {
      std::string payload = synthesize_payload(d.payload_rng, 120, PayloadClass::plaintext);
      emit({now_, d.address, broadcast_of(d.address), 1900, 1900, Proto::udp, spec.traffic.ttl, 120,
            byte_entropy(payload), "", Direction::lateral});
      break;
    }
  }
}

InternalStatusSample VirtualNetwork::take_sample(Device& d) {
  const auto& t = d.spec.telemetry;
  bool spiking = false;
  for (const auto& [from, to] : d.spikes) spiking = spiking || (now_ >= from && now_ <= to);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double cpu_noise = unit(d.status_rng) * t.cpu_noise;
  double mem_noise = unit(d.status_rng) * t.mem_noise;
  std::uniform_int_distribution<int> fs(0, std::max(0, t.fs_events_max));
  InternalStatusSample s;
  s.ts = now_;
  s.cpu_pct = spiking ? t.cpu_baseline + t.cpu_spike + std::abs(cpu_noise) : t.cpu_baseline + cpu_noise;
  s.cpu_pct = std::clamp(s.cpu_pct, 0.0, 100.0);
  double mem = t.mem_baseline + mem_noise + (spiking ? t.mem_spike : 0.0);
  s.mem_bytes = static_cast<std::int64_t>(std::max(0.0, mem));
  s.fs_events = fs(d.status_rng);
  return s;
}

void VirtualNetwork::emit(CaptureRecord r) {
  r.ts = now_;
  ++emitted_;
  for (auto& [id, cap] : captures_) {
    if (cap.scope.all || cap.scope.addresses.count(r.src_addr) || cap.scope.addresses.count(r.dst_addr)) {
      cap.records.push_back(r);
    }
  }
}

void VirtualNetwork::record(CaptureRecord r) { emit(std::move(r)); }

CaptureHandle VirtualNetwork::start_capture(const CaptureScope& scope) {
  if (!scope.all && scope.addresses.empty()) fail(ErrorCode::invalid_argument, "capture scope is empty");
  std::uint64_t id = next_capture_++;
  captures_[id] = Capture{scope, {}};
  return CaptureHandle{id};
}

std::vector<CaptureRecord> VirtualNetwork::stop_capture(CaptureHandle h) {
  auto it = captures_.find(h.id);
  if (it == captures_.end()) fail(ErrorCode::not_found, "unknown capture handle");
  auto records = std::move(it->second.records);
  captures_.erase(it);
  return records;
}

const std::vector<CaptureRecord>& VirtualNetwork::peek_capture(CaptureHandle h) const {
  auto it = captures_.find(h.id);
  if (it == captures_.end()) fail(ErrorCode::not_found, "unknown capture handle");
  return it->second.records;
}

std::vector<InternalStatusSample> VirtualNetwork::sample_status(const DeviceHandle& h, VirtualTime from,
                                                                VirtualTime to) const {
  const auto& d = device(h);
  if (!d.alive) fail(ErrorCode::runtime, "device " + d.address + " is not alive");
  std::vector<InternalStatusSample> out;
  for (const auto& s : d.samples) {
    if (s.ts >= from && s.ts < to) out.push_back(s);
  }
  return out;
}

std::vector<InternalStatusSample> VirtualNetwork::status_series(const DeviceHandle& h) const {
  return device(h).samples;
}

ProxyHandle VirtualNetwork::proxy_channel(const DeviceHandle& h, Mutator m) {
  auto& d = device(h);
  if (!d.alive) fail(ErrorCode::runtime, "device " + d.address + " is not alive");
  if (proxies_.count(d.address)) fail(ErrorCode::duplicate, "device " + d.address + " is already proxied");
  auto p = std::make_unique<Proxy>();
  p->id = next_proxy_++;
  p->mutator = m;
  ProxyHandle handle{p->id, d.address};
  proxies_[d.address] = std::move(p);
  return handle;
}

void VirtualNetwork::set_mutator(const ProxyHandle& h, Mutator m) {
  auto it = proxies_.find(h.address);
  if (it == proxies_.end() || it->second->id != h.id) fail(ErrorCode::not_found, "unknown proxy handle");
  it->second->mutator = m;
}

void VirtualNetwork::remove_proxy(const ProxyHandle& h) {
  auto it = proxies_.find(h.address);
  if (it == proxies_.end() || it->second->id != h.id) fail(ErrorCode::not_found, "unknown proxy handle");
  proxies_.erase(it);
}

std::optional<Mutator> VirtualNetwork::proxy_for(const std::string& address) const {
  auto it = proxies_.find(address);
  if (it == proxies_.end()) return std::nullopt;
  return it->second->mutator;
}

std::optional<ProxyHandle> VirtualNetwork::proxy_handle(const std::string& address) const {
  auto it = proxies_.find(address);
  if (it == proxies_.end()) return std::nullopt;
  return ProxyHandle{it->second->id, address};
}

bool VirtualNetwork::has_introspection_channel(const DeviceHandle& h) const {
  return device(h).spec.introspection != IntrospectionPolicy::absent;
}

std::optional<std::vector<std::string>> VirtualNetwork::local_process_list(const DeviceHandle& h,
                                                                           bool admin) const {
  const auto& d = device(h);
  if (!d.alive) return std::nullopt;
  switch (d.spec.introspection) {
    case IntrospectionPolicy::absent:
      return std::nullopt;
    case IntrospectionPolicy::remote_blocked:
      if (!admin) return std::nullopt;
      [[fallthrough]];
    case IntrospectionPolicy::none:
    case IntrospectionPolicy::local:
      return std::vector<std::string>{"init", "netd", d.spec.device_type + "-agent"};
  }
  return std::nullopt;
}

StoredDataClass VirtualNetwork::inspect_storage(const DeviceHandle& h) const {
  return device(h).spec.stored_data_class;
}

int VirtualNetwork::anomaly_count(const DeviceHandle& h) const { return device(h).anomalies.load(); }

std::uint64_t VirtualNetwork::completed_transactions(const DeviceHandle& h) const {
  return device(h).transactions;
}

int VirtualNetwork::attack_bursts(const DeviceHandle& h) const {
  return static_cast<int>(device(h).bursts.size());
}

bool VirtualNetwork::reachable(const std::string& address) { return by_address_.count(address) > 0; }

bool VirtualNetwork::connect(const std::string& address, int port) {
  auto h = find_device(address);
  if (!h) fail(ErrorCode::not_found, "unreachable target " + address);
  emit({now_, std::string(kTestbedAddress), address, kTestbedPort, port, Proto::tcp, 64, 0, 0.0, "",
        Direction::to_dut});
  Device& d = device(*h);
  if (d.alive && d.spec.open_ports.count(port)) {
    emit({now_, address, std::string(kTestbedAddress), port, kTestbedPort, Proto::tcp, d.spec.traffic.ttl, 0, 0.0,
          "", Direction::from_dut});
    return true;
  }
  return false;
}

VirtualNetwork::Delivery VirtualNetwork::next_request_delivery(const std::string& address) {
  Delivery out;
  if (Proxy* px = proxy_of(address)) {
    out.drop = step_schedule(px->mutator.drop_rate, px->drop_acc);
    if (!out.drop) {
      out.corrupt = step_schedule(px->mutator.corrupt_rate, px->corrupt_acc);
      out.replay = step_schedule(px->mutator.replay_rate, px->replay_acc);
    }
  }
  return out;
}

std::optional<std::string> VirtualNetwork::request(const std::string& address, int port,
                                                   const std::string& message) {
  auto h = find_device(address);
  if (!h) fail(ErrorCode::not_found, "unreachable target " + address);
  Delivery del = next_request_delivery(address);
  CaptureRecord req{now_, std::string(kTestbedAddress), address, kTestbedPort, port, Proto::tcp, 64,
                    static_cast<int>(message.size()), byte_entropy(message), "", Direction::to_dut};
  emit(req);
  if (del.drop) return std::nullopt;
  auto response = serve(address, port, message, del.corrupt);
  if (del.replay) {
    emit(req);
    serve(address, port, message, false);
  }
  if (response) {
    emit({now_, address, std::string(kTestbedAddress), port, kTestbedPort, Proto::tcp, device(*h).spec.traffic.ttl,
          static_cast<int>(response->size()), byte_entropy(*response), "", Direction::from_dut});
  }
  return response;
}

namespace {
std::string identity_beacon(const DeviceSpec& spec) {
  std::string out = "IDENT type=" + spec.device_type;
  const auto& id = spec.identity;
  if (!id.os_name.empty()) {
    out += ";os=" + id.os_name + "/" + id.os_version + "/" + (id.os_up_to_date ? "ok" : "outdated");
  }
  for (const auto& [name, app] : id.app_versions) {
    out += ";app=" + name + "/" + app.version + "/" + (app.up_to_date ? "ok" : "outdated") + "/" +
           std::string(to_string(app.risk_class));
  }
  return out;
}
}  // namespace

std::optional<std::string> VirtualNetwork::serve(const std::string& address, int port, const std::string& message,
                                                 bool malformed) {
  auto it = by_address_.find(address);
  if (it == by_address_.end()) return std::nullopt;
  Device& d = *devices_[it->second];
  std::lock_guard lock(d.mutex);
  if (!d.alive) return std::nullopt;
  auto svc_it = d.spec.open_ports.find(port);
  if (svc_it == d.spec.open_ports.end()) return std::nullopt;
  const ServiceSpec& svc = svc_it->second;
  if (malformed) {
    if (svc.crash_on_malformed) {
      d.alive = false;
      ++d.generation;
      return std::nullopt;
    }
    if (!d.spec.robustness.ignores_malformed) {
      ++d.anomalies;
      return "ERR inconsistent-state";
    }
    return "ERR malformed-ignored";
  }
  if (message.empty()) return svc.banner;
  auto words = text::split(message, ' ');
  const std::string& verb = words[0];
  if (verb == "PING") return "PONG";
  if (verb == "LOGIN") {
    if (words.size() == 3 && svc.default_credentials && svc.default_credentials->user == words[1] &&
        svc.default_credentials->password == words[2]) {
      return "OK";
    }
    return "DENIED";
  }
  if (verb == "PS") {
    if (d.spec.introspection == IntrospectionPolicy::none) {
      return "PROCS init,netd," + d.spec.device_type + "-agent";
    }
    return "DENIED";
  }
  if (verb == "IDENT") {
    if (d.spec.identity.empty()) return "NOIDENT";
    return identity_beacon(d.spec);
  }
  if (verb == "STARTPLAIN") {
    if (d.spec.encryption.payload_class == PayloadClass::plaintext) return "NOTLS";
    return d.spec.encryption.accepts_downgrade ? "PLAIN-OK" : "REFUSED";
  }
  if (verb == "REPLAY") return svc.freshness_check ? "REJECT" : "ACCEPT";
  if (verb == "PROBE" && words.size() == 2) {
    std::string hex = text::lower(words[1]);
    if (svc.vulnerable_probes.count(hex)) return "CRASH-SIG " + hex;
    return "ERR unsupported-input";
  }
  return "ERR unknown-command";
}

}  // namespace iotbed::simnet
