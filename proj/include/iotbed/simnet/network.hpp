#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "iotbed/simnet/device_spec.hpp"
#include "iotbed/simnet/types.hpp"

namespace iotbed::simnet {

inline constexpr std::string_view kTestbedAddress = "10.0.8.1";
inline constexpr std::string_view kCloudAddress = "203.0.113.10";
inline constexpr int kTestbedPort = 40000;

struct DeviceHandle {
  std::size_t index = 0;
  std::string address;
  bool operator==(const DeviceHandle&) const = default;
};

struct CaptureHandle {
  std::uint64_t id = 0;
};

struct ProxyHandle {
  std::uint64_t id = 0;
  std::string address;
};

// Channel impairments applied by a proxy. Rates are fractions of packets;
// they are applied on a deterministic schedule (every 1/rate-th packet).
struct Mutator {
  double delay_ms = 0.0;
  double corrupt_rate = 0.0;
  double drop_rate = 0.0;
  double replay_rate = 0.0;

  bool is_identity() const {
    return delay_ms == 0.0 && corrupt_rate == 0.0 && drop_rate == 0.0 && replay_rate == 0.0;
  }
};

struct CaptureScope {
  bool all = true;
  std::set<std::string> addresses;

  static CaptureScope everything() { return {}; }
  static CaptureScope of(std::set<std::string> addrs) { return {false, std::move(addrs)}; }
};

// What the security tests talk to. Both backends implement it.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual std::string_view backend_name() const = 0;
  virtual bool reachable(const std::string& address) = 0;
  // Connection attempt from the testbed; true when the port accepts.
  virtual bool connect(const std::string& address, int port) = 0;
  // One request/response exchange on a service. An empty message grabs the
  // banner. nullopt means refused or no answer.
  virtual std::optional<std::string> request(const std::string& address, int port,
                                             const std::string& message) = 0;
};

struct NetworkOptions {
  std::uint64_t seed = 1;
  double server_latency_ms = 20.0;
  double response_timeout_ms = 2000.0;
};

// In-memory virtual network: device actors, a virtual clock, capture taps,
// context feed and per-device proxies. Deterministic for a fixed seed.
class VirtualNetwork : public Transport {
 public:
  explicit VirtualNetwork(NetworkOptions options = {});
  ~VirtualNetwork() override;
  VirtualNetwork(const VirtualNetwork&) = delete;
  VirtualNetwork& operator=(const VirtualNetwork&) = delete;

  DeviceHandle spawn_device(DeviceSpec spec);
  const DeviceSpec& spec(const DeviceHandle& h) const;
  std::optional<DeviceHandle> find_device(const std::string& address) const;
  std::vector<DeviceHandle> devices() const;
  bool alive(const DeviceHandle& h) const;
  void stop_device(const DeviceHandle& h);
  // Power-cycles a stopped or crashed device.
  void restart_device(const DeviceHandle& h);

  VirtualTime now() const { return now_; }
  void tick_to(VirtualTime t);
  void tick(VirtualTime dt) { tick_to(now_ + dt); }
  void advance_context(const std::vector<ContextEvent>& events);
  std::optional<ContextEvent> current_context() const { return context_; }
  const std::vector<ContextEvent>& context_log() const { return context_log_; }

  CaptureHandle start_capture(const CaptureScope& scope);
  std::vector<CaptureRecord> stop_capture(CaptureHandle h);
  const std::vector<CaptureRecord>& peek_capture(CaptureHandle h) const;
  // Every packet-level event the transport has emitted so far.
  std::uint64_t emitted_events() const { return emitted_; }

  std::vector<InternalStatusSample> sample_status(const DeviceHandle& h, VirtualTime from,
                                                  VirtualTime to) const;
  std::vector<InternalStatusSample> status_series(const DeviceHandle& h) const;

  ProxyHandle proxy_channel(const DeviceHandle& h, Mutator m);
  void set_mutator(const ProxyHandle& p, Mutator m);
  void remove_proxy(const ProxyHandle& p);
  std::optional<Mutator> proxy_for(const std::string& address) const;
  std::optional<ProxyHandle> proxy_handle(const std::string& address) const;

  // Local (non-network) channels of a device.
  bool has_introspection_channel(const DeviceHandle& h) const;
  // nullopt when the listing is refused.
  std::optional<std::vector<std::string>> local_process_list(const DeviceHandle& h, bool admin) const;
  StoredDataClass inspect_storage(const DeviceHandle& h) const;

  int anomaly_count(const DeviceHandle& h) const;
  std::uint64_t completed_transactions(const DeviceHandle& h) const;
  int attack_bursts(const DeviceHandle& h) const;

  // Transport (memory backend).
  std::string_view backend_name() const override { return "memory"; }
  bool reachable(const std::string& address) override;
  bool connect(const std::string& address, int port) override;
  std::optional<std::string> request(const std::string& address, int port,
                                     const std::string& message) override;

  // Device-side service logic, shared with the loopback backend.
  std::optional<std::string> serve(const std::string& address, int port, const std::string& message,
                                   bool malformed);
  // Whether the next testbed request to `address` gets corrupted/dropped by
  // its proxy; advances the proxy's schedule.
  struct Delivery {
    bool drop = false;
    bool corrupt = false;
    bool replay = false;
  };
  Delivery next_request_delivery(const std::string& address);

  // Feeds a record into the tap (used by the loopback backend).
  void record(CaptureRecord r);

 private:
  struct Device;
  struct Proxy;
  enum class EventKind { tx_start, tx_packet, server_response, status, probe, benign_packet };
  struct Event {
    VirtualTime t = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::status;
    std::size_t device = 0;
    std::uint64_t generation = 0;
    int a = 0;
    int b = 0;
  };
  struct EventOrder {
    bool operator()(const Event& x, const Event& y) const {
      return x.t != y.t ? x.t > y.t : x.seq > y.seq;
    }
  };

  Device& device(const DeviceHandle& h);
  const Device& device(const DeviceHandle& h) const;
  void schedule(Event e);
  void dispatch(const Event& e);
  void emit(CaptureRecord r);
  void start_device_actors(Device& d);
  void begin_transaction(Device& d);
  void start_attack_burst(Device& d);
  InternalStatusSample take_sample(Device& d);
  Proxy* proxy_of(const std::string& address);

  NetworkOptions options_;
  VirtualTime now_ = 0;
  std::uint64_t event_seq_ = 0;
  std::uint64_t emitted_ = 0;
  std::uint64_t next_capture_ = 1;
  std::uint64_t next_proxy_ = 1;
  std::vector<std::unique_ptr<Device>> devices_;
  std::map<std::string, std::size_t> by_address_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  VirtualTime pending_probes_until_ = 0;
  struct Capture {
    CaptureScope scope;
    std::vector<CaptureRecord> records;
  };
  std::map<std::uint64_t, Capture> captures_;
  std::map<std::string, std::unique_ptr<Proxy>> proxies_;
  std::optional<ContextEvent> context_;
  std::vector<ContextEvent> context_log_;
};

// Hosts addresses of a CIDR block, excluding network/broadcast. Capped at
// 1024 hosts.
std::vector<std::string> subnet_hosts(const std::string& cidr);

}  // namespace iotbed::simnet
