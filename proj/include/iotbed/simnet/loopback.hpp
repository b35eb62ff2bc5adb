#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "iotbed/simnet/network.hpp"

namespace iotbed::simnet {

// Real TCP sockets on 127.0.0.1. Every open port of every device in `net`
// gets its own listener on an ephemeral local port; a single poll() thread
// answers requests with the device's service logic. Background traffic stays
// on the virtual clock; socket exchanges are recorded into `net`'s taps.
//
// Wire format: the client writes one request line, the server answers one
// line (or closes without answering when the device refuses/crashed).
class LoopbackTransport : public Transport {
 public:
  explicit LoopbackTransport(VirtualNetwork& net);
  ~LoopbackTransport() override;
  LoopbackTransport(const LoopbackTransport&) = delete;
  LoopbackTransport& operator=(const LoopbackTransport&) = delete;

  // Binds listeners for devices spawned since the last call.
  void sync_devices();
  // Local port serving (address, port); 0 when not bound.
  int local_port(const std::string& address, int port) const;

  std::string_view backend_name() const override { return "loopback"; }
  bool reachable(const std::string& address) override;
  bool connect(const std::string& address, int port) override;
  std::optional<std::string> request(const std::string& address, int port, const std::string& message) override;

 private:
  struct Listener {
    int fd = -1;
    std::string address;
    int port = 0;
  };
  std::optional<std::string> exchange(int local, const std::string& line);
  void serve_loop();

  VirtualNetwork& net_;
  std::mutex mutex_;
  std::map<int, Listener> listeners_;  // by fd
  std::map<std::pair<std::string, int>, int> local_ports_;
  std::atomic<bool> stop_{false};
  int wake_[2] = {-1, -1};
  std::thread thread_;
};

}  // namespace iotbed::simnet
