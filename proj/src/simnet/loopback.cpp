#include "iotbed/simnet/loopback.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <vector>

#include "iotbed/common/error.hpp"
#include "iotbed/simnet/payload.hpp"

namespace iotbed::simnet {

namespace {

constexpr int kIoTimeoutMs = 2000;

sockaddr_in loopback_addr(int port) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(static_cast<std::uint16_t>(port));
  sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return sa;
}

bool write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

// Reads until '\n' or EOF. nullopt on EOF before any newline.
std::optional<std::string> read_line(int fd) {
  std::string out;
  char c = 0;
  for (;;) {
    pollfd p{fd, POLLIN, 0};
    int r = ::poll(&p, 1, kIoTimeoutMs);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return std::nullopt;
    ssize_t n = ::recv(fd, &c, 1, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::nullopt;
    if (c == '\n') return out;
    out.push_back(c);
  }
}

// Bit errors turn a request into bytes outside printable ASCII.
bool looks_malformed(const std::string& line) {
  for (unsigned char ch : line) {
    if (ch >= 0x80 || (ch < 0x20 && ch != '\t')) return true;
  }
  return false;
}

}  // namespace

LoopbackTransport::LoopbackTransport(VirtualNetwork& net) : net_(net) {
  if (::pipe(wake_) != 0) fail(ErrorCode::runtime, "loopback: pipe failed");
  sync_devices();
  thread_ = std::thread([this] { serve_loop(); });
}

LoopbackTransport::~LoopbackTransport() {
  stop_ = true;
  char b = 1;
  (void)!::write(wake_[1], &b, 1);
  if (thread_.joinable()) thread_.join();
  for (auto& [fd, l] : listeners_) ::close(fd);
  ::close(wake_[0]);
  ::close(wake_[1]);
}

void LoopbackTransport::sync_devices() {
  std::lock_guard lock(mutex_);
  for (const auto& h : net_.devices()) {
    for (const auto& [port, svc] : net_.spec(h).open_ports) {
      auto key = std::make_pair(h.address, port);
      if (local_ports_.count(key)) continue;
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) fail(ErrorCode::runtime, "loopback: socket failed");
      int one = 1;
      ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
      sockaddr_in sa = loopback_addr(0);
      if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 || ::listen(fd, 64) != 0) {
        ::close(fd);
        fail(ErrorCode::runtime, "loopback: cannot bind listener for " + h.address + ":" + std::to_string(port));
      }
      socklen_t len = sizeof sa;
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len);
      local_ports_[key] = ntohs(sa.sin_port);
      listeners_[fd] = Listener{fd, h.address, port};
    }
  }
  char b = 1;
  (void)!::write(wake_[1], &b, 1);
}

int LoopbackTransport::local_port(const std::string& address, int port) const {
  auto it = local_ports_.find({address, port});
  return it == local_ports_.end() ? 0 : it->second;
}

void LoopbackTransport::serve_loop() {
  while (!stop_) {
    std::vector<pollfd> fds;
    std::vector<Listener> meta;
    {
      std::lock_guard lock(mutex_);
      fds.push_back({wake_[0], POLLIN, 0});
      meta.push_back({});
      for (const auto& [fd, l] : listeners_) {
        fds.push_back({fd, POLLIN, 0});
        meta.push_back(l);
      }
    }
    int r = ::poll(fds.data(), fds.size(), 500);
    if (r <= 0) continue;
    if (fds[0].revents & POLLIN) {
      char buf[64];
      (void)!::read(wake_[0], buf, sizeof buf);
    }
    for (std::size_t i = 1; i < fds.size(); ++i) {
      if (!(fds[i].revents & POLLIN)) continue;
      int client = ::accept(fds[i].fd, nullptr, nullptr);
      if (client < 0) continue;
      auto line = read_line(client);
      if (line) {
        bool malformed = looks_malformed(*line);
        auto reply = net_.serve(meta[i].address, meta[i].port, malformed ? std::string() : *line, malformed);
        if (reply) write_all(client, *reply + "\n");
      }
      ::close(client);
    }
  }
}

std::optional<std::string> LoopbackTransport::exchange(int local, const std::string& line) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) fail(ErrorCode::runtime, "loopback: socket failed");
  sockaddr_in sa = loopback_addr(local);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
    ::close(fd);
    return std::nullopt;
  }
  std::optional<std::string> reply;
  if (write_all(fd, line + "\n")) reply = read_line(fd);
  ::close(fd);
  return reply;
}

bool LoopbackTransport::reachable(const std::string& address) { return net_.reachable(address); }

bool LoopbackTransport::connect(const std::string& address, int port) {
  auto h = net_.find_device(address);
  if (!h) fail(ErrorCode::not_found, "unreachable target " + address);
  net_.record({net_.now(), std::string(kTestbedAddress), address, kTestbedPort, port, Proto::tcp, 64, 0, 0.0, "",
               Direction::to_dut});
  int local = local_port(address, port);
  // Closed ports have no listener: refused without touching the socket layer.
  if (local == 0) return false;
  bool accepted = exchange(local, "").has_value();
  if (accepted) {
    net_.record({net_.now(), address, std::string(kTestbedAddress), port, kTestbedPort, Proto::tcp,
                 net_.spec(*h).traffic.ttl, 0, 0.0, "", Direction::from_dut});
  }
  return accepted;
}

std::optional<std::string> LoopbackTransport::request(const std::string& address, int port,
                                                      const std::string& message) {
  auto h = net_.find_device(address);
  if (!h) fail(ErrorCode::not_found, "unreachable target " + address);
  auto delivery = net_.next_request_delivery(address);
  net_.record({net_.now(), std::string(kTestbedAddress), address, kTestbedPort, port, Proto::tcp, 64,
               static_cast<int>(message.size()), byte_entropy(message), "", Direction::to_dut});
  if (delivery.drop) return std::nullopt;
  int local = local_port(address, port);
  if (local == 0) return std::nullopt;
  std::string wire = message;
  if (delivery.corrupt) wire = wire.empty() ? std::string(1, '\x80') : std::string(1, static_cast<char>(wire[0] ^ 0x80)) + wire.substr(1);
  auto reply = exchange(local, wire);
  if (delivery.replay) {
    net_.record({net_.now(), std::string(kTestbedAddress), address, kTestbedPort, port, Proto::tcp, 64,
                 static_cast<int>(message.size()), byte_entropy(message), "", Direction::to_dut});
    exchange(local, message);
  }
  if (reply) {
    net_.record({net_.now(), address, std::string(kTestbedAddress), port, kTestbedPort, Proto::tcp,
                 net_.spec(*h).traffic.ttl, static_cast<int>(reply->size()), byte_entropy(*reply), "",
                 Direction::from_dut});
  }
  return reply;
}

}  // namespace iotbed::simnet
