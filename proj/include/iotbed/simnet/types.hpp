#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace iotbed::simnet {

// Virtual clock instant in microseconds since the start of a run.
using VirtualTime = std::int64_t;
inline constexpr VirtualTime kMillisecond = 1000;
inline constexpr VirtualTime kSecond = 1000 * kMillisecond;

inline VirtualTime from_ms(double ms) { return static_cast<VirtualTime>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5)); }
inline double to_ms(VirtualTime t) { return static_cast<double>(t) / 1000.0; }
inline double to_seconds(VirtualTime t) { return static_cast<double>(t) / 1e6; }

enum class Proto { tcp, udp };
enum class Direction { to_dut, from_dut, lateral };

std::string_view to_string(Proto p);
std::string_view to_string(Direction d);
std::optional<Proto> proto_from_string(std::string_view s);
std::optional<Direction> direction_from_string(std::string_view s);

struct CaptureRecord {
  VirtualTime ts = 0;
  std::string src_addr;
  std::string dst_addr;
  int src_port = 0;
  int dst_port = 0;
  Proto proto = Proto::tcp;
  int ttl = 64;
  int size = 0;                  // payload bytes
  double payload_entropy = 0.0;  // bits per byte
  std::string payload_marker;    // empty when none
  Direction direction = Direction::to_dut;

  bool operator==(const CaptureRecord&) const = default;
};

enum class Weekday { monday, tuesday, wednesday, thursday, friday, saturday, sunday };
std::string_view to_string(Weekday d);
std::optional<Weekday> weekday_from_string(std::string_view s);

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

// Great-circle distance in metres.
double distance_m(GeoPoint a, GeoPoint b);

struct ContextEvent {
  VirtualTime time = 0;
  GeoPoint location;
  Weekday day = Weekday::monday;
  bool operator==(const ContextEvent&) const = default;
};

// Conjunction of the clauses that are present.
struct ContextPredicate {
  std::optional<GeoPoint> center;
  double radius_m = 0.0;
  std::optional<std::pair<VirtualTime, VirtualTime>> time_window;

  void validate() const;
  bool matches(const ContextEvent& e) const;
};

struct InternalStatusSample {
  VirtualTime ts = 0;
  double cpu_pct = 0.0;
  std::int64_t mem_bytes = 0;
  int fs_events = 0;
  bool operator==(const InternalStatusSample&) const = default;
};

}  // namespace iotbed::simnet
