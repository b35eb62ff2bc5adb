#include "iotbed/simnet/types.hpp"

#include <cmath>

#include "iotbed/common/error.hpp"

namespace iotbed::simnet {

std::string_view to_string(Proto p) { return p == Proto::tcp ? "tcp" : "udp"; }

std::optional<Proto> proto_from_string(std::string_view s) {
  if (s == "tcp") return Proto::tcp;
  if (s == "udp") return Proto::udp;
  return std::nullopt;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::to_dut: return "to_dut";
    case Direction::from_dut: return "from_dut";
    case Direction::lateral: return "lateral";
  }
  return "?";
}

std::optional<Direction> direction_from_string(std::string_view s) {
  if (s == "to_dut") return Direction::to_dut;
  if (s == "from_dut") return Direction::from_dut;
  if (s == "lateral") return Direction::lateral;
  return std::nullopt;
}

namespace {
constexpr std::string_view kDays[] = {"monday", "tuesday", "wednesday", "thursday",
                                      "friday", "saturday", "sunday"};
}

std::string_view to_string(Weekday d) { return kDays[static_cast<int>(d)]; }

std::optional<Weekday> weekday_from_string(std::string_view s) {
  for (int i = 0; i < 7; ++i) {
    if (kDays[i] == s) return static_cast<Weekday>(i);
  }
  return std::nullopt;
}

double distance_m(GeoPoint a, GeoPoint b) {
  constexpr double kEarthRadius = 6371000.0;
  constexpr double kRad = M_PI / 180.0;
  double dlat = (b.lat - a.lat) * kRad;
  double dlon = (b.lon - a.lon) * kRad;
  double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

void ContextPredicate::validate() const {
  if (!center && !time_window) {
    fail(ErrorCode::validation, "context predicate needs a location or time clause");
  }
  if (center) {
    if (!(radius_m > 0)) fail(ErrorCode::validation, "trigger radius must be positive");
    if (center->lat < -90 || center->lat > 90 || center->lon < -180 || center->lon > 180) {
      fail(ErrorCode::validation, "trigger center out of range");
    }
  }
  if (time_window && time_window->first > time_window->second) {
    fail(ErrorCode::validation, "trigger time window is reversed");
  }
}

bool ContextPredicate::matches(const ContextEvent& e) const {
  if (center && distance_m(*center, e.location) > radius_m) return false;
  if (time_window && (e.time < time_window->first || e.time > time_window->second)) return false;
  return center.has_value() || time_window.has_value();
}

}  // namespace iotbed::simnet
