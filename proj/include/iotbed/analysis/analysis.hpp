#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iotbed/simnet/network.hpp"
#include "iotbed/simnet/types.hpp"

namespace iotbed::analysis {

using simnet::VirtualTime;

enum class Channel { network, cpu, memory, filesystem };
std::string_view to_string(Channel c);
std::optional<Channel> channel_from_string(std::string_view s);
inline constexpr Channel kChannels[] = {Channel::network, Channel::cpu, Channel::memory, Channel::filesystem};

// Per-window statistics over [start, start + n*window).
// network: records sent by the device (testbed exchanges excluded);
// cpu/memory: mean of the samples in the window; filesystem: sum of events.
// A window without status samples gets NaN on the status channels.
struct WindowSeries {
  VirtualTime start = 0;
  VirtualTime window = 0;
  std::map<Channel, std::vector<double>> values;

  std::size_t size() const;
};

WindowSeries window_series(const std::vector<simnet::CaptureRecord>& capture,
                           const std::vector<simnet::InternalStatusSample>& status, const std::string& address,
                           VirtualTime start, VirtualTime end, VirtualTime window);

struct ChannelStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t windows = 0;
};

struct BaselineModel {
  VirtualTime window = 0;
  std::map<Channel, ChannelStats> channels;
};

// Throws Error(validation) "insufficient data" with fewer than 3 windows.
BaselineModel build_baseline(const WindowSeries& observed);
BaselineModel build_baseline(const std::vector<simnet::CaptureRecord>& capture,
                             const std::vector<simnet::InternalStatusSample>& status, const std::string& address,
                             VirtualTime start, VirtualTime end, VirtualTime window);

struct Floors {
  double network = 10.0;
  double cpu = 5.0;
  double memory = 1024.0 * 1024.0;
  double filesystem = 5.0;
  double of(Channel c) const;
};

struct AnomalyEvent {
  Channel channel = Channel::network;
  VirtualTime t_start = 0;
  VirtualTime t_end = 0;
  double magnitude = 0.0;   // peak window statistic
  double threshold = 0.0;
  std::string description;
  bool operator==(const AnomalyEvent&) const = default;
};

double threshold_for(const ChannelStats& s, double k, double floor);

// Throws Error(validation) on a window-size or channel mismatch and
// Error(invalid_argument) for k <= 0.
std::vector<AnomalyEvent> detect_anomalies(const WindowSeries& observed, const BaselineModel& baseline, double k,
                                           const Floors& floors = {});

// Merges same-channel events that touch or overlap. Idempotent.
std::vector<AnomalyEvent> merge_events(std::vector<AnomalyEvent> events);

enum class Corroboration { network_only, network_plus_status };
enum class Classification { attack, possible_false_alarm };
std::string_view to_string(Corroboration c);
std::string_view to_string(Classification c);

struct AttackFinding {
  std::string device;
  std::vector<std::pair<VirtualTime, VirtualTime>> windows;
  std::optional<simnet::GeoPoint> location;
  std::optional<simnet::Weekday> day;
  VirtualTime virtual_time = 0;
  Corroboration corroboration = Corroboration::network_only;
  Classification classification = Classification::possible_false_alarm;
  bool context_gap = false;
  double magnitude = 0.0;
};

struct CorrelateOptions {
  VirtualTime window = 5 * simnet::kSecond;  // slack for status overlap
  VirtualTime max_context_gap = 5 * simnet::kSecond;
};

// One finding per network anomaly, in input order.
std::vector<AttackFinding> correlate(const std::vector<AnomalyEvent>& anomalies,
                                     const std::vector<simnet::ContextEvent>& context_log,
                                     const CorrelateOptions& options = {});

std::string encode_finding(const AttackFinding& f);
AttackFinding decode_finding(const std::string& line);
std::string encode_anomaly(const std::string& device, const AnomalyEvent& a);
// Lines of per-window statistics for manual exploration.
std::string format_window_table(const std::string& device, const WindowSeries& s, const BaselineModel& b, double k,
                                const Floors& floors = {});

}  // namespace iotbed::analysis
