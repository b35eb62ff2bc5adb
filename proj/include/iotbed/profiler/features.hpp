#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "iotbed/simnet/types.hpp"

namespace iotbed::profiler {

// Bidirectional: both directions of a flow share one key, with the
// lexicographically smaller endpoint first.
struct SessionKey {
  std::string addr_a;
  int port_a = 0;
  std::string addr_b;
  int port_b = 0;
  simnet::Proto proto = simnet::Proto::tcp;
  auto operator<=>(const SessionKey&) const = default;
};

SessionKey session_key_of(const simnet::CaptureRecord& r);

struct FeatureRow {
  int ttl = 0;
  int pkt_size = 0;
  double inter_arrival_ms = 0.0;
  bool operator==(const FeatureRow&) const = default;
};

inline constexpr std::size_t kSummaryLength = 10;
// mean/sd/min/max size, mean/sd inter-arrival, modal ttl, packet count,
// byte count, fraction of packets sent by the session initiator.
const std::array<std::string_view, kSummaryLength>& summary_feature_names();

struct SequenceInstance {
  SessionKey session_key;
  std::vector<FeatureRow> features;
  std::vector<double> summary;
  std::optional<std::string> label;
};

struct ExtractOptions {
  simnet::VirtualTime gap_timeout = 30 * simnet::kSecond;
  // Records touching any of these addresses are ignored.
  std::set<std::string> exclude_addresses;
};

std::vector<double> summarize(const std::vector<FeatureRow>& rows, double initiator_fraction);

// Sessions are ordered by their first packet.
std::vector<SequenceInstance> extract_features(const std::vector<simnet::CaptureRecord>& capture,
                                               const ExtractOptions& options = {});

}  // namespace iotbed::profiler
