#include "iotbed/profiler/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace iotbed::profiler {

SessionKey session_key_of(const simnet::CaptureRecord& r) {
  auto a = std::make_pair(r.src_addr, r.src_port);
  auto b = std::make_pair(r.dst_addr, r.dst_port);
  if (b < a) std::swap(a, b);
  return SessionKey{a.first, a.second, b.first, b.second, r.proto};
}

const std::array<std::string_view, kSummaryLength>& summary_feature_names() {
  static const std::array<std::string_view, kSummaryLength> names{
      "size_mean", "size_sd", "size_min", "size_max", "iat_mean",
      "iat_sd",    "ttl_mode", "pkt_count", "byte_count", "initiator_ratio"};
  return names;
}

namespace {

// Population standard deviation.
std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

std::vector<double> summarize(const std::vector<FeatureRow>& rows, double initiator_fraction) {
  std::vector<double> sizes, iats;
  std::map<int, int> ttl_counts;
  double bytes = 0;
  for (const auto& r : rows) {
    sizes.push_back(r.pkt_size);
    iats.push_back(r.inter_arrival_ms);
    ++ttl_counts[r.ttl];
    bytes += r.pkt_size;
  }
  auto [smean, ssd] = mean_sd(sizes);
  auto [imean, isd] = mean_sd(iats);
  int mode = 0, best = -1;
  for (const auto& [ttl, n] : ttl_counts) {
    if (n > best) {  // ties go to the smaller ttl
      best = n;
      mode = ttl;
    }
  }
  double smin = sizes.empty() ? 0 : *std::min_element(sizes.begin(), sizes.end());
  double smax = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  return {smean, ssd, smin, smax, imean, isd, static_cast<double>(mode), static_cast<double>(rows.size()), bytes,
          initiator_fraction};
}

std::vector<SequenceInstance> extract_features(const std::vector<simnet::CaptureRecord>& capture,
                                               const ExtractOptions& options) {
  struct Open {
    SequenceInstance inst;
    std::string initiator;
    int from_initiator = 0;
    simnet::VirtualTime last = 0;
    simnet::VirtualTime first = 0;
    std::size_t order = 0;
  };
  std::vector<Open> done;
  std::map<SessionKey, Open> open;
  std::size_t order = 0;
  auto close = [&](Open&& o) {
    double frac = static_cast<double>(o.from_initiator) / static_cast<double>(o.inst.features.size());
    o.inst.summary = summarize(o.inst.features, frac);
    done.push_back(std::move(o));
  };
  for (const auto& r : capture) {
    if (options.exclude_addresses.count(r.src_addr) || options.exclude_addresses.count(r.dst_addr)) continue;
    SessionKey key = session_key_of(r);
    auto it = open.find(key);
    if (it != open.end() && r.ts - it->second.last > options.gap_timeout) {
      close(std::move(it->second));
      open.erase(it);
      it = open.end();
    }
    if (it == open.end()) {
      Open o;
      o.inst.session_key = key;
      o.initiator = r.src_addr + ":" + std::to_string(r.src_port);
      o.first = r.ts;
      o.last = r.ts;
      o.order = order++;
      it = open.emplace(key, std::move(o)).first;
    }
    Open& o = it->second;
    double iat = o.inst.features.empty() ? 0.0 : simnet::to_ms(std::max<simnet::VirtualTime>(0, r.ts - o.last));
    o.inst.features.push_back({r.ttl, r.size, iat});
    if (o.initiator == r.src_addr + ":" + std::to_string(r.src_port)) ++o.from_initiator;
    o.last = r.ts;
  }
  for (auto& [key, o] : open) close(std::move(o));
  std::sort(done.begin(), done.end(), [](const Open& a, const Open& b) {
    return a.first != b.first ? a.first < b.first : a.order < b.order;
  });
  std::vector<SequenceInstance> out;
  out.reserve(done.size());
  for (auto& o : done) out.push_back(std::move(o.inst));
  return out;
}

}  // namespace iotbed::profiler
