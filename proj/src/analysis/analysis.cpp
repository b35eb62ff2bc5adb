#include "iotbed/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::analysis {

using simnet::kSecond;

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::network: return "network";
    case Channel::cpu: return "cpu";
    case Channel::memory: return "memory";
    case Channel::filesystem: return "filesystem";
  }
  return "network";
}

std::optional<Channel> channel_from_string(std::string_view s) {
  for (Channel c : kChannels) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Corroboration c) {
  return c == Corroboration::network_plus_status ? "network_plus_status" : "network_only";
}

std::string_view to_string(Classification c) {
  return c == Classification::attack ? "attack" : "possible_false_alarm";
}

std::size_t WindowSeries::size() const {
  auto it = values.find(Channel::network);
  return it == values.end() ? 0 : it->second.size();
}

WindowSeries window_series(const std::vector<simnet::CaptureRecord>& capture,
                           const std::vector<simnet::InternalStatusSample>& status, const std::string& address,
                           VirtualTime start, VirtualTime end, VirtualTime window) {
  if (window <= 0) fail(ErrorCode::invalid_argument, "window must be positive");
  WindowSeries s;
  s.start = start;
  s.window = window;
  std::size_t n = end > start ? static_cast<std::size_t>((end - start) / window) : 0;
  for (Channel c : kChannels) s.values[c].assign(n, 0.0);
  auto slot = [&](VirtualTime t) -> std::optional<std::size_t> {
    if (t < start) return std::nullopt;
    auto i = static_cast<std::size_t>((t - start) / window);
    if (i >= n) return std::nullopt;
    return i;
  };
  for (const auto& r : capture) {
    if (r.src_addr != address || r.dst_addr == simnet::kTestbedAddress) continue;
    if (auto i = slot(r.ts)) s.values[Channel::network][*i] += 1.0;
  }
  std::vector<int> samples(n, 0);
  for (const auto& st : status) {
    auto i = slot(st.ts);
    if (!i) continue;
    ++samples[*i];
    s.values[Channel::cpu][*i] += st.cpu_pct;
    s.values[Channel::memory][*i] += static_cast<double>(st.mem_bytes);
    s.values[Channel::filesystem][*i] += st.fs_events;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i] == 0) {
      s.values[Channel::cpu][i] = nan;
      s.values[Channel::memory][i] = nan;
      s.values[Channel::filesystem][i] = nan;
      continue;
    }
    s.values[Channel::cpu][i] /= samples[i];
    s.values[Channel::memory][i] /= samples[i];
  }
  return s;
}

BaselineModel build_baseline(const WindowSeries& observed) {
  if (observed.size() < 3) {
    fail(ErrorCode::validation, "insufficient data: baseline needs at least 3 windows, got " +
                                    std::to_string(observed.size()));
  }
  BaselineModel b;
  b.window = observed.window;
  for (Channel c : kChannels) {
    ChannelStats st;
    double sum = 0.0;
    auto it = observed.values.find(c);
    if (it == observed.values.end()) continue;
    for (double v : it->second) {
      if (std::isnan(v)) continue;
      sum += v;
      ++st.windows;
    }
    if (st.windows == 0) continue;
    st.mean = sum / static_cast<double>(st.windows);
    double ss = 0.0;
    for (double v : it->second) {
      if (!std::isnan(v)) ss += (v - st.mean) * (v - st.mean);
    }
    st.stddev = std::sqrt(ss / static_cast<double>(st.windows));
    b.channels[c] = st;
  }
  return b;
}

BaselineModel build_baseline(const std::vector<simnet::CaptureRecord>& capture,
                             const std::vector<simnet::InternalStatusSample>& status, const std::string& address,
                             VirtualTime start, VirtualTime end, VirtualTime window) {
  return build_baseline(window_series(capture, status, address, start, end, window));
}

double Floors::of(Channel c) const {
  switch (c) {
    case Channel::network: return network;
    case Channel::cpu: return cpu;
    case Channel::memory: return memory;
    case Channel::filesystem: return filesystem;
  }
  return 0.0;
}

double threshold_for(const ChannelStats& s, double k, double floor) { return s.mean + k * s.stddev + floor; }

std::vector<AnomalyEvent> detect_anomalies(const WindowSeries& observed, const BaselineModel& baseline, double k,
                                           const Floors& floors) {
  if (!(k > 0)) fail(ErrorCode::invalid_argument, "k must be positive");
  if (observed.window != baseline.window) fail(ErrorCode::validation, "channel mismatch: window sizes differ");
  std::vector<AnomalyEvent> events;
  for (const auto& [channel, values] : observed.values) {
    auto bit = baseline.channels.find(channel);
    if (bit == baseline.channels.end()) {
      bool any = std::any_of(values.begin(), values.end(), [](double v) { return !std::isnan(v); });
      if (any) fail(ErrorCode::validation, "channel mismatch: no baseline for " + std::string(to_string(channel)));
      continue;
    }
    double thr = threshold_for(bit->second, k, floors.of(channel));
    if (!std::isfinite(thr)) continue;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double v = values[i];
      if (std::isnan(v) || !(v > thr)) continue;
      VirtualTime t0 = observed.start + static_cast<VirtualTime>(i) * observed.window;
      events.push_back({channel, t0, t0 + observed.window, v, thr,
                        std::string(to_string(channel)) + " " + text::format_fixed(v, 2) + " > threshold " +
                            text::format_fixed(thr, 2)});
    }
  }
  return merge_events(std::move(events));
}

std::vector<AnomalyEvent> merge_events(std::vector<AnomalyEvent> events) {
  std::stable_sort(events.begin(), events.end(), [](const AnomalyEvent& a, const AnomalyEvent& b) {
    if (a.channel != b.channel) return a.channel < b.channel;
    return a.t_start < b.t_start;
  });
  std::vector<AnomalyEvent> out;
  for (auto& e : events) {
    if (!out.empty() && out.back().channel == e.channel && e.t_start <= out.back().t_end) {
      auto& m = out.back();
      m.t_end = std::max(m.t_end, e.t_end);
      if (e.magnitude > m.magnitude) {
        m.magnitude = e.magnitude;
        m.description = e.description;
      }
      m.threshold = std::max(m.threshold, e.threshold);
      continue;
    }
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(), [](const AnomalyEvent& a, const AnomalyEvent& b) {
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.channel < b.channel;
  });
  return out;
}

std::vector<AttackFinding> correlate(const std::vector<AnomalyEvent>& anomalies,
                                     const std::vector<simnet::ContextEvent>& context_log,
                                     const CorrelateOptions& options) {
  std::vector<AttackFinding> out;
  for (const auto& a : anomalies) {
    if (a.channel != Channel::network) continue;
    AttackFinding f;
    f.windows.push_back({a.t_start, a.t_end});
    f.magnitude = a.magnitude;
    VirtualTime mid = a.t_start + (a.t_end - a.t_start) / 2;
    f.virtual_time = mid;
    const simnet::ContextEvent* nearest = nullptr;
    VirtualTime best = 0;
    for (const auto& e : context_log) {
      VirtualTime d = e.time > mid ? e.time - mid : mid - e.time;
      if (!nearest || d < best) {
        nearest = &e;
        best = d;
      }
    }
    VirtualTime allowed = std::max(options.max_context_gap, (a.t_end - a.t_start) / 2);
    if (nearest && best <= allowed) {
      f.location = nearest->location;
      f.day = nearest->day;
      f.virtual_time = nearest->time;
    } else {
      f.context_gap = true;
    }
    for (const auto& s : anomalies) {
      if (s.channel != Channel::cpu && s.channel != Channel::memory) continue;
      if (s.t_start <= a.t_end + options.window && s.t_end >= a.t_start - options.window) {
        f.corroboration = Corroboration::network_plus_status;
        f.windows.push_back({s.t_start, s.t_end});
      }
    }
    f.classification = f.corroboration == Corroboration::network_plus_status ? Classification::attack
                                                                             : Classification::possible_false_alarm;
    out.push_back(std::move(f));
  }
  return out;
}

std::string encode_finding(const AttackFinding& f) {
  std::vector<std::string> windows;
  for (const auto& [a, b] : f.windows) windows.push_back(std::to_string(a) + "-" + std::to_string(b));
  return text::encode_record({
      {"device", f.device},
      {"classification", std::string(to_string(f.classification))},
      {"corroboration", std::string(to_string(f.corroboration))},
      {"ts", std::to_string(f.virtual_time)},
      {"lat", f.location ? text::format_fixed(f.location->lat, 6) : "-"},
      {"lon", f.location ? text::format_fixed(f.location->lon, 6) : "-"},
      {"day", f.day ? std::string(simnet::to_string(*f.day)) : "-"},
      {"context_gap", f.context_gap ? "yes" : "no"},
      {"magnitude", text::format_fixed(f.magnitude, 2)},
      {"windows", text::join(windows, ",")},
  });
}

AttackFinding decode_finding(const std::string& line) {
  auto rec = text::decode_record(line);
  AttackFinding f;
  f.device = text::field(rec, "device");
  f.classification = text::field(rec, "classification") == "attack" ? Classification::attack
                                                                    : Classification::possible_false_alarm;
  f.corroboration = text::field(rec, "corroboration") == "network_plus_status" ? Corroboration::network_plus_status
                                                                               : Corroboration::network_only;
  auto ts = text::to_int(text::field(rec, "ts"));
  if (!ts) fail(ErrorCode::parse, "bad finding ts");
  f.virtual_time = *ts;
  const auto& lat = text::field(rec, "lat");
  const auto& lon = text::field(rec, "lon");
  if (lat != "-") {
    auto a = text::to_double(lat);
    auto b = text::to_double(lon);
    if (!a || !b) fail(ErrorCode::parse, "bad finding location");
    f.location = simnet::GeoPoint{*a, *b};
  }
  if (const auto& day = text::field(rec, "day"); day != "-") f.day = simnet::weekday_from_string(day);
  f.context_gap = text::field(rec, "context_gap") == "yes";
  f.magnitude = text::to_double(text::field(rec, "magnitude")).value_or(0.0);
  for (const auto& w : text::split(text::field(rec, "windows"), ',')) {
    auto dash = w.find('-', 1);
    if (dash == std::string::npos) continue;
    auto a = text::to_int(w.substr(0, dash));
    auto b = text::to_int(w.substr(dash + 1));
    if (a && b) f.windows.push_back({*a, *b});
  }
  return f;
}

std::string encode_anomaly(const std::string& device, const AnomalyEvent& a) {
  return text::encode_record({{"device", device},
                              {"channel", std::string(to_string(a.channel))},
                              {"t_start", std::to_string(a.t_start)},
                              {"t_end", std::to_string(a.t_end)},
                              {"magnitude", text::format_fixed(a.magnitude, 3)},
                              {"threshold", text::format_fixed(a.threshold, 3)},
                              {"description", a.description}});
}

std::string format_window_table(const std::string& device, const WindowSeries& s, const BaselineModel& b, double k,
                                const Floors& floors) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    text::Record rec{{"device", device},
                     {"t_start", std::to_string(s.start + static_cast<VirtualTime>(i) * s.window)}};
    for (Channel c : kChannels) {
      double v = s.values.at(c)[i];
      rec.push_back({std::string(to_string(c)), std::isnan(v) ? "-" : text::format_fixed(v, 3)});
      auto bit = b.channels.find(c);
      if (bit != b.channels.end()) {
        rec.push_back({std::string(to_string(c)) + "_thr", text::format_fixed(threshold_for(bit->second, k, floors.of(c)), 3)});
      }
    }
    out += text::encode_record(rec) + "\n";
  }
  return out;
}

}  // namespace iotbed::analysis
