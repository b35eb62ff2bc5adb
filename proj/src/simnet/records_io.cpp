#include "iotbed/simnet/records_io.hpp"

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::simnet {

std::string encode_capture_record(const CaptureRecord& r) {
  return text::encode_record({
      {"ts", std::to_string(r.ts)},
      {"src_addr", r.src_addr},
      {"dst_addr", r.dst_addr},
      {"src_port", std::to_string(r.src_port)},
      {"dst_port", std::to_string(r.dst_port)},
      {"proto", std::string(to_string(r.proto))},
      {"ttl", std::to_string(r.ttl)},
      {"size", std::to_string(r.size)},
      {"payload_entropy", text::format_fixed(r.payload_entropy, 6)},
      {"payload_marker", r.payload_marker.empty() ? "-" : r.payload_marker},
      {"direction", std::string(to_string(r.direction))},
  });
}

namespace {
int as_int(const text::Record& rec, const char* key) {
  auto v = text::to_int(text::field(rec, key));
  if (!v) fail(ErrorCode::parse, std::string("capture field '") + key + "' is not an integer");
  return static_cast<int>(*v);
}
}  // namespace

CaptureRecord decode_capture_record(const std::string& line) {
  auto rec = text::decode_record(line);
  CaptureRecord r;
  auto ts = text::to_int(text::field(rec, "ts"));
  if (!ts) fail(ErrorCode::parse, "capture field 'ts' is not an integer");
  r.ts = *ts;
  r.src_addr = text::field(rec, "src_addr");
  r.dst_addr = text::field(rec, "dst_addr");
  r.src_port = as_int(rec, "src_port");
  r.dst_port = as_int(rec, "dst_port");
  auto proto = proto_from_string(text::field(rec, "proto"));
  if (!proto) fail(ErrorCode::parse, "bad proto in capture record");
  r.proto = *proto;
  r.ttl = as_int(rec, "ttl");
  r.size = as_int(rec, "size");
  auto ent = text::to_double(text::field(rec, "payload_entropy"));
  if (!ent || *ent < 0 || *ent > 8) fail(ErrorCode::parse, "bad payload_entropy in capture record");
  r.payload_entropy = *ent;
  const auto& marker = text::field(rec, "payload_marker");
  r.payload_marker = marker == "-" ? "" : marker;
  auto dir = direction_from_string(text::field(rec, "direction"));
  if (!dir) fail(ErrorCode::parse, "bad direction in capture record");
  r.direction = *dir;
  if (r.size < 0) fail(ErrorCode::parse, "negative size in capture record");
  return r;
}

std::string format_capture(const std::vector<CaptureRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += encode_capture_record(r);
    out += '\n';
  }
  return out;
}

std::vector<CaptureRecord> parse_capture(const std::string& content) {
  std::vector<CaptureRecord> out;
  for (const auto& line : text::split(content, '\n')) {
    if (text::trim(line).empty()) continue;
    out.push_back(decode_capture_record(line));
  }
  return out;
}

void write_capture(const std::string& path, const std::vector<CaptureRecord>& records) {
  text::write_file(path, format_capture(records));
}

std::vector<CaptureRecord> read_capture(const std::string& path) {
  return parse_capture(text::read_file(path));
}

std::string format_status(const std::string& device, const std::vector<InternalStatusSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += text::encode_record({{"device", device},
                                {"ts", std::to_string(s.ts)},
                                {"cpu_pct", text::format_fixed(s.cpu_pct, 3)},
                                {"mem_bytes", std::to_string(s.mem_bytes)},
                                {"fs_events", std::to_string(s.fs_events)}});
    out += '\n';
  }
  return out;
}

std::vector<ContextEvent> parse_context_script(const std::string& content) {
  std::vector<ContextEvent> out;
  int line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto cols = text::split(line, ',');
    if (cols.size() < 3 || cols.size() > 4) throw ParseError(line_no, 1, "expected time_s,lat,lon[,day]");
    auto t = text::to_double(cols[0]);
    auto lat = text::to_double(cols[1]);
    auto lon = text::to_double(cols[2]);
    if (!t || !lat || !lon) throw ParseError(line_no, 1, "non-numeric context field");
    if (*lat < -90 || *lat > 90 || *lon < -180 || *lon > 180) {
      throw ParseError(line_no, 1, "latitude/longitude out of range");
    }
    ContextEvent e;
    e.time = static_cast<VirtualTime>(*t * kSecond);
    e.location = {*lat, *lon};
    if (cols.size() == 4) {
      auto day = weekday_from_string(text::lower(text::trim(cols[3])));
      if (!day) throw ParseError(line_no, 1, "unknown day '" + cols[3] + "'");
      e.day = *day;
    } else {
      e.day = static_cast<Weekday>((e.time / (86400 * kSecond)) % 7);
    }
    if (!out.empty() && e.time < out.back().time) throw ParseError(line_no, 1, "context events out of order");
    out.push_back(e);
  }
  return out;
}

std::vector<ContextEvent> load_context_script(const std::string& path) {
  return parse_context_script(text::read_file(path));
}

std::string format_context_log(const std::vector<ContextEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += text::encode_record({{"ts", std::to_string(e.time)},
                                {"lat", text::format_fixed(e.location.lat, 6)},
                                {"lon", text::format_fixed(e.location.lon, 6)},
                                {"day", std::string(to_string(e.day))}});
    out += '\n';
  }
  return out;
}

}  // namespace iotbed::simnet
