#include "iotbed/sectests/databases.hpp"

#include <cctype>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::sectests {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::low: return "low";
    case Severity::significant: return "significant";
    case Severity::critical: return "critical";
  }
  return "low";
}

std::optional<Severity> severity_from_string(std::string_view s) {
  std::string v = text::lower(s);
  if (v == "low") return Severity::low;
  if (v == "significant") return Severity::significant;
  if (v == "critical") return Severity::critical;
  return std::nullopt;
}

int compare_versions(std::string_view a, std::string_view b) {
  auto pa = text::split(a, '.');
  auto pb = text::split(b, '.');
  std::size_t n = std::max(pa.size(), pb.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string x = i < pa.size() ? pa[i] : "0";
    std::string y = i < pb.size() ? pb[i] : "0";
    auto nx = text::to_int(x);
    auto ny = text::to_int(y);
    if (nx && ny) {
      if (*nx != *ny) return *nx < *ny ? -1 : 1;
    } else if (x != y) {
      return x < y ? -1 : 1;
    }
  }
  return 0;
}

VersionRange VersionRange::parse(std::string_view raw) {
  VersionRange r;
  std::string s = text::trim(raw);
  r.text_ = s;
  if (s.empty()) fail(ErrorCode::validation, "empty version range");
  if (s == "*") {
    r.any_ = true;
    return r;
  }
  auto check = [&](const std::string& v) {
    if (v.empty()) fail(ErrorCode::validation, "malformed version range '" + s + "'");
    for (char c : v) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') {
        fail(ErrorCode::validation, "malformed version range '" + s + "'");
      }
    }
    return v;
  };
  if (auto dots = s.find(".."); dots != std::string::npos) {
    r.lo_ = check(text::trim(s.substr(0, dots)));
    r.hi_ = check(text::trim(s.substr(dots + 2)));
    if (compare_versions(r.lo_, r.hi_) > 0) fail(ErrorCode::validation, "inverted version range '" + s + "'");
  } else if (text::starts_with(s, "<=")) {
    r.hi_ = check(text::trim(s.substr(2)));
  } else if (text::starts_with(s, ">=")) {
    r.lo_ = check(text::trim(s.substr(2)));
  } else if (s[0] == '<') {
    r.hi_ = check(text::trim(s.substr(1)));
    r.hi_inclusive_ = false;
  } else if (s[0] == '>') {
    r.lo_ = check(text::trim(s.substr(1)));
    r.lo_inclusive_ = false;
  } else {
    r.lo_ = r.hi_ = check(s);
  }
  return r;
}

bool VersionRange::contains(std::string_view version) const {
  if (any_) return true;
  if (!lo_.empty()) {
    int c = compare_versions(version, lo_);
    if (c < 0 || (c == 0 && !lo_inclusive_)) return false;
  }
  if (!hi_.empty()) {
    int c = compare_versions(version, hi_);
    if (c > 0 || (c == 0 && !hi_inclusive_)) return false;
  }
  return true;
}

namespace {

// Splits `line` into exactly `n` fields; extra commas belong to the last one.
std::vector<std::string> csv_fields(const std::string& line, std::size_t n, int line_no) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (out.size() + 1 < n) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) throw ParseError(line_no, 1, "expected " + std::to_string(n) + " fields");
    out.push_back(text::trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  out.push_back(text::trim(line.substr(start)));
  return out;
}

template <typename F>
void for_each_line(const std::string& content, F&& f) {
  int line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    f(line, line_no);
  }
}

}  // namespace

VulnDb parse_vuln_db(const std::string& content) {
  VulnDb db;
  for_each_line(content, [&](const std::string& line, int line_no) {
    auto f = csv_fields(line, 5, line_no);
    auto sev = severity_from_string(f[3]);
    if (!sev) throw ParseError(line_no, 1, "unknown severity '" + f[3] + "'");
    if (f[0].empty() || f[2].empty()) throw ParseError(line_no, 1, "device_type and vuln_id are required");
    VulnRecord r;
    r.device_type = f[0];
    try {
      r.version_range = VersionRange::parse(f[1]);
    } catch (const Error& e) {
      throw ParseError(line_no, 1, e.what());
    }
    r.vuln_id = f[2];
    r.severity = *sev;
    r.description = f[4];
    db.records.push_back(std::move(r));
  });
  return db;
}

VulnDb load_vuln_db(const std::string& path) { return parse_vuln_db(text::read_file(path)); }

AttackDb parse_attack_db(const std::string& content) {
  AttackDb db;
  for_each_line(content, [&](const std::string& line, int line_no) {
    auto f = csv_fields(line, 5, line_no);
    auto sev = severity_from_string(f[1]);
    if (!sev) throw ParseError(line_no, 1, "unknown severity '" + f[1] + "'");
    if (f[0].empty() || f[3].empty()) throw ParseError(line_no, 1, "probe_id and payload_hex are required");
    if (f[3].size() % 2 != 0) throw ParseError(line_no, 1, "payload_hex has odd length");
    for (char c : f[3]) {
      if (!std::isxdigit(static_cast<unsigned char>(c))) throw ParseError(line_no, 1, "payload_hex is not hex");
    }
    db.probes.push_back({f[0], *sev, f[2].empty() ? "*" : f[2], text::lower(f[3]), f[4]});
  });
  return db;
}

AttackDb load_attack_db(const std::string& path) { return parse_attack_db(text::read_file(path)); }

}  // namespace iotbed::sectests
