#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iotbed::sectests {

enum class Severity { low, significant, critical };
std::string_view to_string(Severity s);
std::optional<Severity> severity_from_string(std::string_view s);

// Dotted versions compare numerically per component; non-numeric
// components compare as text. Missing components count as 0.
int compare_versions(std::string_view a, std::string_view b);

// `*`, `1.2` (exact), `<1.2`, `<=1.2`, `>1.2`, `>=1.2`, or `1.0..2.0`
// (inclusive both ends).
class VersionRange {
 public:
  static VersionRange parse(std::string_view text);
  bool contains(std::string_view version) const;
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::string lo_, hi_;
  bool lo_inclusive_ = true, hi_inclusive_ = true;
  bool any_ = false;
};

struct VulnRecord {
  // `type` matches the device's OS version; `type/app` matches that app.
  // Either part may be `*`.
  std::string device_type;
  VersionRange version_range;
  std::string vuln_id;
  Severity severity = Severity::low;
  std::string description;
};

struct VulnDb {
  std::vector<VulnRecord> records;
};

VulnDb parse_vuln_db(const std::string& content);
VulnDb load_vuln_db(const std::string& path);

struct AttackProbe {
  std::string probe_id;
  Severity severity = Severity::low;
  std::string service_match;  // `*`, a port number or a service protocol name
  std::string payload_hex;
  std::string expected_safe_signature;
};

struct AttackDb {
  std::vector<AttackProbe> probes;
};

AttackDb parse_attack_db(const std::string& content);
AttackDb load_attack_db(const std::string& path);

}  // namespace iotbed::sectests
