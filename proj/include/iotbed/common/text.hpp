#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iotbed::text {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with(std::string_view s, std::string_view prefix);
std::string lower(std::string_view s);

std::optional<double> to_double(std::string_view s);
std::optional<std::int64_t> to_int(std::string_view s);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

// Record lines: tab-separated `key=value` fields. Backslash, tab, CR and LF
// in values are backslash-escaped.
std::string escape(std::string_view v);
std::string unescape(std::string_view v);

using Record = std::vector<std::pair<std::string, std::string>>;

std::string encode_record(const Record& fields);
Record decode_record(std::string_view line);
// Lookup in a decoded record; throws Error(parse) when the key is absent.
const std::string& field(const Record& rec, std::string_view key);
std::optional<std::string> find_field(const Record& rec, std::string_view key);

// `key = value` configuration text; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::string_view content);

std::string read_file(const std::string& path);
// Writes atomically through a temp file and rename.
void write_file(const std::string& path, std::string_view content);

}  // namespace iotbed::text
