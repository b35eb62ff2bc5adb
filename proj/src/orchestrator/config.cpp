#include "iotbed/orchestrator/config.hpp"

#include <cstdlib>
#include <filesystem>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace fs = std::filesystem;

namespace iotbed::orchestrator {

std::string_view to_string(Backend b) { return b == Backend::loopback ? "loopback" : "memory"; }

namespace {
std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base) / path;
  return path.lexically_normal().string();
}
}  // namespace

Config parse_config(const std::string& content, const std::string& base_dir) {
  Config c;
  auto kv = text::parse_key_values(content);
  for (const auto& [key, value] : kv) {
    if (key == "registry_dir") {
      c.registry_dir = value;
    } else if (key == "runs_dir") {
      c.runs_dir = value;
    } else if (key == "score_list") {
      c.score_list = value;
    } else if (key == "vuln_db") {
      c.vuln_db = value;
    } else if (key == "attack_db") {
      c.attack_db = value;
    } else if (key == "k" || key == "window_s") {
      auto v = text::to_double(value);
      if (!v || *v <= 0) fail(ErrorCode::validation, "config: " + key + " must be a positive number");
      (key == "k" ? c.k : c.window_s) = *v;
    } else if (key == "backend") {
      if (value == "memory") {
        c.backend = Backend::memory;
      } else if (value == "loopback") {
        c.backend = Backend::loopback;
      } else {
        fail(ErrorCode::validation, "config: backend must be 'memory' or 'loopback'");
      }
    } else {
      fail(ErrorCode::validation, "config: unknown key '" + key + "'");
    }
  }
  c.registry_dir = resolve(base_dir, c.registry_dir);
  c.runs_dir = resolve(base_dir, c.runs_dir);
  c.score_list = resolve(base_dir, c.score_list);
  c.vuln_db = resolve(base_dir, c.vuln_db);
  c.attack_db = resolve(base_dir, c.attack_db);
  return c;
}

Config load_config(const std::string& path) {
  auto base = fs::absolute(path).parent_path().string();
  return parse_config(text::read_file(path), base);
}

Config resolve_config(const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_config(explicit_path);
  if (const char* env = std::getenv("IOTBED_CONFIG"); env && *env) return load_config(env);
  if (fs::exists("iotbed.conf")) return load_config("iotbed.conf");
  return parse_config("", fs::current_path().string());
}

}  // namespace iotbed::orchestrator
