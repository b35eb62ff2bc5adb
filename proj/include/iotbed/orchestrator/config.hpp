#pragma once

#include <string>

namespace iotbed::orchestrator {

enum class Backend { memory, loopback };
std::string_view to_string(Backend b);

// Paths are absolute after loading (relative ones resolve against the
// config file's directory). Empty optional paths mean "use built-ins".
struct Config {
  std::string registry_dir = "registry";
  std::string runs_dir = "runs";
  std::string score_list;
  std::string vuln_db;
  std::string attack_db;
  double k = 3.0;
  double window_s = 5.0;
  Backend backend = Backend::memory;
};

// `key = value` lines. Unknown keys are an Error(validation).
Config parse_config(const std::string& content, const std::string& base_dir);
Config load_config(const std::string& path);

// Explicit path, else $IOTBED_CONFIG, else ./iotbed.conf when present, else
// defaults relative to the working directory.
Config resolve_config(const std::string& explicit_path);

}  // namespace iotbed::orchestrator
