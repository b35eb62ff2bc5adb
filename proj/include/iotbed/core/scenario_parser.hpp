#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "iotbed/core/model.hpp"

namespace iotbed::core {

// Named test and scenario definitions available to `use:` references.
// Test templates come from `template <name>` blocks; a file with a
// `scenario:` header registers as a scenario template under that name.
class TemplateLibrary {
 public:
  void add_text(std::string_view text);
  void add_file(const std::string& path);
  void add_directory(const std::string& dir);  // every *.tpl / *.scn file

  bool empty() const { return tests_.empty() && scenarios_.empty(); }

 private:
  friend class ScenarioReader;
  std::map<std::string, std::vector<std::string>> tests_;      // raw body lines
  std::map<std::string, std::string> scenarios_;              // raw text
};

Scenario parse_scenario(std::string_view config_text,
                        const TemplateLibrary* library = nullptr);

// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

// Parses a params block including its braces, e.g. `{trajectory.cfg}` or
// `{target=dut1, delay_ms=500}`.
Params parse_params(std::string_view text, int line = 1, int column = 1);

Action parse_action(std::string_view text, int line = 1, int column = 1);

}  // namespace iotbed::core
