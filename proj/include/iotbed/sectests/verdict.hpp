#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iotbed::sectests {

enum class Grade {
  PASS,
  FAIL,
  UNDETECTABLE,
  UNIDENTIFIABLE,
  SAFE,
  MINOR_RISK,
  MODERATE_RISK,
  MAJOR_RISK,
  CRITICAL_RISK,
  UNSAFE,
  INDETERMINATE,
};

std::string_view to_string(Grade g);
std::optional<Grade> grade_from_string(std::string_view s);
// "Minor Risk" style label used in printed reports.
std::string_view display_name(Grade g);

// Ordering used for highest_risk: INDETERMINATE < the clean grades < MINOR
// < MODERATE < MAJOR < FAIL/UNSAFE < CRITICAL.
int severity(Grade g);
// FAIL, UNSAFE and every risk tier from MODERATE up.
bool is_failing(Grade g);

struct Verdict {
  std::string test_name;
  Grade grade = Grade::INDETERMINATE;
  std::string detail;
  std::vector<std::string> artifacts;

  bool operator==(const Verdict&) const = default;
};

}  // namespace iotbed::sectests
