#include "iotbed/sectests/verdict.hpp"

#include <array>
#include <utility>

namespace iotbed::sectests {

namespace {
constexpr std::array<std::pair<Grade, std::string_view>, 11> kNames{{
    {Grade::PASS, "PASS"},
    {Grade::FAIL, "FAIL"},
    {Grade::UNDETECTABLE, "UNDETECTABLE"},
    {Grade::UNIDENTIFIABLE, "UNIDENTIFIABLE"},
    {Grade::SAFE, "SAFE"},
    {Grade::MINOR_RISK, "MINOR_RISK"},
    {Grade::MODERATE_RISK, "MODERATE_RISK"},
    {Grade::MAJOR_RISK, "MAJOR_RISK"},
    {Grade::CRITICAL_RISK, "CRITICAL_RISK"},
    {Grade::UNSAFE, "UNSAFE"},
    {Grade::INDETERMINATE, "INDETERMINATE"},
}};
}  // namespace

std::string_view to_string(Grade g) {
  for (const auto& [grade, name] : kNames) {
    if (grade == g) return name;
  }
  return "INDETERMINATE";
}

std::optional<Grade> grade_from_string(std::string_view s) {
  for (const auto& [grade, name] : kNames) {
    if (name == s) return grade;
  }
  return std::nullopt;
}

std::string_view display_name(Grade g) {
  switch (g) {
    case Grade::PASS: return "Pass";
    case Grade::FAIL: return "Fail";
    case Grade::UNDETECTABLE: return "Undetectable";
    case Grade::UNIDENTIFIABLE: return "Unidentifiable";
    case Grade::SAFE: return "Safe";
    case Grade::MINOR_RISK: return "Minor Risk";
    case Grade::MODERATE_RISK: return "Moderate Risk";
    case Grade::MAJOR_RISK: return "Major Risk";
    case Grade::CRITICAL_RISK: return "Critical Risk";
    case Grade::UNSAFE: return "Unsafe";
    case Grade::INDETERMINATE: return "Indeterminate";
  }
  return "Indeterminate";
}

int severity(Grade g) {
  switch (g) {
    case Grade::INDETERMINATE: return 0;
    case Grade::UNDETECTABLE:
    case Grade::UNIDENTIFIABLE:
    case Grade::PASS:
    case Grade::SAFE: return 1;
    case Grade::MINOR_RISK: return 2;
    case Grade::MODERATE_RISK: return 3;
    case Grade::MAJOR_RISK: return 4;
    case Grade::FAIL:
    case Grade::UNSAFE: return 5;
    case Grade::CRITICAL_RISK: return 6;
  }
  return 0;
}

bool is_failing(Grade g) { return severity(g) >= severity(Grade::MODERATE_RISK); }

}  // namespace iotbed::sectests
