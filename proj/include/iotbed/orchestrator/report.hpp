#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iotbed/analysis/analysis.hpp"
#include "iotbed/profiler/profile.hpp"
#include "iotbed/sectests/verdict.hpp"

namespace iotbed::orchestrator {

struct DeviceSummary {
  std::string element;
  std::string device_type;
  std::string address;
  std::vector<std::string> connectivity;
  std::vector<std::string> protocols;
  bool operator==(const DeviceSummary&) const = default;
};

struct TestResult {
  std::string test;
  std::string element;
  sectests::Verdict verdict;
  bool operator==(const TestResult&) const = default;
};

struct TestError {
  std::string test;
  std::string phase;
  std::string message;
  bool operator==(const TestError&) const = default;
};

struct Overall {
  int pass_count = 0;
  int fail_count = 0;
  std::optional<sectests::Grade> highest_risk;
  bool operator==(const Overall&) const = default;
};

struct RunReport {
  std::string run_id;
  std::string scenario;
  std::uint64_t seed = 0;
  std::string backend;
  std::vector<DeviceSummary> devices;
  std::vector<TestResult> phase1;
  std::vector<TestResult> phase2;
  std::vector<TestError> errors;
  std::vector<profiler::ProfileDistribution> profiling;
  std::vector<analysis::AttackFinding> findings;
  std::vector<std::string> notes;
  Overall overall;
  std::string trace_ref = "trace.rec";
};

// Recomputes `overall` from the phase lists.
Overall summarize(const std::vector<TestResult>& phase1, const std::vector<TestResult>& phase2);

// report.rec: one `key=value` field per line in a fixed order.
std::string serialize_report(const RunReport& r);
RunReport parse_report(const std::string& content);
// report.txt, rendered from the parsed record so re-rendering is stable.
std::string render_report(const RunReport& r);

// 2 when any test errored; else 0 when nothing failed and the highest risk
// is at most MINOR; 1 otherwise.
int exit_code_for(const RunReport& r);

}  // namespace iotbed::orchestrator
