#pragma once

#include <cstdint>
#include <string>

#include "iotbed/core/model.hpp"
#include "iotbed/core/registry.hpp"
#include "iotbed/orchestrator/config.hpp"
#include "iotbed/orchestrator/report.hpp"
#include "iotbed/sectests/grading.hpp"

namespace iotbed::orchestrator {

struct RunOptions {
  Config config;
  std::uint64_t seed = 1;
  // Directory relative file params resolve against.
  std::string scenario_dir = ".";
};

struct RunResult {
  RunReport report;
  std::string run_dir;
  int exit_code = 0;
};

// Every action validated against the registry plus driver-level checks
// (targets name registered devices, device specs load). Throws
// Error(validation) listing every problem.
void validate_scenario(const core::Scenario& s, const core::Registry& registry, const RunOptions& options);

// Validates, then executes standard tests, context tests, and analysis.
// Nothing is written when validation fails.
RunResult run_scenario(const core::Scenario& s, const core::Registry& registry, const RunOptions& options);

sectests::Verdict evaluate_verdict(const sectests::RawOutput& raw, const sectests::CriteriaConfig& criteria);

// Content hash of the scenario text and seed (16 hex digits).
std::string run_id_for(const core::Scenario& s, std::uint64_t seed);

// Re-renders report.txt content from a run directory's report.rec.
std::string rerender_run(const std::string& run_dir);

}  // namespace iotbed::orchestrator
