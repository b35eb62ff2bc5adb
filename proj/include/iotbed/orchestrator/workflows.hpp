#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iotbed/orchestrator/config.hpp"
#include "iotbed/profiler/profile.hpp"
#include "iotbed/sectests/port_risk.hpp"
#include "iotbed/simnet/device_spec.hpp"

namespace iotbed::orchestrator {

struct ScanRequest {
  std::string ports = "1-65535";
  std::string score_list;  // empty: config's list, else the built-in one
  Backend backend = Backend::memory;
  std::uint64_t seed = 1;
};

struct ScanOutcome {
  std::string address;
  sectests::RiskAssessment assessment;
  std::string text;
  int exit_code = 0;  // 1 above MINOR
};

// Spawns the device on a fresh network (exposed over loopback sockets when
// asked) and scans it from the testbed.
ScanOutcome scan_device(const simnet::DeviceSpec& spec, const ScanRequest& request);

// `path,label` lines; relative paths resolve against `base_dir`.
struct LabeledCapture {
  std::string path;
  std::string label;
};
std::vector<LabeledCapture> parse_labels(const std::string& content, const std::string& base_dir);

struct TrainRequest {
  std::string labels_path;
  std::string captures_dir;  // empty: the labels file's directory
  profiler::TrainParams params;
  double holdout = 0.3;  // 0 trains on everything
  std::uint64_t seed = 1;
};

struct TrainOutcome {
  profiler::StatModel model;
  std::size_t n_train = 0;
  std::optional<profiler::ConfusionMatrix> confusion;
};

// Per-class shuffled split so every class keeps its share in both halves.
TrainOutcome train_from_labels(const TrainRequest& request);

// One profile per capture, named after the file stem. Testbed traffic is
// left out.
std::vector<profiler::ProfileDistribution> profile_captures(const profiler::StatModel& model,
                                                            const std::vector<std::string>& capture_paths);

// Runs the device alone for `duration_s` of virtual time and returns its
// traffic.
std::vector<simnet::CaptureRecord> generate_capture(const simnet::DeviceSpec& spec, double duration_s,
                                                    std::uint64_t seed);

// `id<TAB>kind<TAB>driver` per element, sorted by id; a notice when empty.
std::string format_element_list(const std::string& registry_dir);

}  // namespace iotbed::orchestrator
