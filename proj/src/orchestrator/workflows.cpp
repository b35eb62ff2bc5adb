#include "iotbed/orchestrator/workflows.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/orchestrator/elements.hpp"
#include "iotbed/sectests/plugins.hpp"
#include "iotbed/simnet/loopback.hpp"
#include "iotbed/simnet/records_io.hpp"

namespace fs = std::filesystem;

namespace iotbed::orchestrator {

ScanOutcome scan_device(const simnet::DeviceSpec& spec, const ScanRequest& request) {
  auto ranges = sectests::parse_port_ranges(request.ports);
  auto list = request.score_list.empty() ? sectests::default_score_list()
                                         : sectests::load_score_list(request.score_list);
  simnet::VirtualNetwork net(simnet::NetworkOptions{request.seed});
  auto handle = net.spawn_device(spec);
  std::unique_ptr<simnet::LoopbackTransport> loopback;
  if (request.backend == Backend::loopback) loopback = std::make_unique<simnet::LoopbackTransport>(net);
  simnet::Transport& transport = loopback ? static_cast<simnet::Transport&>(*loopback) : net;

  sectests::PluginContext ctx{net, transport, handle};
  auto raw = sectests::run_port_scan(ctx, ranges, list);
  ScanOutcome out;
  out.address = handle.address;
  out.assessment = raw.assessment;
  out.text = sectests::format_risk_report(handle.address, raw.assessment);
  out.exit_code = sectests::severity(raw.assessment.risk_level) > sectests::severity(sectests::Grade::MINOR_RISK) ? 1 : 0;
  return out;
}

std::vector<LabeledCapture> parse_labels(const std::string& content, const std::string& base_dir) {
  std::vector<LabeledCapture> out;
  int line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ParseError(line_no, 1, "expected 'path,label'");
    LabeledCapture lc;
    lc.path = text::trim(line.substr(0, comma));
    lc.label = text::trim(line.substr(comma + 1));
    if (lc.path.empty() || lc.label.empty()) throw ParseError(line_no, 1, "empty path or label");
    if (fs::path(lc.path).is_relative()) lc.path = (fs::path(base_dir) / lc.path).lexically_normal().string();
    out.push_back(std::move(lc));
  }
  if (out.empty()) fail(ErrorCode::validation, "labels file lists no captures");
  return out;
}

TrainOutcome train_from_labels(const TrainRequest& request) {
  if (request.holdout < 0 || request.holdout >= 1) fail(ErrorCode::invalid_argument, "holdout must lie in [0, 1)");
  auto base = request.captures_dir.empty() ? fs::path(request.labels_path).parent_path().string() : request.captures_dir;
  auto labeled = parse_labels(text::read_file(request.labels_path), base.empty() ? "." : base);

  profiler::ExtractOptions eo;
  eo.exclude_addresses.insert(std::string(simnet::kTestbedAddress));
  std::map<std::string, std::vector<profiler::SequenceInstance>> by_class;
  for (const auto& lc : labeled) {
    for (auto& inst : profiler::extract_features(simnet::read_capture(lc.path), eo)) {
      inst.label = lc.label;
      by_class[lc.label].push_back(std::move(inst));
    }
  }

  std::mt19937_64 rng(request.seed);
  std::vector<profiler::SequenceInstance> train, held;
  for (auto& [label, items] : by_class) {
    std::shuffle(items.begin(), items.end(), rng);
    auto n_held = static_cast<std::size_t>(static_cast<double>(items.size()) * request.holdout);
    for (std::size_t i = 0; i < items.size(); ++i) (i < n_held ? held : train).push_back(std::move(items[i]));
  }
  TrainOutcome out;
  out.model = profiler::train_model(train, request.params);
  out.n_train = train.size();
  if (!held.empty()) out.confusion = profiler::confusion_matrix(out.model, held);
  return out;
}

std::vector<profiler::ProfileDistribution> profile_captures(const profiler::StatModel& model,
                                                            const std::vector<std::string>& capture_paths) {
  profiler::ExtractOptions eo;
  eo.exclude_addresses.insert(std::string(simnet::kTestbedAddress));
  std::vector<profiler::ProfileDistribution> out;
  for (const auto& path : capture_paths) {
    out.push_back(profiler::profile_device(model, simnet::read_capture(path), fs::path(path).stem().string(), eo));
  }
  return out;
}

std::vector<simnet::CaptureRecord> generate_capture(const simnet::DeviceSpec& spec, double duration_s,
                                                    std::uint64_t seed) {
  if (!(duration_s > 0)) fail(ErrorCode::invalid_argument, "duration must be positive");
  simnet::VirtualNetwork net(simnet::NetworkOptions{seed});
  net.spawn_device(spec);
  auto cap = net.start_capture(simnet::CaptureScope::everything());
  net.tick(static_cast<simnet::VirtualTime>(duration_s * simnet::kSecond));
  return net.stop_capture(cap);
}

std::string format_element_list(const std::string& registry_dir) {
  auto registry = load_registry(registry_dir);
  auto elements = registry.list_elements();
  if (elements.empty()) return "no elements registered in " + registry_dir + "\n";
  std::sort(elements.begin(), elements.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::string out;
  for (const auto& e : elements) {
    out += e.id + "\t" + std::string(core::to_string(e.kind)) + "\t" + e.manifest.driver + "\n";
  }
  return out;
}

}  // namespace iotbed::orchestrator
