#include "iotbed/orchestrator/elements.hpp"

#include <algorithm>
#include <filesystem>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/sectests/grading.hpp"

namespace fs = std::filesystem;

namespace iotbed::orchestrator {

using core::Command;
using core::CommandSchema;
using core::DriverManifest;
using core::ParamSpec;
using core::ParamType;

namespace {

ParamSpec req(ParamType t) { return {t, true}; }
ParamSpec opt(ParamType t) { return {t, false}; }

CommandSchema test_schema(const std::string& kind) {
  CommandSchema s;
  s.params["target"] = req(ParamType::string);
  if (kind == "port_scan") {
    s.params["ports"] = opt(ParamType::string);
    s.params["score_list"] = opt(ParamType::file);
  } else if (kind == "scan_detectability") {
    s.params["ports"] = opt(ParamType::string);
  } else if (kind == "data_leakage") {
    s.params["duration_s"] = opt(ParamType::number);
  } else if (kind == "management_access") {
    s.params["dictionary"] = opt(ParamType::file);
  } else if (kind == "replay") {
    s.params["port"] = opt(ParamType::number);
  } else if (kind == "delay") {
    s.params["delay_ms"] = req(ParamType::number);
  } else if (kind == "tamper") {
    s.params["rate"] = req(ParamType::number);
  } else if (kind == "known_vulns" || kind == "vuln_probe") {
    s.params["db"] = opt(ParamType::file);
  }
  return s;
}

}  // namespace

std::vector<std::string> builtin_drivers() {
  std::vector<std::string> out{"device", "gps_sim", "time_sim", "network_sim", "sniffer", "anomaly_detector",
                               "profiler"};
  for (auto k : sectests::all_test_kinds()) out.emplace_back(sectests::to_string(k));
  return out;
}

std::optional<DriverManifest> builtin_manifest(const std::string& driver) {
  DriverManifest m;
  m.driver = driver;
  if (driver == "device") {
    m.commands[Command::START] = {};
    m.commands[Command::STOP] = {};
    m.commands[Command::TEST_CONNECTION].params["port"] = req(ParamType::number);
    auto& login = m.commands[Command::LOGIN].params;
    login["port"] = req(ParamType::number);
    login["user"] = req(ParamType::string);
    login["password"] = req(ParamType::string);
  } else if (driver == "gps_sim") {
    m.commands[Command::START].params["file"] = req(ParamType::file);
    m.commands[Command::STOP] = {};
    m.commands[Command::SET].params["lat"] = req(ParamType::number);
    m.commands[Command::SET].params["lon"] = req(ParamType::number);
  } else if (driver == "time_sim") {
    m.commands[Command::START].params["duration_s"] = req(ParamType::number);
    m.commands[Command::STOP] = {};
  } else if (driver == "network_sim") {
    auto& set = m.commands[Command::SET].params;
    set["target"] = req(ParamType::string);
    set["delay_ms"] = opt(ParamType::number);
    set["corrupt_rate"] = opt(ParamType::number);
    set["drop_rate"] = opt(ParamType::number);
    set["replay_rate"] = opt(ParamType::number);
    m.commands[Command::STOP].params["target"] = req(ParamType::string);
  } else if (driver == "sniffer") {
    m.commands[Command::START] = {};
    m.commands[Command::STOP] = {};
  } else if (driver == "anomaly_detector") {
    for (auto c : {Command::START, Command::SET}) {
      m.commands[c].params["k"] = opt(ParamType::number);
      m.commands[c].params["window_s"] = opt(ParamType::number);
    }
  } else if (driver == "profiler") {
    m.commands[Command::SELECT].params["model"] = req(ParamType::file);
  } else if (sectests::test_kind_from_string(driver)) {
    m.commands[Command::TEST] = test_schema(driver);
  } else {
    return std::nullopt;
  }
  return m;
}

core::ElementKind default_kind(const std::string& driver) {
  if (driver == "device") return core::ElementKind::device_under_test;
  if (driver == "sniffer") return core::ElementKind::measurement_tool;
  if (driver == "anomaly_detector" || driver == "profiler") return core::ElementKind::analysis_tool;
  if (sectests::test_kind_from_string(driver)) return core::ElementKind::security_test;
  return core::ElementKind::simulator;
}

core::ElementDescriptor parse_element(const std::string& content, const std::string& base_dir) {
  auto kv = text::parse_key_values(content);
  core::ElementDescriptor d;
  d.base_dir = base_dir;
  auto take = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) return {};
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  d.id = take("id");
  std::string driver = take("driver");
  std::string kind = take("kind");
  if (d.id.empty()) fail(ErrorCode::validation, "element file lacks 'id'");
  if (driver.empty()) fail(ErrorCode::validation, "element '" + d.id + "' lacks 'driver'");
  auto manifest = builtin_manifest(driver);
  if (!manifest) fail(ErrorCode::validation, "element '" + d.id + "': unknown driver '" + driver + "'");
  d.manifest = *manifest;
  if (kind.empty()) {
    d.kind = default_kind(driver);
  } else {
    auto k = core::element_kind_from_string(kind);
    if (!k) fail(ErrorCode::validation, "element '" + d.id + "': unknown kind '" + kind + "'");
    d.kind = *k;
  }
  if (driver == "device" && !kv.count("spec")) fail(ErrorCode::validation, "device element '" + d.id + "' lacks 'spec'");
  d.config = std::move(kv);
  return d;
}

core::Registry load_registry(const std::string& dir) {
  core::Registry reg;
  if (!fs::is_directory(dir)) return reg;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".elem") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      reg.register_element(parse_element(text::read_file(f.string()), dir));
    } catch (const Error& e) {
      throw Error(e.code(), f.filename().string() + ": " + e.what());
    }
  }
  return reg;
}

}  // namespace iotbed::orchestrator
