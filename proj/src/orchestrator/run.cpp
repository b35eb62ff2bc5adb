#include "iotbed/orchestrator/run.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <set>

#include "iotbed/analysis/analysis.hpp"
#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/core/scenario_parser.hpp"
#include "iotbed/core/trace.hpp"
#include "iotbed/orchestrator/elements.hpp"
#include "iotbed/profiler/profile.hpp"
#include "iotbed/sectests/plugins.hpp"
#include "iotbed/simnet/loopback.hpp"
#include "iotbed/simnet/records_io.hpp"

namespace fs = std::filesystem;

namespace iotbed::orchestrator {

using core::Action;
using core::Command;
using core::Phase;

sectests::Verdict evaluate_verdict(const sectests::RawOutput& raw, const sectests::CriteriaConfig& criteria) {
  return sectests::grade(raw, criteria);
}

std::string run_id_for(const core::Scenario& s, std::uint64_t seed) {
  std::string data = core::serialize_scenario(s) + "\nseed=" + std::to_string(seed);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string resolve_path(const std::string& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base) / path;
  return path.lexically_normal().string();
}

std::string file_param(const core::Params& params, const std::string& key, const std::string& base) {
  auto it = params.find(key);
  if (it == params.end()) return {};
  if (auto* f = std::get_if<core::FileRef>(&it->second)) return resolve_path(base, f->path);
  if (auto* s = std::get_if<std::string>(&it->second)) return resolve_path(base, *s);
  fail(ErrorCode::validation, "parameter '" + key + "' must be a file");
}

std::string spec_path(const core::ElementDescriptor& d) { return resolve_path(d.base_dir, d.config.at("spec")); }

// Device elements the scenario touches, sorted by id.
std::set<std::string> referenced_devices(const core::Scenario& s, const core::Registry& reg) {
  std::set<std::string> out;
  for (const auto& t : s.tests) {
    for (const auto& a : t.actions) {
      if (reg.contains(a.element) && reg.resolve(a.element).manifest.driver == "device") out.insert(a.element);
      if (auto target = a.params.find("target"); target != a.params.end()) {
        if (auto* id = std::get_if<std::string>(&target->second)) out.insert(*id);
      }
    }
  }
  return out;
}

std::string phase_name(Phase p) { return std::string(core::to_string(p)); }

class Engine {
 public:
  Engine(const core::Scenario& s, const core::Registry& reg, const RunOptions& opt)
      : scenario_(s), registry_(reg), options_(opt), net_(simnet::NetworkOptions{opt.seed}) {
    k_ = opt.config.k;
    window_s_ = opt.config.window_s;
  }

  RunResult run() {
    report_.scenario = scenario_.name;
    report_.seed = options_.seed;
    report_.backend = std::string(to_string(options_.config.backend));
    std::string base_id = run_id_for(scenario_, options_.seed);
    fs::create_directories(options_.config.runs_dir);
    std::string id = base_id;
    for (int n = 2; fs::exists(fs::path(options_.config.runs_dir) / id); ++n) id = base_id + "-" + std::to_string(n);
    report_.run_id = id;
    dir_ = (fs::path(options_.config.runs_dir) / id).string();
    fs::create_directories(dir_);
    text::write_file(dir_ + "/scenario.scn", core::serialize_scenario(scenario_));

    spawn_devices();
    global_capture_ = net_.start_capture(simnet::CaptureScope::everything());
    trace_ = std::make_unique<core::TraceLog>(dir_ + "/trace.rec");

    phase1_start_ = net_.now();
    run_phase(Phase::standard);
    phase1_end_ = net_.now();
    phase2_start_ = net_.now();
    bool any_context = run_phase(Phase::context);
    phase2_end_ = net_.now();

    auto capture = net_.stop_capture(global_capture_);
    simnet::write_capture(dir_ + "/captures.rec", capture);
    write_status();
    text::write_file(dir_ + "/context.rec", simnet::format_context_log(net_.context_log()));
    if (analysis_enabled_) run_analysis(capture, any_context);
    if (model_) run_profiling(capture);

    report_.overall = summarize(report_.phase1, report_.phase2);
    trace_->close();
    std::string rec = serialize_report(report_);
    text::write_file(dir_ + "/report.rec", rec);
    RunReport persisted = parse_report(rec);
    text::write_file(dir_ + "/report.txt", render_report(persisted));
    transport_.reset();
    return RunResult{persisted, dir_, exit_code_for(persisted)};
  }

 private:
  struct DeviceState {
    simnet::DeviceHandle handle;
    simnet::DeviceSpec spec;
  };

  void spawn_devices() {
    for (const auto& id : referenced_devices(scenario_, registry_)) {
      auto desc = registry_.resolve(id);
      auto spec = simnet::load_device_spec(spec_path(desc));
      auto h = net_.spawn_device(spec);
      devices_[id] = DeviceState{h, net_.spec(h)};
      DeviceSummary sum;
      sum.element = id;
      sum.device_type = spec.device_type;
      sum.address = h.address;
      sum.connectivity = spec.connectivity;
      std::set<std::string> protos;
      for (const auto& [port, svc] : spec.open_ports) {
        protos.insert(svc.protocol.empty() ? "tcp/" + std::to_string(port) : svc.protocol);
      }
      sum.protocols.assign(protos.begin(), protos.end());
      report_.devices.push_back(std::move(sum));
    }
    if (options_.config.backend == Backend::loopback) {
      auto lb = std::make_unique<simnet::LoopbackTransport>(net_);
      transport_ = std::move(lb);
    }
  }

  simnet::Transport& transport() { return transport_ ? *transport_ : static_cast<simnet::Transport&>(net_); }

  bool run_phase(Phase phase) {
    bool any = false;
    for (std::size_t i = 0; i < scenario_.tests.size(); ++i) {
      if (scenario_.phase_tags[i] != phase) continue;
      any = true;
      const auto& test = scenario_.tests[i];
      bool failed = false;
      for (const auto& action : test.actions) {
        core::TraceEntry e;
        e.test = test.name;
        e.phase = phase;
        e.action = action;
        if (failed) {
          e.outcome = core::Outcome::error("skipped: earlier action failed");
        } else {
          try {
            e.artifacts = execute(action, test.name, phase);
          } catch (const Error& err) {
            if (err.code() == ErrorCode::storage) throw;
            e.outcome = core::Outcome::error(err.what());
          } catch (const std::exception& err) {
            e.outcome = core::Outcome::error(err.what());
          }
          if (!e.outcome.ok) {
            failed = true;
            report_.errors.push_back({test.name, phase_name(phase), e.outcome.message});
          }
        }
        e.timestamp_us = net_.now();
        trace_->append(std::move(e));
      }
    }
    return any;
  }

  DeviceState& target_of(const Action& a) {
    auto id = core::param_string(a.params, "target");
    if (!id) fail(ErrorCode::validation, "missing target");
    auto it = devices_.find(*id);
    if (it == devices_.end()) fail(ErrorCode::not_found, "unknown target device '" + *id + "'");
    return it->second;
  }

  std::vector<std::string> execute(const Action& a, const std::string& test, Phase phase) {
    auto desc = registry_.resolve(a.element);
    const std::string& driver = desc.manifest.driver;
    const std::string& base = options_.scenario_dir;
    if (driver == "device") return drive_device(a);
    if (driver == "gps_sim") {
      if (a.command == Command::START) {
        auto events = simnet::load_context_script(file_param(a.params, "file", base));
        for (auto& e : events) e.time += net_.now();
        net_.advance_context(events);
      } else if (a.command == Command::SET) {
        simnet::ContextEvent e;
        e.time = net_.now();
        e.location = {*core::param_number(a.params, "lat"), *core::param_number(a.params, "lon")};
        e.day = static_cast<simnet::Weekday>((e.time / (86400 * simnet::kSecond)) % 7);
        net_.advance_context({e});
      }
      return {};
    }
    if (driver == "time_sim") {
      if (a.command == Command::START) {
        double d = *core::param_number(a.params, "duration_s");
        if (d < 0) fail(ErrorCode::invalid_argument, "duration_s must be non-negative");
        net_.tick(static_cast<simnet::VirtualTime>(d * simnet::kSecond));
      }
      return {};
    }
    if (driver == "network_sim") return drive_network(a);
    if (driver == "sniffer") return drive_sniffer(a);
    if (driver == "anomaly_detector") {
      analysis_enabled_ = true;
      if (auto k = core::param_number(a.params, "k")) {
        if (*k <= 0) fail(ErrorCode::invalid_argument, "k must be positive");
        k_ = *k;
      }
      if (auto w = core::param_number(a.params, "window_s")) {
        if (*w <= 0) fail(ErrorCode::invalid_argument, "window_s must be positive");
        window_s_ = *w;
      }
      return {};
    }
    if (driver == "profiler") {
      model_ = profiler::load_model(file_param(a.params, "model", base));
      return {};
    }
    auto kind = sectests::test_kind_from_string(driver);
    if (!kind) fail(ErrorCode::runtime, "no driver implementation for '" + driver + "'");
    return run_security_test(*kind, a, test, phase);
  }

  std::vector<std::string> drive_device(const Action& a) {
    auto& d = devices_.at(a.element);
    const auto& addr = d.handle.address;
    switch (a.command) {
      case Command::START:
        if (!net_.alive(d.handle)) net_.restart_device(d.handle);
        break;
      case Command::STOP:
        net_.stop_device(d.handle);
        break;
      case Command::TEST_CONNECTION: {
        int port = static_cast<int>(*core::param_number(a.params, "port"));
        if (!transport().connect(addr, port)) fail(ErrorCode::runtime, "connection to port " + std::to_string(port) + " refused");
        break;
      }
      case Command::LOGIN: {
        int port = static_cast<int>(*core::param_number(a.params, "port"));
        auto reply = transport().request(addr, port, "LOGIN " + *core::param_string(a.params, "user") + " " +
                                                         *core::param_string(a.params, "password"));
        if (!reply || *reply != "OK") fail(ErrorCode::runtime, "login on port " + std::to_string(port) + " denied");
        break;
      }
      default:
        fail(ErrorCode::validation, "unsupported device command");
    }
    return {};
  }

  std::vector<std::string> drive_network(const Action& a) {
    auto& d = target_of(a);
    auto existing = net_.proxy_handle(d.handle.address);
    if (a.command == Command::STOP) {
      if (!existing) fail(ErrorCode::runtime, "device " + d.handle.address + " is not proxied");
      net_.remove_proxy(*existing);
      return {};
    }
    simnet::Mutator m;
    m.delay_ms = core::param_number(a.params, "delay_ms").value_or(0.0);
    m.corrupt_rate = core::param_number(a.params, "corrupt_rate").value_or(0.0);
    m.drop_rate = core::param_number(a.params, "drop_rate").value_or(0.0);
    m.replay_rate = core::param_number(a.params, "replay_rate").value_or(0.0);
    for (double r : {m.corrupt_rate, m.drop_rate, m.replay_rate}) {
      if (r < 0 || r > 1) fail(ErrorCode::invalid_argument, "rates must lie in [0, 1]");
    }
    if (m.delay_ms < 0) fail(ErrorCode::invalid_argument, "delay_ms must be non-negative");
    if (existing) {
      net_.set_mutator(*existing, m);
    } else {
      net_.proxy_channel(d.handle, m);
    }
    return {};
  }

  std::vector<std::string> drive_sniffer(const Action& a) {
    if (a.command == Command::START) {
      if (sniffers_.count(a.element)) fail(ErrorCode::runtime, "sniffer '" + a.element + "' already running");
      sniffers_[a.element] = net_.start_capture(simnet::CaptureScope::everything());
      return {};
    }
    auto it = sniffers_.find(a.element);
    if (it == sniffers_.end()) fail(ErrorCode::runtime, "sniffer '" + a.element + "' is not running");
    auto records = net_.stop_capture(it->second);
    sniffers_.erase(it);
    std::string name = "capture-" + a.element + "-" + std::to_string(++capture_count_) + ".rec";
    simnet::write_capture(dir_ + "/" + name, records);
    return {name};
  }

  std::vector<std::string> run_security_test(sectests::TestKind kind, const Action& a, const std::string& test,
                                             Phase phase) {
    using sectests::TestKind;
    auto& d = target_of(a);
    sectests::PluginContext ctx{net_, transport(), d.handle};
    const std::string& base = options_.scenario_dir;
    auto criteria = sectests::CriteriaConfig::for_device(d.spec);
    std::vector<std::string> artifacts;
    sectests::RawOutput raw;
    switch (kind) {
      case TestKind::port_scan: {
        auto ranges = sectests::parse_port_ranges(core::param_string(a.params, "ports").value_or("1-65535"));
        std::string list_path = file_param(a.params, "score_list", base);
        if (list_path.empty()) list_path = options_.config.score_list;
        auto list = list_path.empty() ? sectests::default_score_list() : sectests::load_score_list(list_path);
        auto r = sectests::run_port_scan(ctx, ranges, list, criteria.thresholds);
        std::string name = "portscan-" + std::to_string(++artifact_count_) + ".txt";
        text::write_file(dir_ + "/" + name, sectests::format_risk_report(d.handle.address, r.assessment));
        artifacts.push_back(name);
        raw = r;
        break;
      }
      case TestKind::scan_detectability: {
        auto ranges = sectests::parse_port_ranges(core::param_string(a.params, "ports").value_or("1-65535"));
        raw = sectests::run_scan_detectability(ctx, ranges, net_.peek_capture(global_capture_));
        break;
      }
      case TestKind::fingerprint:
        raw = sectests::run_fingerprint(ctx);
        break;
      case TestKind::process_enumeration:
        raw = sectests::run_process_enumeration(ctx);
        break;
      case TestKind::data_leakage:
        raw = sectests::run_data_leakage(ctx, core::param_number(a.params, "duration_s").value_or(30.0));
        break;
      case TestKind::data_collection:
        raw = sectests::run_data_collection(ctx);
        break;
      case TestKind::management_access: {
        std::string dict = file_param(a.params, "dictionary", base);
        raw = sectests::run_management_access(
            ctx, dict.empty() ? sectests::default_dictionary() : sectests::parse_dictionary(text::read_file(dict)));
        break;
      }
      case TestKind::downgrade:
        raw = sectests::run_downgrade(ctx);
        break;
      case TestKind::replay: {
        std::optional<int> port;
        if (auto p = core::param_number(a.params, "port")) port = static_cast<int>(*p);
        raw = sectests::run_replay(ctx, port);
        break;
      }
      case TestKind::delay:
        raw = sectests::run_delay(ctx, *core::param_number(a.params, "delay_ms"));
        break;
      case TestKind::tamper:
        raw = sectests::run_tamper(ctx, *core::param_number(a.params, "rate"));
        break;
      case TestKind::known_vulns: {
        std::string db = file_param(a.params, "db", base);
        if (db.empty()) db = options_.config.vuln_db;
        raw = sectests::match_known_vulns(d.spec, db.empty() ? sectests::VulnDb{} : sectests::load_vuln_db(db));
        break;
      }
      case TestKind::vuln_probe: {
        std::string db = file_param(a.params, "db", base);
        if (db.empty()) db = options_.config.attack_db;
        raw = sectests::run_vuln_probe(ctx, db.empty() ? sectests::AttackDb{} : sectests::load_attack_db(db));
        break;
      }
    }
    auto v = evaluate_verdict(raw, criteria);
    v.test_name = test;
    std::string verdict_id = "verdict-" + std::to_string(++verdict_count_);
    artifacts.insert(artifacts.begin(), verdict_id);
    v.artifacts = artifacts;
    auto& list = phase == Phase::standard ? report_.phase1 : report_.phase2;
    list.push_back({test, a.element, v});
    return artifacts;
  }

  void write_status() {
    std::string out;
    for (const auto& [id, d] : devices_) out += simnet::format_status(id, net_.status_series(d.handle));
    text::write_file(dir_ + "/status.rec", out);
  }

  void run_analysis(const std::vector<simnet::CaptureRecord>& capture, bool any_context) {
    auto window = static_cast<simnet::VirtualTime>(window_s_ * simnet::kSecond);
    if (window <= 0) {
      report_.notes.push_back("analysis skipped: window too small");
      return;
    }
    if (!any_context) {
      report_.notes.push_back("analysis skipped: no context-based tests ran");
      return;
    }
    std::string windows_out, anomalies_out, findings_out;
    for (const auto& [id, d] : devices_) {
      auto status = net_.status_series(d.handle);
      auto base = analysis::window_series(capture, status, d.handle.address, phase1_start_, phase1_end_, window);
      analysis::BaselineModel baseline;
      try {
        baseline = analysis::build_baseline(base);
      } catch (const Error& e) {
        report_.notes.push_back("analysis of " + id + " skipped: " + e.what());
        continue;
      }
      auto observed = analysis::window_series(capture, status, d.handle.address, phase2_start_, phase2_end_, window);
      auto events = analysis::detect_anomalies(observed, baseline, k_);
      analysis::CorrelateOptions co;
      co.window = window;
      co.max_context_gap = window;
      auto findings = analysis::correlate(events, net_.context_log(), co);
      windows_out += analysis::format_window_table(id, base, baseline, k_);
      windows_out += analysis::format_window_table(id, observed, baseline, k_);
      for (const auto& e : events) anomalies_out += analysis::encode_anomaly(id, e) + "\n";
      for (auto& f : findings) {
        f.device = id;
        findings_out += analysis::encode_finding(f) + "\n";
        report_.findings.push_back(f);
      }
    }
    text::write_file(dir_ + "/windows.rec", windows_out);
    text::write_file(dir_ + "/anomalies.rec", anomalies_out);
    text::write_file(dir_ + "/findings.rec", findings_out);
  }

  void run_profiling(const std::vector<simnet::CaptureRecord>& capture) {
    profiler::ExtractOptions eo;
    eo.exclude_addresses.insert(std::string(simnet::kTestbedAddress));
    std::string rec;
    for (const auto& [id, d] : devices_) {
      std::vector<simnet::CaptureRecord> mine;
      for (const auto& r : capture) {
        if (r.src_addr == d.handle.address || r.dst_addr == d.handle.address) mine.push_back(r);
      }
      try {
        auto p = profiler::profile_device(*model_, mine, id, eo);
        rec += profiler::profile_record(p) + "\n";
        report_.profiling.push_back(std::move(p));
      } catch (const Error& e) {
        report_.notes.push_back("profiling of " + id + ": " + e.what());
      }
    }
    text::write_file(dir_ + "/profile.rec", rec);
    text::write_file(dir_ + "/profile.txt", profiler::render_profile_table(report_.profiling));
  }

  const core::Scenario& scenario_;
  const core::Registry& registry_;
  const RunOptions& options_;
  simnet::VirtualNetwork net_;
  std::unique_ptr<simnet::Transport> transport_;
  std::unique_ptr<core::TraceLog> trace_;
  std::map<std::string, DeviceState> devices_;
  std::map<std::string, simnet::CaptureHandle> sniffers_;
  simnet::CaptureHandle global_capture_;
  RunReport report_;
  std::string dir_;
  bool analysis_enabled_ = false;
  double k_ = 3.0;
  double window_s_ = 5.0;
  std::optional<profiler::StatModel> model_;
  simnet::VirtualTime phase1_start_ = 0, phase1_end_ = 0, phase2_start_ = 0, phase2_end_ = 0;
  int capture_count_ = 0;
  int artifact_count_ = 0;
  int verdict_count_ = 0;
};

}  // namespace

void validate_scenario(const core::Scenario& s, const core::Registry& registry, const RunOptions& options) {
  std::vector<std::string> problems;
  for (const auto& t : s.tests) {
    for (const auto& a : t.actions) {
      auto r = core::validate_action(a, registry);
      if (!r) {
        problems.push_back(t.name + ": " + r.message);
        continue;
      }
      if (a.initiator != core::kUserInitiator && !registry.contains(a.initiator)) {
        problems.push_back(t.name + ": unknown initiator '" + a.initiator + "'");
      }
      if (auto target = a.params.find("target"); target != a.params.end()) {
        auto* id = std::get_if<std::string>(&target->second);
        if (!id || !registry.contains(*id) || registry.resolve(*id).manifest.driver != "device") {
          problems.push_back(t.name + ": target '" + (id ? *id : std::string("?")) +
                             "' must name a registered device element");
        }
      }
    }
  }
  for (const auto& id : referenced_devices(s, registry)) {
    if (!registry.contains(id)) continue;
    try {
      simnet::load_device_spec(spec_path(registry.resolve(id)));
    } catch (const Error& e) {
      problems.push_back("device '" + id + "': " + e.what());
    }
  }
  (void)options;
  if (!problems.empty()) fail(ErrorCode::validation, "scenario validation failed: " + text::join(problems, "; "));
}

RunResult run_scenario(const core::Scenario& s, const core::Registry& registry, const RunOptions& options) {
  validate_scenario(s, registry, options);
  Engine engine(s, registry, options);
  return engine.run();
}

std::string rerender_run(const std::string& run_dir) {
  return render_report(parse_report(text::read_file(run_dir + "/report.rec")));
}

}  // namespace iotbed::orchestrator
