// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each criterion also has a wall-clock budget.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "iotbed/analysis/analysis.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/core/scenario_parser.hpp"
#include "iotbed/core/trace.hpp"
#include "iotbed/orchestrator/elements.hpp"
#include "iotbed/orchestrator/run.hpp"
#include "iotbed/profiler/features.hpp"
#include "iotbed/profiler/profile.hpp"
#include "iotbed/profiler/tree.hpp"
#include "iotbed/sectests/databases.hpp"
#include "iotbed/sectests/grading.hpp"
#include "iotbed/sectests/plugins.hpp"
#include "iotbed/sectests/port_risk.hpp"
#include "iotbed/simnet/device_spec.hpp"
#include "iotbed/simnet/network.hpp"
#include "oracles/tree_oracle.hpp"

namespace fs = std::filesystem;
using namespace iotbed;
using sectests::Grade;
using simnet::DeviceSpec;
using simnet::kSecond;

namespace {

const std::string kDemo = std::string(IOTBED_TEST_DATA) + "/../../demo";

struct Check {
  std::vector<std::string> failures;
  std::string summary;  // printed after the verdict
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DeviceSpec with_ports(const std::vector<int>& ports) {
  DeviceSpec s;
  s.device_type = "generic";
  for (int p : ports) s.open_ports[p] = simnet::ServiceSpec{"tcp", "svc-" + std::to_string(p)};
  return s;
}

struct Bench {
  simnet::VirtualNetwork net;
  simnet::DeviceHandle h;
  std::unique_ptr<sectests::PluginContext> ctx;
  explicit Bench(const DeviceSpec& s, bool proxied = false) {
    h = net.spawn_device(s);
    if (proxied) net.proxy_channel(h, simnet::Mutator{});
    ctx = std::make_unique<sectests::PluginContext>(sectests::PluginContext{net, net, h});
  }
};

// 1 ----------------------------------------------------------------------

void port_risk_example(Check& c) {
  const std::vector<int> ports{135, 139, 80, 5900, 445, 443, 49152, 6646, 2869};
  Bench b(with_ports(ports));
  auto open = sectests::port_scan(b.net, b.h.address);
  auto expected = ports;
  std::sort(expected.begin(), expected.end());
  c.expect(open == expected, "open port set differs");
  auto a = sectests::score_ports(open, sectests::default_score_list());
  c.expect(a.total_score == 13.0, "total " + text::format_double(a.total_score) + " != 13");
  c.expect(a.risk_level == Grade::MINOR_RISK, "risk level is not MINOR_RISK");

  auto report = sectests::format_risk_report(b.h.address, a);
  auto section = report.find("Metric Score");
  c.expect(section != std::string::npos, "no metric section");
  std::vector<std::pair<int, int>> rows{{80, 3}, {5900, 3}, {445, 1}, {443, 5}, {49152, 1}};
  std::size_t pos = section;
  for (auto [port, score] : rows) {
    auto at = report.find("\n  " + std::to_string(port) + "\t" + std::to_string(score) + "\t", pos);
    c.expect(at != std::string::npos, "report lacks scored row for port " + std::to_string(port));
    if (at != std::string::npos) pos = at + 1;
  }
  c.expect(report.find("Total: 13") != std::string::npos, "report lacks total");
}

// 2 ----------------------------------------------------------------------

void threshold_partition(Check& c) {
  const std::vector<std::pair<double, Grade>> table{
      {0, Grade::SAFE},         {7, Grade::MINOR_RISK},     {14, Grade::MINOR_RISK},
      {15, Grade::MAJOR_RISK},  {22, Grade::MAJOR_RISK},    {30, Grade::MAJOR_RISK},
      {31, Grade::CRITICAL_RISK}, {100, Grade::CRITICAL_RISK}};
  for (auto [total, g] : table) {
    c.expect(sectests::risk_level_for(total) == g, "total " + text::format_double(total) + " misgraded");
  }
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 120.0);
  std::vector<double> totals(1000);
  for (auto& t : totals) t = (rng() % 4 == 0) ? std::floor(u(rng)) : u(rng);
  std::sort(totals.begin(), totals.end());
  for (std::size_t i = 1; i < totals.size(); ++i) {
    auto lo = sectests::severity(sectests::risk_level_for(totals[i - 1]));
    auto hi = sectests::severity(sectests::risk_level_for(totals[i]));
    if (hi < lo) {
      c.expect(false, "non-monotone at " + text::format_double(totals[i]));
      break;
    }
  }
}

// 3 ----------------------------------------------------------------------

struct InCircleRun {
  simnet::VirtualTime first = 0, last = 0;
};

void context_attack(Check& c) {
  testutil::TempDir tmp;
  orchestrator::RunOptions o;
  o.config.runs_dir = tmp.file("runs");
  o.scenario_dir = kDemo + "/scenarios";
  auto s = core::parse_scenario(slurp(kDemo + "/scenarios/context_attack.scn"));
  auto r = orchestrator::run_scenario(s, orchestrator::load_registry(kDemo + "/registry"), o);

  auto tracker = simnet::load_device_spec(kDemo + "/devices/tracker.json");
  const auto& trig = tracker.compromise->trigger;

  // Contiguous stretches of the replayed context that sit inside the trigger.
  std::vector<InCircleRun> runs;
  bool inside = false;
  for (const auto& line : text::split(slurp(r.run_dir + "/context.rec"), '\n')) {
    if (line.empty()) continue;
    auto rec = text::decode_record(line);
    simnet::VirtualTime t = *text::to_int(text::field(rec, "ts"));
    simnet::GeoPoint p{*text::to_double(text::field(rec, "lat")), *text::to_double(text::field(rec, "lon"))};
    bool in = simnet::distance_m(p, *trig.center) <= trig.radius_m;
    if (in && !inside) runs.push_back({t, t});
    if (in) runs.back().last = t;
    inside = in;
  }
  c.expect(runs.size() == 2, "trajectory enters the trigger " + std::to_string(runs.size()) + " times, want 2");

  int attacks = 0, alarms = 0;
  for (const auto& f : r.report.findings) {
    if (f.classification == analysis::Classification::possible_false_alarm) {
      ++alarms;
      continue;
    }
    ++attacks;
    if (!f.location) {
      c.expect(false, "attack finding without location");
      continue;
    }
    double d = simnet::distance_m(*f.location, *trig.center);
    c.expect(d <= trig.radius_m, "attack location " + text::format_fixed(d, 1) + " m from trigger center");
    bool in_window = std::any_of(runs.begin(), runs.end(), [&](const InCircleRun& w) {
      return f.virtual_time >= w.first && f.virtual_time <= w.last;
    });
    c.expect(in_window, "attack time outside the scripted in-trigger windows");
  }
  c.summary = std::to_string(attacks) + " attack, " + std::to_string(alarms) + " false alarm";
  c.expect(attacks == 2, "attack findings: " + std::to_string(attacks));
  c.expect(alarms == 1, "false-alarm findings: " + std::to_string(alarms));
}

// 4 ----------------------------------------------------------------------

struct VerdictCase {
  std::string label;
  std::function<sectests::RawOutput(sectests::CriteriaConfig&)> run;
  Grade expected;
};

struct VerdictRow {
  std::string row;
  Grade best, worst;
  std::vector<VerdictCase> cases;
};

DeviceSpec fingerprinted(bool os_ok, std::vector<std::pair<bool, simnet::RiskClass>> apps) {
  auto s = with_ports({80});
  s.identity.os_name = "linux";
  s.identity.os_version = "4.19";
  s.identity.os_up_to_date = os_ok;
  int i = 0;
  for (auto [ok, risk] : apps) s.identity.app_versions["app" + std::to_string(i++)] = simnet::AppVersion{"1.0", ok, risk};
  return s;
}

std::vector<VerdictRow> verdict_table() {
  using namespace sectests;
  using simnet::RiskClass;
  std::vector<VerdictRow> t;
  const std::vector<PortRange> low{{1, 10000}};

  auto detect = [low](DeviceSpec s, bool observe) {
    return [s, observe, low](CriteriaConfig& cfg) -> RawOutput {
      Bench b(s);
      cfg = CriteriaConfig::for_device(s);
      std::vector<simnet::CaptureRecord> prior;
      if (observe) {
        auto cap = b.net.start_capture(simnet::CaptureScope::everything());
        b.net.tick(10 * kSecond);
        prior = b.net.stop_capture(cap);
      }
      return run_scan_detectability(*b.ctx, low, prior);
    };
  };
  auto silent = with_ports({});
  silent.traffic.enabled = false;
  auto chatty = with_ports({});
  auto unexpected = with_ports({80, 8080});
  unexpected.expected_ports = std::set<int>{80};
  t.push_back({"scanning", Grade::UNDETECTABLE, Grade::CRITICAL_RISK,
               {{"silent device", detect(silent, true), Grade::UNDETECTABLE},
                {"traffic but no ports", detect(chatty, true), Grade::SAFE},
                {"port 80 only", detect(with_ports({80}), false), Grade::MINOR_RISK},
                {"telnet open", detect(with_ports({23, 80}), false), Grade::MAJOR_RISK},
                {"undeclared port open", detect(unexpected, false), Grade::CRITICAL_RISK}}});

  auto fp = [](DeviceSpec s) {
    return [s](CriteriaConfig&) -> RawOutput {
      Bench b(s);
      return run_fingerprint(*b.ctx);
    };
  };
  t.push_back({"fingerprinting", Grade::UNIDENTIFIABLE, Grade::CRITICAL_RISK,
               {{"no identity", fp(with_ports({80})), Grade::UNIDENTIFIABLE},
                {"all current", fp(fingerprinted(true, {{true, RiskClass::critical}})), Grade::SAFE},
                {"stale low app", fp(fingerprinted(true, {{false, RiskClass::low}, {true, RiskClass::major}})),
                 Grade::MINOR_RISK},
                {"stale major app", fp(fingerprinted(true, {{false, RiskClass::major}, {false, RiskClass::low}})),
                 Grade::MAJOR_RISK},
                {"stale critical app", fp(fingerprinted(true, {{false, RiskClass::critical}})), Grade::CRITICAL_RISK},
                {"stale os", fp(fingerprinted(false, {})), Grade::CRITICAL_RISK}}});

  auto procs = [](simnet::IntrospectionPolicy p) {
    return [p](CriteriaConfig&) -> RawOutput {
      auto s = with_ports({80});
      s.introspection = p;
      Bench b(s);
      return run_process_enumeration(*b.ctx);
    };
  };
  t.push_back({"process enumeration", Grade::SAFE, Grade::FAIL,
               {{"admin required", procs(simnet::IntrospectionPolicy::remote_blocked), Grade::SAFE},
                {"local channel open", procs(simnet::IntrospectionPolicy::local), Grade::MODERATE_RISK},
                {"remote listing open", procs(simnet::IntrospectionPolicy::none), Grade::FAIL},
                {"no channel", procs(simnet::IntrospectionPolicy::absent), Grade::INDETERMINATE}}});

  auto leak = [](simnet::PayloadClass cls, bool traffic, double size) {
    return [=](CriteriaConfig&) -> RawOutput {
      auto s = with_ports({443});
      s.encryption.payload_class = cls;
      s.traffic.enabled = traffic;
      s.traffic.size_mean = size;
      Bench b(s);
      return run_data_leakage(*b.ctx, 20);
    };
  };
  t.push_back({"data leakage", Grade::PASS, Grade::FAIL,
               {{"encrypted traffic", leak(simnet::PayloadClass::encrypted, true, 600), Grade::PASS},
                {"large encrypted records", leak(simnet::PayloadClass::encrypted, true, 1200), Grade::PASS},
                {"plaintext traffic", leak(simnet::PayloadClass::plaintext, true, 600), Grade::FAIL},
                {"no traffic", leak(simnet::PayloadClass::encrypted, false, 600), Grade::INDETERMINATE}}});

  auto stored = [](simnet::StoredDataClass d) {
    return [d](CriteriaConfig&) -> RawOutput {
      auto s = with_ports({80});
      s.stored_data_class = d;
      Bench b(s);
      return run_data_collection(*b.ctx);
    };
  };
  t.push_back({"data collection", Grade::SAFE, Grade::CRITICAL_RISK,
               {{"nothing stored", stored(simnet::StoredDataClass::none), Grade::SAFE},
                {"normal data", stored(simnet::StoredDataClass::normal), Grade::MINOR_RISK},
                {"location history", stored(simnet::StoredDataClass::sensitive), Grade::MAJOR_RISK},
                {"device status", stored(simnet::StoredDataClass::critical), Grade::CRITICAL_RISK}}});

  auto mgmt = [](DeviceSpec s) {
    return [s](CriteriaConfig&) -> RawOutput {
      Bench b(s);
      return run_management_access(*b.ctx, default_dictionary());
    };
  };
  auto telnet = with_ports({23, 80});
  telnet.open_ports[23].default_credentials = simnet::Credentials{"admin", "admin"};
  auto ssh = with_ports({22});
  ssh.open_ports[22].default_credentials = simnet::Credentials{"op", "x9!long-unguessable"};
  t.push_back({"management access", Grade::PASS, Grade::FAIL,
               {{"22 and 23 closed", mgmt(with_ports({80, 443})), Grade::PASS},
                {"telnet with default login", mgmt(telnet), Grade::FAIL},
                {"ssh refusing every login", mgmt(ssh), Grade::FAIL}}});

  auto downgrade = [](simnet::PayloadClass cls, bool accepts) {
    return [=](CriteriaConfig&) -> RawOutput {
      auto s = with_ports({443});
      s.encryption.payload_class = cls;
      s.encryption.accepts_downgrade = accepts;
      Bench b(s);
      return run_downgrade(*b.ctx);
    };
  };
  t.push_back({"downgrade", Grade::PASS, Grade::FAIL,
               {{"refuses plaintext", downgrade(simnet::PayloadClass::encrypted, false), Grade::PASS},
                {"accepts plaintext", downgrade(simnet::PayloadClass::encrypted, true), Grade::FAIL},
                {"plaintext-only device", downgrade(simnet::PayloadClass::plaintext, false), Grade::INDETERMINATE}}});

  auto replay = [](bool fresh, int port) {
    return [=](CriteriaConfig&) -> RawOutput {
      auto s = with_ports({443});
      s.open_ports[443].freshness_check = fresh;
      Bench b(s);
      return run_replay(*b.ctx, port);
    };
  };
  t.push_back({"replay", Grade::PASS, Grade::FAIL,
               {{"freshness checked", replay(true, 443), Grade::PASS},
                {"no freshness check", replay(false, 443), Grade::FAIL},
                {"service absent", replay(true, 8443), Grade::INDETERMINATE}}});

  auto delay = [](double ms) {
    return [=](CriteriaConfig& cfg) -> RawOutput {
      auto s = with_ports({443});
      cfg = CriteriaConfig::for_device(s);
      Bench b(s, true);
      return run_delay(*b.ctx, ms);
    };
  };
  t.push_back({"delay", Grade::SAFE, Grade::UNSAFE,
               {{"no delay", delay(0), Grade::SAFE},
                {"delay inside range", delay(300), Grade::SAFE},
                {"10 s delay", delay(10000), Grade::UNSAFE}}});

  auto tamper = [](double rate, bool ignores, bool crashes) {
    return [=](CriteriaConfig&) -> RawOutput {
      auto s = with_ports({80, 443});
      s.robustness.ignores_malformed = ignores;
      for (auto& [port, svc] : s.open_ports) svc.crash_on_malformed = crashes;
      Bench b(s, true);
      return run_tamper(*b.ctx, rate);
    };
  };
  t.push_back({"tamper", Grade::SAFE, Grade::UNSAFE,
               {{"rate zero", tamper(0.0, false, true), Grade::SAFE},
                {"ignores 10% bit errors", tamper(0.1, true, false), Grade::SAFE},
                {"crashes on corruption", tamper(0.1, true, true), Grade::UNSAFE},
                {"misbehaves on corruption", tamper(0.5, false, false), Grade::UNSAFE}}});

  auto known = [](std::string db) {
    return [db](CriteriaConfig&) -> RawOutput {
      auto s = fingerprinted(true, {});
      s.device_type = "cam";
      s.identity.app_versions["httpd"] = simnet::AppVersion{"1.4.35"};
      return match_known_vulns(s, parse_vuln_db(db));
    };
  };
  t.push_back({"known vulnerabilities", Grade::SAFE, Grade::UNSAFE,
               {{"no matching record", known("cam/httpd,>=2.0,V1,critical,x\nplug,*,V2,critical,y\n"), Grade::SAFE},
                {"low match", known("cam,4.0..4.20,V1,low,kernel\n"), Grade::MINOR_RISK},
                {"significant match", known("cam/httpd,<1.4.40,V1,significant,x\n"), Grade::UNSAFE},
                {"critical match", known("cam,*,V1,low,a\ncam/httpd,1.4.35,V2,critical,b\n"), Grade::UNSAFE}}});

  auto probe = [](std::string db) {
    return [db](CriteriaConfig&) -> RawOutput {
      auto s = with_ports({80, 443});
      s.open_ports[80].vulnerable_probes = {"0badc0de"};
      Bench b(s);
      return run_vuln_probe(*b.ctx, parse_attack_db(db));
    };
  };
  t.push_back({"vulnerability scan", Grade::SAFE, Grade::UNSAFE,
               {{"empty attack db", probe(""), Grade::SAFE},
                {"probes answered safely", probe("P1,critical,*,cafe,ERR unsupported-input\n"), Grade::SAFE},
                {"low probe hits", probe("P1,low,80,0badc0de,ERR unsupported-input\n"), Grade::MINOR_RISK},
                {"critical probe hits", probe("P1,low,*,cafe,ERR unsupported-input\nP2,critical,*,0badc0de,ERR unsupported-input\n"),
                 Grade::UNSAFE}}});
  return t;
}

void verdict_suite(Check& c) {
  std::size_t configs = 0, rows = 0;
  for (auto& row : verdict_table()) {
    ++rows;
    configs += row.cases.size();
    c.expect(row.cases.size() >= 3, row.row + ": fewer than 3 configurations");
    std::set<Grade> covered;
    for (auto& vc : row.cases) {
      auto cfg = sectests::CriteriaConfig::defaults();
      auto raw = vc.run(cfg);
      auto v = sectests::grade(raw, cfg);
      covered.insert(vc.expected);
      c.expect(v.grade == vc.expected, row.row + " / " + vc.label + ": got " + std::string(to_string(v.grade)) +
                                           ", want " + std::string(to_string(vc.expected)));
    }
    c.expect(covered.count(row.best) && covered.count(row.worst), row.row + ": best or worst grade not covered");
  }
  c.summary = std::to_string(rows) + " rows, " + std::to_string(configs) + " configurations";
}

// 5 ----------------------------------------------------------------------

void profiler_fleet(Check& c) {
  struct Kind {
    std::string name;
    double size, ia;
  };
  const std::vector<Kind> fleet{{"plug", 100, 20}, {"bulb", 300, 80}, {"camera", 500, 140},
                                {"hub", 700, 200}, {"watch", 900, 260}};
  const std::size_t per_class = 200;
  std::mt19937_64 rng(11);
  std::vector<profiler::SequenceInstance> train, held;
  std::map<std::string, std::vector<profiler::SequenceInstance>> held_by_class;
  for (std::size_t k = 0; k < fleet.size(); ++k) {
    DeviceSpec s = with_ports({443});
    s.device_type = fleet[k].name;
    s.traffic.size_mean = fleet[k].size;
    s.traffic.size_stddev = 30;
    s.traffic.interarrival_mean_ms = fleet[k].ia;
    s.traffic.interarrival_stddev_ms = 10;
    simnet::VirtualNetwork net(simnet::NetworkOptions{100 + k});
    net.spawn_device(s);
    auto cap = net.start_capture(simnet::CaptureScope::everything());
    std::vector<profiler::SequenceInstance> sessions;
    profiler::ExtractOptions eo;
    eo.exclude_addresses.insert(std::string(simnet::kTestbedAddress));
    for (int chunk = 0; chunk < 200 && sessions.size() <= per_class; ++chunk) {
      net.tick(60 * kSecond);
      sessions = profiler::extract_features(net.peek_capture(cap), eo);
    }
    if (sessions.size() < per_class) {
      c.expect(false, fleet[k].name + ": only " + std::to_string(sessions.size()) + " sessions");
      return;
    }
    sessions.resize(per_class);
    for (auto& inst : sessions) inst.label = fleet[k].name;
    std::shuffle(sessions.begin(), sessions.end(), rng);
    std::size_t n_train = per_class * 7 / 10;
    train.insert(train.end(), sessions.begin(), sessions.begin() + static_cast<long>(n_train));
    held.insert(held.end(), sessions.begin() + static_cast<long>(n_train), sessions.end());
    held_by_class[fleet[k].name].assign(sessions.begin() + static_cast<long>(n_train), sessions.end());
  }
  auto model = profiler::train_model(train);
  auto cm = profiler::confusion_matrix(model, held);
  c.summary = "held-out accuracy " + text::format_fixed(cm.accuracy(), 4) + " over " + std::to_string(held.size());
  c.expect(cm.accuracy() >= 0.90, "held-out accuracy " + text::format_fixed(cm.accuracy(), 4));
  for (const auto& [name, group] : held_by_class) {
    auto p = profiler::profile_sequences(model, group, name);
    double sum = 0;
    for (double v : p.per_class) sum += v;
    c.expect(std::abs(sum - 1.0) <= 1e-9, name + ": distribution sums to " + text::format_double(sum));
    auto top = std::max_element(p.per_class.begin(), p.per_class.end()) - p.per_class.begin();
    c.expect(p.top_class == p.classes[static_cast<std::size_t>(top)], name + ": top_class is not the argmax");
  }
}

// 6 ----------------------------------------------------------------------

void tree_oracle(Check& c) {
  std::mt19937 rng(6);
  for (int iter = 0; iter < 30; ++iter) {
    int n = 10 + static_cast<int>(rng() % 191);
    int nf = 1 + static_cast<int>(rng() % 4);
    int nc = 2 + static_cast<int>(rng() % 3);
    profiler::TrainParams p{1 + static_cast<int>(rng() % 8), 1 + static_cast<int>(rng() % 4)};
    std::vector<std::vector<double>> x;
    std::vector<std::string> y;
    for (int i = 0; i < n; ++i) {
      std::vector<double> row;
      for (int f = 0; f < nf; ++f) row.push_back(static_cast<double>(rng() % 25) * 0.5);
      x.push_back(row);
      // Training requires min_leaf instances of every class.
      int cls = i < nc * p.min_leaf ? i % nc : static_cast<int>(rng() % nc);
      y.push_back("k" + std::to_string(cls));
    }
    auto m = profiler::train_vectors(x, y, p);
    auto chk = oracle::check_tree(m, x, y);
    c.expect(chk.worst_gap <= 1e-9, "dataset " + std::to_string(iter) + ": split gain below oracle maximum by " +
                                        text::format_double(chk.worst_gap));
    c.expect(chk.worst_report <= 1e-9, "dataset " + std::to_string(iter) + ": stored gain disagrees with oracle");
    c.expect(!chk.leaf_missed_split, "dataset " + std::to_string(iter) + ": leaf left a valid split unused");
  }

  auto single = profiler::train_vectors({{1, 2}, {3, 4}, {5, 6}}, {"a", "a", "a"}, {12, 1});
  c.expect(single.nodes.size() == 1 && single.nodes[0].leaf, "single-class data did not give one leaf");
  c.expect(!single.warning.empty(), "single-class data gave no warning");

  std::vector<std::vector<double>> x;
  std::vector<std::string> y;
  auto add = [&](double a, double b, const char* cls, int k) {
    for (int i = 0; i < k; ++i) {
      x.push_back({a, b});
      y.push_back(cls);
    }
  };
  add(0, 0, "A", 10);
  add(1, 1, "A", 5);
  add(0, 1, "B", 8);
  add(1, 0, "B", 8);
  auto xr = profiler::train_vectors(x, y, {12, 1});
  c.expect(xr.depth() == 2, "xor depth " + std::to_string(xr.depth()));
  std::size_t right = 0;
  for (std::size_t i = 0; i < x.size(); ++i) right += xr.classes[profiler::predict_index(xr, x[i])] == y[i];
  c.expect(right == x.size(), "xor training accuracy below 100%");
}

// 7 ----------------------------------------------------------------------

struct Fixture {
  testutil::TempDir dir;
  core::Registry registry;
  Fixture() {
    auto a = with_ports({22, 80, 443});
    a.device_type = "cam";
    auto b = with_ports({443});
    b.device_type = "plug";
    b.stored_data_class = simnet::StoredDataClass::sensitive;
    text::write_file(dir.file("a.json"), simnet::device_spec_to_json(a));
    text::write_file(dir.file("b.json"), simnet::device_spec_to_json(b));
    fs::create_directories(dir.file("reg"));
    auto elem = [&](const std::string& id, const std::string& body) {
      text::write_file(dir.file("reg/" + id + ".elem"), "id = " + id + "\n" + body);
    };
    elem("d1", "driver = device\nspec = ../a.json\n");
    elem("d2", "driver = device\nspec = ../b.json\n");
    elem("clock", "driver = time_sim\n");
    elem("sniffer", "driver = sniffer\n");
    elem("scan", "driver = port_scan\n");
    elem("fp", "driver = fingerprint\n");
    elem("mgmt", "driver = management_access\n");
    elem("store", "driver = data_collection\n");
    elem("down", "driver = downgrade\n");
    registry = orchestrator::load_registry(dir.file("reg"));
  }
};

std::string random_action(std::mt19937& rng) {
  std::string dev = rng() % 2 ? "d1" : "d2";
  switch (rng() % 8) {
    case 0: return "USER, clock, START, {duration_s=" + std::to_string(1 + rng() % 5) + "}";
    case 1: return "USER, sniffer, START, {}";
    case 2: return "USER, sniffer, STOP, {}";
    case 3: return "USER, scan, TEST, {target=\"" + dev + "\", ports=\"1-" + std::to_string(100 + rng() % 400) + "\"}";
    case 4: return "USER, fp, TEST, {target=\"" + dev + "\"}";
    case 5: return "USER, mgmt, TEST, {target=\"" + dev + "\"}";
    case 6: return "USER, store, TEST, {target=\"" + dev + "\"}";
    default: return "USER, down, TEST, {target=\"" + dev + "\"}";
  }
}

void orchestration_invariants(Check& c) {
  Fixture fx;
  std::mt19937 rng(7);
  std::size_t total_actions = 0, total_verdicts = 0;
  for (int iter = 0; iter < 25; ++iter) {
    std::string text = "scenario: random" + std::to_string(iter) + "\n";
    if (rng() % 2) text += "context_repeat: none\n";
    int tests = 1 + static_cast<int>(rng() % 4);
    for (int t = 0; t < tests; ++t) {
      text += "\ntest t" + std::to_string(t) + "\n  phase: " + (rng() % 3 ? "standard" : "context") + "\n";
      int actions = 1 + static_cast<int>(rng() % 5);
      for (int a = 0; a < actions; ++a) text += "  action: " + random_action(rng) + "\n";
    }
    auto s = core::parse_scenario(text);
    orchestrator::RunOptions o;
    o.config.runs_dir = fx.dir.file("runs");
    o.seed = rng();
    auto r = orchestrator::run_scenario(s, fx.registry, o);
    auto trace = core::read_trace(r.run_dir + "/trace.rec");
    std::string tag = "scenario " + std::to_string(iter) + ": ";

    // Expected order: every standard test, then every context test.
    std::vector<std::pair<core::Phase, const core::Action*>> expected;
    for (auto phase : {core::Phase::standard, core::Phase::context}) {
      for (std::size_t i = 0; i < s.tests.size(); ++i) {
        if (s.phase_tags[i] != phase) continue;
        for (const auto& a : s.tests[i].actions) expected.push_back({phase, &a});
      }
    }
    c.expect(trace.size() == expected.size(), tag + "trace has " + std::to_string(trace.size()) + " entries for " +
                                                  std::to_string(expected.size()) + " actions");
    std::size_t executed_tests = 0;
    bool seen_context = false;
    for (std::size_t i = 0; i < std::min(trace.size(), expected.size()); ++i) {
      c.expect(trace[i].phase == expected[i].first && trace[i].action == *expected[i].second,
               tag + "trace entry " + std::to_string(i) + " out of order");
      if (trace[i].phase == core::Phase::context) seen_context = true;
      c.expect(!(seen_context && trace[i].phase == core::Phase::standard), tag + "standard action after context");
      if (trace[i].action.command == core::Command::TEST && trace[i].outcome.ok) ++executed_tests;
    }
    c.expect(r.report.phase1.size() + r.report.phase2.size() == executed_tests, tag + "verdict count mismatch");
    total_actions += trace.size();
    total_verdicts += executed_tests;
    c.expect(orchestrator::rerender_run(r.run_dir) == slurp(r.run_dir + "/report.txt"), tag + "re-render differs");
  }
  c.summary = "25 scenarios, " + std::to_string(total_actions) + " actions, " + std::to_string(total_verdicts) + " verdicts";
}

// 8 ----------------------------------------------------------------------

void determinism(Check& c) {
  auto reg = orchestrator::load_registry(kDemo + "/registry");
  for (const char* name : {"context_attack.scn", "camera_audit.scn"}) {
    auto s = core::parse_scenario(slurp(kDemo + "/scenarios/" + name));
    std::vector<std::string> dirs;
    testutil::TempDir a, b;
    for (auto* t : {&a, &b}) {
      orchestrator::RunOptions o;
      o.config.runs_dir = t->file("runs");
      o.scenario_dir = kDemo + "/scenarios";
      o.seed = 42;
      dirs.push_back(orchestrator::run_scenario(s, reg, o).run_dir);
    }
    for (const char* f : {"captures.rec", "trace.rec", "status.rec", "report.rec", "report.txt"}) {
      auto x = slurp(dirs[0] + "/" + f);
      c.expect(!x.empty() && x == slurp(dirs[1] + "/" + f), std::string(name) + ": " + f + " differs");
    }
  }
}

// 9 ----------------------------------------------------------------------

void tap_completeness(Check& c) {
  std::mt19937 rng(9);
  std::size_t judged = 0, within = 0;
  for (int trial = 0; trial < 12; ++trial) {
    simnet::VirtualNetwork net(simnet::NetworkOptions{static_cast<std::uint64_t>(trial + 1)});
    std::map<std::string, simnet::PayloadClass> cls;
    int devices = 1 + static_cast<int>(rng() % 4);
    for (int d = 0; d < devices; ++d) {
      auto s = with_ports({443});
      s.encryption.payload_class = rng() % 2 ? simnet::PayloadClass::encrypted : simnet::PayloadClass::plaintext;
      s.traffic.size_mean = 64 + static_cast<double>(rng() % 1200);
      s.traffic.size_stddev = s.traffic.size_mean / 10;
      s.traffic.interarrival_mean_ms = 5 + static_cast<double>(rng() % 200);
      s.traffic.interarrival_stddev_ms = 1;
      auto h = net.spawn_device(s);
      cls[h.address] = s.encryption.payload_class;
    }
    auto before = net.emitted_events();
    auto cap = net.start_capture(simnet::CaptureScope::everything());
    net.tick(static_cast<simnet::VirtualTime>(5 + rng() % 25) * kSecond);
    auto recs = net.stop_capture(cap);
    auto emitted = net.emitted_events() - before;
    c.expect(recs.size() == emitted, "trial " + std::to_string(trial) + ": " + std::to_string(recs.size()) +
                                         " records for " + std::to_string(emitted) + " events");
    for (const auto& r : recs) {
      if (r.size < 256) continue;
      auto it = cls.find(r.src_addr);
      if (it == cls.end()) it = cls.find(r.dst_addr);
      if (it == cls.end()) continue;
      ++judged;
      bool ok = it->second == simnet::PayloadClass::encrypted ? r.payload_entropy >= 7.0 : r.payload_entropy <= 5.0;
      within += ok;
    }
  }
  c.summary = std::to_string(within) + "/" + std::to_string(judged) + " large payloads within entropy bounds";
  c.expect(judged > 0, "no payloads of 256 bytes or more");
  double frac = judged ? static_cast<double>(within) / static_cast<double>(judged) : 0.0;
  c.expect(frac >= 0.99, "entropy class bounds hold for " + text::format_fixed(100 * frac, 2) + "% of " +
                             std::to_string(judged) + " records");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  void (*body)(Check&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "port-risk worked example", 5, port_risk_example},
      {2, "threshold partition", 1, threshold_partition},
      {3, "context-triggered attack scenario", 30, context_attack},
      {4, "verdict table", 60, verdict_suite},
      {5, "profiler accuracy on a synthetic fleet", 60, profiler_fleet},
      {6, "decision-tree oracle equivalence", 60, tree_oracle},
      {7, "orchestration invariants", 30, orchestration_invariants},
      {8, "determinism", 30, determinism},
      {9, "capture-tap completeness", 30, tap_completeness},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.budget_s) c.failures.push_back("took " + text::format_fixed(secs, 2) + " s, budget " +
                                                 text::format_fixed(cr.budget_s, 0) + " s");
    bool ok = c.failures.empty();
    failed += !ok;
    std::printf("criterion %d (%s): %s [%.2f s]%s%s\n", cr.id, cr.name, ok ? "PASS" : "FAIL", secs,
                c.summary.empty() ? "" : " ", c.summary.c_str());
    for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i) std::printf("    %s\n", c.failures[i].c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
