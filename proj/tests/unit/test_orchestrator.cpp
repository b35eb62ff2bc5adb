#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "iotbed/common/error.hpp"
#include "iotbed/core/scenario_parser.hpp"
#include "iotbed/core/trace.hpp"
#include "iotbed/orchestrator/config.hpp"
#include "iotbed/orchestrator/elements.hpp"
#include "iotbed/orchestrator/run.hpp"
#include "iotbed/orchestrator/workflows.hpp"
#include "iotbed/simnet/device_spec.hpp"
#include "iotbed/simnet/records_io.hpp"

namespace fs = std::filesystem;
using namespace iotbed;
using namespace iotbed::orchestrator;

namespace {

const std::string kDemo = std::string(IOTBED_TEST_DATA) + "/../../demo";

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) { std::ofstream(path) << content; }

core::Registry demo_registry() { return load_registry(kDemo + "/registry"); }

RunOptions options_in(const testutil::TempDir& tmp, std::uint64_t seed = 1) {
  RunOptions o;
  o.config.runs_dir = tmp.file("runs");
  o.config.registry_dir = kDemo + "/registry";
  o.seed = seed;
  o.scenario_dir = kDemo + "/scenarios";
  return o;
}

core::Scenario demo_scenario(const std::string& name) {
  return core::parse_scenario(slurp(kDemo + "/scenarios/" + name));
}

std::size_t action_count(const core::Scenario& s) {
  std::size_t n = 0;
  for (const auto& t : s.tests) n += t.actions.size();
  return n;
}

std::size_t dir_entries(const std::string& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = parse_config("# comment\nregistry_dir = reg\nruns_dir=/abs/runs\nk = 2.5\nbackend = loopback\n", "/base");
  CHECK(c.registry_dir == "/base/reg");
  CHECK(c.runs_dir == "/abs/runs");
  CHECK(c.k == 2.5);
  CHECK(c.backend == Backend::loopback);
  CHECK(c.window_s == 5.0);
  CHECK_THROWS_AS(parse_config("colour = blue\n", "/"), Error);
  CHECK_THROWS_AS(parse_config("backend = carrier-pigeon\n", "/"), Error);
  CHECK_THROWS_AS(parse_config("k = -1\n", "/"), Error);
}

TEST_CASE("element files and registry loading") {
  auto d = parse_element("id = cam\ndriver = device\nspec = dev.json\n", "/x");
  CHECK(d.id == "cam");
  CHECK(d.kind == core::ElementKind::device_under_test);
  CHECK_THROWS_AS(parse_element("driver = device\n", "/x"), Error);
  CHECK_THROWS_AS(parse_element("id = a\ndriver = warp_drive\n", "/x"), Error);
  CHECK_THROWS_AS(parse_element("id = a\ndriver = device\n", "/x"), Error);

  auto reg = demo_registry();
  CHECK(reg.size() == 16);
  auto list = reg.list_elements();
  for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i - 1].id < list[i].id);
  CHECK(reg.resolve("portscan").kind == core::ElementKind::security_test);

  testutil::TempDir tmp;
  CHECK(load_registry(tmp.file("absent")).size() == 0);
  CHECK(format_element_list(tmp.file("absent")).find("no elements") != std::string::npos);
  CHECK(format_element_list(kDemo + "/registry").find("camera\tdevice_under_test\tdevice") != std::string::npos);
}

TEST_CASE("validation failures abort before anything is written") {
  testutil::TempDir tmp;
  auto opts = options_in(tmp);
  auto reg = demo_registry();
  auto bad = core::parse_scenario(
      "scenario: bad\n\ntest t\n  phase: standard\n  action: USER, ghost, START, {}\n"
      "  action: USER, portscan, TEST, {target=\"nowhere\"}\n");
  try {
    run_scenario(bad, reg, opts);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    std::string msg = e.what();
    CHECK(msg.find("ghost") != std::string::npos);
    CHECK(msg.find("nowhere") != std::string::npos);
  }
  CHECK(dir_entries(opts.config.runs_dir) == 0);

  auto schema = core::parse_scenario("scenario: s\n\ntest t\n  phase: standard\n  action: USER, clock, START, {}\n");
  CHECK_THROWS_AS(validate_scenario(schema, reg, opts), Error);
}

TEST_CASE("context attack demo end to end") {
  testutil::TempDir tmp;
  auto opts = options_in(tmp);
  auto s = demo_scenario("context_attack.scn");
  auto r = run_scenario(s, demo_registry(), opts);
  CHECK(r.exit_code == 0);
  CHECK(r.report.errors.empty());

  int attacks = 0, alarms = 0;
  for (const auto& f : r.report.findings) {
    CHECK(f.device == "tracker");
    CHECK(f.location.has_value());
    (f.classification == analysis::Classification::attack ? attacks : alarms)++;
  }
  CHECK(attacks == 2);
  CHECK(alarms == 1);

  // Trace: one entry per action, standard phase first, increasing seq.
  auto trace = core::read_trace(r.run_dir + "/trace.rec");
  CHECK(trace.size() == action_count(s));
  bool seen_context = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].phase == core::Phase::context) seen_context = true;
    if (seen_context) CHECK(trace[i].phase == core::Phase::context);
    if (i) {
      CHECK(trace[i].seq > trace[i - 1].seq);
      CHECK(trace[i].timestamp_us >= trace[i - 1].timestamp_us);
    }
    CHECK(trace[i].outcome.ok);
  }
  CHECK(seen_context);

  for (const char* f : {"scenario.scn", "captures.rec", "status.rec", "context.rec", "windows.rec", "anomalies.rec",
                        "findings.rec", "report.rec", "report.txt"}) {
    CHECK_MESSAGE(fs::exists(r.run_dir + "/" + f), f);
  }
  CHECK(rerender_run(r.run_dir) == slurp(r.run_dir + "/report.txt"));
  CHECK(parse_report(slurp(r.run_dir + "/report.rec")).findings.size() == 3);
}

TEST_CASE("camera audit fails and counts add up") {
  testutil::TempDir tmp;
  auto r = run_scenario(demo_scenario("camera_audit.scn"), demo_registry(), options_in(tmp));
  CHECK(r.exit_code == 1);
  CHECK(r.report.errors.empty());
  const auto& o = r.report.overall;
  CHECK(static_cast<std::size_t>(o.pass_count + o.fail_count) <= r.report.phase1.size() + r.report.phase2.size());
  CHECK(o == summarize(r.report.phase1, r.report.phase2));
  CHECK(r.report.phase2.empty());
  CHECK(exit_code_for(r.report) == 1);
}

TEST_CASE("an errored action skips the rest of its test only") {
  testutil::TempDir tmp;
  auto s = core::parse_scenario(
      "scenario: skip\ncontext_repeat: none\n\ntest broken\n  phase: standard\n"
      "  action: USER, sniffer, STOP, {}\n  action: USER, portscan, TEST, {target=\"tracker\", ports=\"440-450\"}\n\n"
      "test fine\n  phase: standard\n  action: USER, portscan, TEST, {target=\"tracker\", ports=\"440-450\"}\n");
  auto r = run_scenario(s, demo_registry(), options_in(tmp));
  auto trace = core::read_trace(r.run_dir + "/trace.rec");
  REQUIRE(trace.size() == 3);
  CHECK_FALSE(trace[0].outcome.ok);
  CHECK(trace[1].outcome.message == "skipped: earlier action failed");
  CHECK(trace[2].outcome.ok);
  REQUIRE(r.report.errors.size() == 1);
  CHECK(r.report.errors[0].test == "broken");
  CHECK(r.report.phase1.size() == 1);
  CHECK(r.exit_code == 2);
}

TEST_CASE("run ids are content hashes") {
  auto s = demo_scenario("context_attack.scn");
  auto id = run_id_for(s, 1);
  CHECK(id.size() == 16);
  CHECK(id == run_id_for(s, 1));
  CHECK(id != run_id_for(s, 2));
  testutil::TempDir tmp;
  auto a = run_scenario(s, demo_registry(), options_in(tmp));
  auto b = run_scenario(s, demo_registry(), options_in(tmp));
  CHECK(a.run_dir != b.run_dir);
  auto ra = parse_report(slurp(a.run_dir + "/report.rec"));
  auto rb = parse_report(slurp(b.run_dir + "/report.rec"));
  CHECK(rb.run_id == ra.run_id + "-2");
  rb.run_id = ra.run_id;
  CHECK(render_report(ra) == render_report(rb));
}

TEST_CASE("report record round trip") {
  RunReport r;
  r.run_id = "abc";
  r.scenario = "s";
  r.seed = 9;
  r.backend = "memory";
  r.devices.push_back({"cam", "ip_camera", "10.0.0.2", {"wifi"}, {"http", "rtsp"}});
  r.phase1.push_back({"t", "portscan", {"port_scan", sectests::Grade::MINOR_RISK, "total 13\tline two\nx", {"a"}}});
  r.phase2.push_back({"t", "tamper", {"tamper", sectests::Grade::PASS, "", {}}});
  r.errors.push_back({"t2", "standard", "boom"});
  r.notes.push_back("note");
  r.overall = summarize(r.phase1, r.phase2);
  auto back = parse_report(serialize_report(r));
  CHECK(back.run_id == r.run_id);
  CHECK(back.devices == r.devices);
  CHECK(back.phase1 == r.phase1);
  CHECK(back.phase2 == r.phase2);
  CHECK(back.errors == r.errors);
  CHECK(back.notes == r.notes);
  CHECK(back.overall == r.overall);
  CHECK(render_report(back) == render_report(parse_report(serialize_report(back))));
  CHECK(exit_code_for(r) == 2);
  r.errors.clear();
  CHECK(exit_code_for(r) == 0);
  r.overall.highest_risk = sectests::Grade::MODERATE_RISK;
  CHECK(exit_code_for(r) == 1);
}

TEST_CASE("scan workflow") {
  auto spec = simnet::load_device_spec(kDemo + "/devices/camera.json");
  auto out = scan_device(spec, {});
  CHECK(out.assessment.total_score == 13);
  CHECK(out.exit_code == 0);
  CHECK(out.text.find("Minor Risk") != std::string::npos);
  ScanRequest narrow;
  narrow.ports = "1-100";
  CHECK(scan_device(spec, narrow).assessment.total_score <= out.assessment.total_score);
}

TEST_CASE("capture, train and profile workflow") {
  testutil::TempDir tmp;
  auto cam = simnet::load_device_spec(kDemo + "/devices/camera.json");
  auto watch = simnet::load_device_spec(kDemo + "/devices/tracker.json");
  simnet::write_capture(tmp.file("cam.rec"), generate_capture(cam, 300, 1));
  simnet::write_capture(tmp.file("watch.rec"), generate_capture(watch, 300, 2));
  simnet::write_capture(tmp.file("probe_cam.rec"), generate_capture(cam, 60, 3));
  spit(tmp.file("labels.csv"), "cam.rec,ip_camera\nwatch.rec,smartwatch\n");

  auto labels = parse_labels(slurp(tmp.file("labels.csv")), tmp.str());
  REQUIRE(labels.size() == 2);
  CHECK(labels[0].path == tmp.file("cam.rec"));
  CHECK_THROWS_AS(parse_labels("no-comma-here\n", "/"), Error);

  TrainRequest req;
  req.labels_path = tmp.file("labels.csv");
  auto trained = train_from_labels(req);
  REQUIRE(trained.confusion.has_value());
  CHECK(trained.confusion->accuracy() >= 0.9);
  auto profiles = profile_captures(trained.model, {tmp.file("probe_cam.rec")});
  REQUIRE(profiles.size() == 1);
  CHECK(profiles[0].device_id == "probe_cam");
  CHECK(profiles[0].top_class == "ip_camera");
}
