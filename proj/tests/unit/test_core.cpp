#include <doctest.h>

#include <functional>
#include <random>
#include <thread>

#include "helpers.hpp"
#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/core/registry.hpp"
#include "iotbed/core/scenario_parser.hpp"
#include "iotbed/core/trace.hpp"

using namespace iotbed;
using namespace iotbed::core;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an iotbed::Error");
  return ErrorCode::runtime;
}

ElementDescriptor gps_element(const std::string& id = "GPS_SIM") {
  ElementDescriptor d;
  d.id = id;
  d.kind = ElementKind::simulator;
  d.manifest.driver = "gps_sim";
  d.manifest.commands[Command::START].params["file"] = {ParamType::file, true};
  d.manifest.commands[Command::STOP] = {};
  d.manifest.commands[Command::SET].params["lat"] = {ParamType::number, true};
  return d;
}

}  // namespace

TEST_CASE("bare file param in an action line") {
  auto a = parse_action("USER, GPS_SIM, START, {trajectory.cfg}");
  CHECK(a.initiator == "USER");
  CHECK(a.element == "GPS_SIM");
  CHECK(a.command == Command::START);
  REQUIRE(a.params.size() == 1);
  CHECK(std::get<FileRef>(a.params.at("file")).path == "trajectory.cfg");
}

TEST_CASE("typed params") {
  auto p = parse_params(R"({k=3, name="a b", path=@x/y.csv, word=abc})");
  CHECK(std::get<double>(p.at("k")) == 3.0);
  CHECK(std::get<std::string>(p.at("name")) == "a b");
  CHECK(std::get<FileRef>(p.at("path")).path == "x/y.csv");
  CHECK(std::get<std::string>(p.at("word")) == "abc");
}

TEST_CASE("parse errors") {
  SUBCASE("empty scenario") {
    CHECK(code_of([] { parse_scenario("scenario: s\n"); }) == ErrorCode::validation);
  }
  SUBCASE("empty test") {
    CHECK_THROWS_WITH_AS(parse_scenario("scenario: s\ntest t\n  phase: standard\n"), doctest::Contains("empty test"),
                         Error);
  }
  SUBCASE("unknown command reports position") {
    try {
      parse_scenario("scenario: s\ntest t\n  action: USER, x, EXPLODE, {}\n");
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
      CHECK(std::string(e.what()).find("unknown command") != std::string::npos);
    }
  }
  SUBCASE("unresolved template") {
    CHECK_THROWS_AS(parse_scenario("scenario: s\ntest t\n  use: nope\n"), Error);
  }
  SUBCASE("missing header") { CHECK_THROWS_AS(parse_scenario("test t\n  action: USER, x, START, {}\n"), Error); }
}

TEST_CASE("templates expand inline") {
  auto s = parse_scenario(
      "scenario: s\n"
      "template warm\n"
      "  action: USER, clock, START, {duration_s=5}\n"
      "test t\n"
      "  action: USER, a, START, {}\n"
      "  use: warm\n");
  REQUIRE(s.tests.size() == 1);
  REQUIRE(s.tests[0].actions.size() == 2);
  CHECK(s.tests[0].actions[1].element == "clock");
}

TEST_CASE("library templates and recursion guard") {
  TemplateLibrary lib;
  lib.add_text("template a\n  use: b\ntemplate b\n  use: a\n");
  CHECK_THROWS_AS(parse_scenario("scenario: s\ntest t\n  use: a\n", &lib), Error);
}

TEST_CASE("context_repeat copies standard tests into phase 2") {
  auto s = parse_scenario("scenario: s\ncontext_repeat: all\ntest t\n  action: USER, a, START, {}\n");
  REQUIRE(s.tests.size() == 2);
  CHECK(s.phase_tags[0] == Phase::standard);
  CHECK(s.phase_tags[1] == Phase::context);
  CHECK(s.tests[1].actions == s.tests[0].actions);
}

// Property: parse(serialize(s)) == s for random scenarios.
TEST_CASE("scenario round trip") {
  std::mt19937 rng(7);
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  const auto& cmds = all_commands();
  for (int iter = 0; iter < 200; ++iter) {
    Scenario s;
    s.name = "s" + std::to_string(iter);
    int tests = 1 + pick(4);
    for (int t = 0; t < tests; ++t) {
      Test test;
      test.name = "t" + std::to_string(t);
      int actions = 1 + pick(5);
      for (int a = 0; a < actions; ++a) {
        Action act;
        act.initiator = pick(3) ? "USER" : "el" + std::to_string(pick(5));
        act.element = "el" + std::to_string(pick(5));
        act.command = cmds[pick(static_cast<int>(cmds.size()))];
        int np = pick(4);
        for (int p = 0; p < np; ++p) {
          std::string key = "k" + std::to_string(p);
          switch (pick(3)) {
            case 0:
              act.params[key] = static_cast<double>(pick(10000)) / 8.0 - 100.0;
              break;
            case 1:
              act.params[key] = std::string("v, \"q\" ") + std::to_string(pick(100));
              break;
            default:
              act.params[key] = FileRef{"dir/f" + std::to_string(pick(9)) + ".csv"};
          }
        }
        test.actions.push_back(std::move(act));
      }
      s.tests.push_back(std::move(test));
      s.phase_tags.push_back(pick(2) ? Phase::standard : Phase::context);
    }
    auto text = serialize_scenario(s);
    auto back = parse_scenario(text);
    REQUIRE(back == s);
    CHECK(serialize_scenario(back) == text);
  }
}

TEST_CASE("registry lifecycle") {
  Registry r;
  CHECK(r.register_element(gps_element("dut1")) == "dut1");
  CHECK(r.resolve("dut1").manifest.driver == "gps_sim");
  CHECK(code_of([&] { r.register_element(gps_element("dut1")); }) == ErrorCode::duplicate);
  r.remove_element("dut1");
  CHECK(code_of([&] { r.resolve("dut1"); }) == ErrorCode::not_found);
  CHECK(r.size() == 0);
}

TEST_CASE("list is sorted by id") {
  Registry r;
  r.register_element(gps_element("b"));
  r.register_element(gps_element("a"));
  auto l = r.list_elements();
  REQUIRE(l.size() == 2);
  CHECK(l[0].id == "a");
}

TEST_CASE("validate_action") {
  Registry r;
  r.register_element(gps_element());
  Action ok{"USER", "GPS_SIM", Command::START, {{"file", FileRef{"t.cfg"}}}};
  CHECK(validate_action(ok, r).ok());

  Action login = ok;
  login.command = Command::LOGIN;
  CHECK(validate_action(login, r).issue == ValidationIssue::unsupported_command);

  Action missing = ok;
  missing.params.clear();
  auto res = validate_action(missing, r);
  CHECK(res.issue == ValidationIssue::schema_mismatch);
  CHECK(res.message.find("file") != std::string::npos);

  Action wrong_type{"USER", "GPS_SIM", Command::SET, {{"lat", std::string("north")}}};
  CHECK(validate_action(wrong_type, r).issue == ValidationIssue::schema_mismatch);

  Action unknown = ok;
  unknown.element = "nope";
  CHECK(validate_action(unknown, r).issue == ValidationIssue::unknown_element);

  // Pure: repeated calls agree and leave the registry alone.
  CHECK(validate_action(missing, r).message == res.message);
  CHECK(r.size() == 1);
}

TEST_CASE("trace log appends") {
  testutil::TempDir dir;
  auto path = dir.file("trace.rec");
  TraceLog log(path);
  TraceEntry e;
  e.test = "t";
  e.action = parse_action("USER, GPS_SIM, START, {trajectory.cfg}");
  CHECK(log.append(e) == 1);
  e.timestamp_us = 5;
  e.outcome = Outcome::error("boom\ttab");
  e.artifacts = {"a", "b"};
  CHECK(log.append(e) == 2);

  auto entries = read_trace(path);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].seq == 1);
  CHECK(entries[1].outcome.message == "boom\ttab");
  CHECK(entries[1].artifacts == std::vector<std::string>{"a", "b"});
  CHECK(entries[1].action == e.action);

  log.close();
  CHECK_THROWS_AS(log.append(e), Error);
}

TEST_CASE("trace timestamps may not go backwards") {
  testutil::TempDir dir;
  TraceLog log(dir.file("t.rec"));
  TraceEntry e;
  e.timestamp_us = 10;
  log.append(e);
  e.timestamp_us = 9;
  CHECK_THROWS_AS(log.append(e), Error);
}

TEST_CASE("concurrent appends keep seq contiguous") {
  testutil::TempDir dir;
  auto path = dir.file("t.rec");
  {
    TraceLog log(path);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&log] {
        for (int i = 0; i < 50; ++i) log.append(TraceEntry{});
      });
    }
    for (auto& th : threads) th.join();
  }
  auto entries = read_trace(path);
  REQUIRE(entries.size() == 200);
  for (std::size_t i = 0; i < entries.size(); ++i) CHECK(entries[i].seq == i + 1);
}

TEST_CASE("record encoding escapes separators") {
  text::Record r{{"a", "x=y\tz\n"}, {"b", ""}};
  auto line = text::encode_record(r);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(text::decode_record(line) == r);
}
