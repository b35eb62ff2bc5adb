#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "formats_help.hpp"
#include "iotbed/iotbed.h"

namespace {

constexpr int kExitError = 2;

struct Owned {
  char* p = nullptr;
  ~Owned() { iotb_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Session {
  iotb_session* s = nullptr;
  ~Session() { iotb_session_close(s); }
};

int report_failure(iotb_status st) {
  std::cerr << "iotbed: error " << st << ": " << iotb_last_error() << "\n";
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iotbed: simulated IoT security testbed"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1);

  std::string config_path, backend = "", registry_dir, runs_dir;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "Config file");
  app.add_option("--backend", backend, "Transport backend")->check(CLI::IsMember({"memory", "loopback"}));
  app.add_option("--seed", seed, "Simulation seed");
  app.add_option("--registry", registry_dir, "Element registry directory (overrides config)");
  app.add_option("--runs-dir", runs_dir, "Run output directory (overrides config)");

  auto* run = app.add_subcommand("run", "Execute a scenario file");
  std::string scenario_path;
  run->add_option("scenario", scenario_path, "Scenario file")->required();

  auto* scan = app.add_subcommand("scan", "Port scan a device and score its risk");
  std::string target, ports, score_list;
  scan->add_option("target", target, "Device spec path or device element id")->required();
  scan->add_option("--ports", ports, "Port ranges, e.g. 1-1024,8080");
  scan->add_option("--score-list", score_list, "Score list CSV");

  auto* profile = app.add_subcommand("profile", "Train or apply the device-type model");
  profile->require_subcommand(1);
  auto* train = profile->add_subcommand("train", "Train a model from labeled captures");
  std::string labels, model_out, captures_dir;
  int max_depth = 0, min_leaf = 0;
  double holdout = 0.3;
  train->add_option("--captures", captures_dir, "Directory capture paths in the labels file resolve against");
  train->add_option("--labels", labels, "Labels CSV")->required();
  train->add_option("--out", model_out, "Model output path")->required();
  train->add_option("--max-depth", max_depth, "Tree depth limit (default 12)");
  train->add_option("--min-leaf", min_leaf, "Minimum instances per leaf (default 5)");
  train->add_option("--holdout", holdout, "Held-out fraction for the confusion matrix")->check(CLI::Range(0.0, 0.95));
  auto* test = profile->add_subcommand("test", "Profile captured traffic against a model");
  std::string model_path;
  std::vector<std::string> captures;
  test->add_option("--model", model_path, "Model file")->required();
  test->add_option("--capture", captures, "Capture file; repeat for one column per device")->required();

  app.add_subcommand("list-elements", "List registered elements");

  auto* report = app.add_subcommand("report", "Render the report of a finished run");
  std::string run_id;
  report->add_option("run_id", run_id, "Run id")->required();

  auto* capture = app.add_subcommand("capture", "Record a device's traffic to a capture file");
  std::string capture_target, capture_out;
  double duration = 60.0;
  capture->add_option("target", capture_target, "Device spec path or device element id")->required();
  capture->add_option("--duration", duration, "Virtual seconds to record");
  capture->add_option("--out", capture_out, "Capture output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  Session session;
  if (auto st = iotb_session_open(config_path.empty() ? nullptr : config_path.c_str(), &session.s)) {
    return report_failure(st);
  }
  if (!backend.empty()) {
    iotb_session_set_backend(session.s, backend == "memory" ? IOTB_BACKEND_MEMORY : IOTB_BACKEND_LOOPBACK);
  }
  iotb_session_set_seed(session.s, seed);
  if (!registry_dir.empty()) iotb_session_set_registry_dir(session.s, registry_dir.c_str());
  if (!runs_dir.empty()) iotb_session_set_runs_dir(session.s, runs_dir.c_str());

  if (*run) {
    Owned dir, text;
    int code = 0;
    if (auto st = iotb_run_scenario(session.s, scenario_path.c_str(), &dir.p, &text.p, &code)) {
      return report_failure(st);
    }
    std::cout << text.str() << "report: " << dir.str() << "/report.txt\n";
    return code;
  }
  if (*scan) {
    Owned text;
    int code = 0;
    if (auto st = iotb_scan(session.s, target.c_str(), ports.empty() ? nullptr : ports.c_str(),
                            score_list.empty() ? nullptr : score_list.c_str(), &text.p, &code)) {
      return report_failure(st);
    }
    std::cout << text.str();
    return code;
  }
  if (*train) {
    Owned summary;
    const char* dir = captures_dir.empty() ? nullptr : captures_dir.c_str();
    if (auto st = iotb_profile_train(session.s, dir, labels.c_str(), model_out.c_str(), max_depth, min_leaf, holdout,
                                     &summary.p)) {
      return report_failure(st);
    }
    std::cout << summary.str() << "model: " << model_out << "\n";
    return 0;
  }
  if (*test) {
    std::vector<const char*> paths;
    for (const auto& c : captures) paths.push_back(c.c_str());
    Owned table;
    if (auto st = iotb_profile_test(session.s, model_path.c_str(), paths.data(), paths.size(), &table.p)) {
      return report_failure(st);
    }
    std::cout << table.str();
    return 0;
  }
  if (app.got_subcommand("list-elements")) {
    Owned text;
    if (auto st = iotb_list_elements(session.s, &text.p)) return report_failure(st);
    std::cout << text.str();
    return 0;
  }
  if (*report) {
    Owned text;
    if (auto st = iotb_render_report(session.s, run_id.c_str(), &text.p)) return report_failure(st);
    std::cout << text.str();
    return 0;
  }
  if (*capture) {
    std::size_t n = 0;
    if (auto st = iotb_capture(session.s, capture_target.c_str(), duration, capture_out.c_str(), &n)) {
      return report_failure(st);
    }
    std::cout << n << " records written to " << capture_out << "\n";
    return 0;
  }
  return kExitError;
}
