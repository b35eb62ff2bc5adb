#include "iotbed/iotbed.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"
#include "iotbed/core/scenario_parser.hpp"
#include "iotbed/orchestrator/elements.hpp"
#include "iotbed/orchestrator/run.hpp"
#include "iotbed/orchestrator/workflows.hpp"
#include "iotbed/simnet/records_io.hpp"

namespace fs = std::filesystem;
using namespace iotbed;

struct iotb_session {
  orchestrator::Config config;
  std::uint64_t seed = 1;
};

namespace {

thread_local std::string last_error;

iotb_status status_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument:
      return IOTB_E_INVALID_ARG;
    case ErrorCode::parse:
      return IOTB_E_PARSE;
    case ErrorCode::validation:
    case ErrorCode::duplicate:
      return IOTB_E_VALIDATION;
    case ErrorCode::not_found:
      return IOTB_E_NOT_FOUND;
    case ErrorCode::storage:
      return IOTB_E_IO;
    case ErrorCode::runtime:
      break;
  }
  return IOTB_E_RUNTIME;
}

template <class F>
iotb_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return IOTB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_for(e.code());
  } catch (const fs::filesystem_error& e) {
    last_error = e.what();
    return IOTB_E_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return IOTB_E_RUNTIME;
  } catch (const std::exception& e) {
    last_error = e.what();
    return IOTB_E_RUNTIME;
  }
}

char* dup(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(bool cond, const char* what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

simnet::DeviceSpec resolve_target(const iotb_session& s, const std::string& target) {
  if (fs::is_regular_file(target)) return simnet::load_device_spec(target);
  auto registry = orchestrator::load_registry(s.config.registry_dir);
  if (!registry.contains(target)) fail(ErrorCode::not_found, "no device spec file or element named '" + target + "'");
  auto desc = registry.resolve(target);
  auto spec = desc.config.find("spec");
  if (desc.manifest.driver != "device" || spec == desc.config.end()) {
    fail(ErrorCode::validation, "element '" + target + "' is not a device");
  }
  fs::path p(spec->second);
  if (p.is_relative()) p = fs::path(desc.base_dir) / p;
  return simnet::load_device_spec(p.string());
}

}  // namespace

extern "C" {

const char* iotb_version(void) { return "0.1.0"; }

const char* iotb_last_error(void) { return last_error.c_str(); }

void iotb_string_free(char* s) { std::free(s); }

iotb_status iotb_session_open(const char* config_path, iotb_session** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    auto s = std::make_unique<iotb_session>();
    s->config = orchestrator::resolve_config(config_path ? config_path : "");
    *out = s.release();
  });
}

void iotb_session_close(iotb_session* s) { delete s; }

iotb_status iotb_session_set_backend(iotb_session* s, iotb_backend backend) {
  return guard([&] {
    require(s != nullptr, "session is null");
    require(backend == IOTB_BACKEND_MEMORY || backend == IOTB_BACKEND_LOOPBACK, "unknown backend");
    s->config.backend = backend == IOTB_BACKEND_MEMORY ? orchestrator::Backend::memory : orchestrator::Backend::loopback;
  });
}

iotb_status iotb_session_set_seed(iotb_session* s, uint64_t seed) {
  return guard([&] {
    require(s != nullptr, "session is null");
    s->seed = seed;
  });
}

iotb_status iotb_session_set_runs_dir(iotb_session* s, const char* dir) {
  return guard([&] {
    require(s && dir && *dir, "session and dir are required");
    s->config.runs_dir = dir;
  });
}

iotb_status iotb_session_set_registry_dir(iotb_session* s, const char* dir) {
  return guard([&] {
    require(s && dir && *dir, "session and dir are required");
    s->config.registry_dir = dir;
  });
}

iotb_status iotb_list_elements(iotb_session* s, char** out_text) {
  return guard([&] {
    require(s && out_text, "session and out_text are required");
    *out_text = dup(orchestrator::format_element_list(s->config.registry_dir));
  });
}

iotb_status iotb_run_scenario(iotb_session* s, const char* scenario_path, char** run_dir, char** report_text,
                              int* exit_code) {
  return guard([&] {
    require(s && scenario_path && exit_code, "session, scenario_path and exit_code are required");
    auto scenario = core::parse_scenario(text::read_file(scenario_path));
    auto registry = orchestrator::load_registry(s->config.registry_dir);
    orchestrator::RunOptions opt;
    opt.config = s->config;
    opt.seed = s->seed;
    auto parent = fs::path(scenario_path).parent_path();
    opt.scenario_dir = parent.empty() ? "." : parent.string();
    auto result = orchestrator::run_scenario(scenario, registry, opt);
    std::string text = orchestrator::render_report(result.report);
    char* dir = run_dir ? dup(result.run_dir) : nullptr;
    char* rep = nullptr;
    try {
      if (report_text) rep = dup(text);
    } catch (...) {
      std::free(dir);
      throw;
    }
    if (run_dir) *run_dir = dir;
    if (report_text) *report_text = rep;
    *exit_code = result.exit_code;
  });
}

iotb_status iotb_render_report(iotb_session* s, const char* run_id, char** out_text) {
  return guard([&] {
    require(s && run_id && out_text, "session, run_id and out_text are required");
    std::string id = run_id;
    require(!id.empty() && id.find('/') == std::string::npos && id != "." && id != "..", "malformed run id");
    auto dir = fs::path(s->config.runs_dir) / id;
    if (!fs::is_regular_file(dir / "report.rec")) fail(ErrorCode::not_found, "unknown run id '" + id + "'");
    *out_text = dup(orchestrator::rerender_run(dir.string()));
  });
}

iotb_status iotb_scan(iotb_session* s, const char* target, const char* ports, const char* score_list,
                      char** out_text, int* exit_code) {
  return guard([&] {
    require(s && target && out_text && exit_code, "session, target, out_text and exit_code are required");
    auto spec = resolve_target(*s, target);
    orchestrator::ScanRequest req;
    if (ports) req.ports = ports;
    req.score_list = score_list ? score_list : s->config.score_list;
    req.backend = s->config.backend;
    req.seed = s->seed;
    auto outcome = orchestrator::scan_device(spec, req);
    *out_text = dup(outcome.text);
    *exit_code = outcome.exit_code;
  });
}

iotb_status iotb_profile_train(iotb_session* s, const char* captures_dir, const char* labels_path,
                               const char* model_out, int max_depth, int min_leaf, double holdout, char** summary) {
  return guard([&] {
    require(s && labels_path && model_out, "session, labels_path and model_out are required");
    orchestrator::TrainRequest req;
    req.labels_path = labels_path;
    if (captures_dir) req.captures_dir = captures_dir;
    if (max_depth > 0) req.params.max_depth = max_depth;
    if (min_leaf > 0) req.params.min_leaf = min_leaf;
    req.holdout = holdout;
    req.seed = s->seed;
    auto outcome = orchestrator::train_from_labels(req);
    profiler::save_model(model_out, outcome.model);
    if (summary) {
      std::string text = "classes: " + text::join(outcome.model.classes, ", ") + "\n";
      text += "training sequences: " + std::to_string(outcome.n_train) + "\n";
      text += "depth: " + std::to_string(outcome.model.depth()) + ", leaves: " +
              std::to_string(outcome.model.leaf_count()) + "\n";
      if (!outcome.model.warning.empty()) text += "warning: " + outcome.model.warning + "\n";
      if (outcome.confusion) {
        text += "\n" + profiler::render_confusion_matrix(*outcome.confusion);
      }
      *summary = dup(text);
    }
  });
}

iotb_status iotb_profile_test(iotb_session* s, const char* model_path, const char* const* captures,
                              size_t n_captures, char** table) {
  return guard([&] {
    require(s && model_path && table, "session, model_path and table are required");
    require(n_captures > 0 && captures, "at least one capture is required");
    std::vector<std::string> paths;
    for (size_t i = 0; i < n_captures; ++i) {
      require(captures[i] != nullptr, "null capture path");
      paths.emplace_back(captures[i]);
    }
    auto model = profiler::load_model(model_path);
    *table = dup(profiler::render_profile_table(orchestrator::profile_captures(model, paths)));
  });
}

iotb_status iotb_capture(iotb_session* s, const char* target, double duration_s, const char* out_path,
                         size_t* n_records) {
  return guard([&] {
    require(s && target && out_path, "session, target and out_path are required");
    auto records = orchestrator::generate_capture(resolve_target(*s, target), duration_s, s->seed);
    simnet::write_capture(out_path, records);
    if (n_records) *n_records = records.size();
  });
}

}  // extern "C"
