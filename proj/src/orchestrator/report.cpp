#include "iotbed/orchestrator/report.hpp"

#include <map>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::orchestrator {

using sectests::Grade;

Overall summarize(const std::vector<TestResult>& phase1, const std::vector<TestResult>& phase2) {
  Overall o;
  for (const auto* list : {&phase1, &phase2}) {
    for (const auto& r : *list) {
      Grade g = r.verdict.grade;
      if (sectests::is_failing(g)) {
        ++o.fail_count;
      } else if (g != Grade::INDETERMINATE) {
        ++o.pass_count;
      }
      if (!o.highest_risk || sectests::severity(g) > sectests::severity(*o.highest_risk)) o.highest_risk = g;
    }
  }
  return o;
}

namespace {

struct Writer {
  std::string out;
  void put(const std::string& key, const std::string& value) { out += key + "=" + text::escape(value) + "\n"; }
};

std::string csv(const std::vector<std::string>& v) { return text::join(v, ","); }

std::vector<std::string> uncsv(const std::string& s) {
  if (s.empty()) return {};
  return text::split(s, ',');
}

void put_results(Writer& w, const std::string& prefix, const std::vector<TestResult>& list) {
  w.put(prefix + ".count", std::to_string(list.size()));
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string p = prefix + "." + std::to_string(i) + ".";
    w.put(p + "test", list[i].test);
    w.put(p + "element", list[i].element);
    w.put(p + "verdict_name", list[i].verdict.test_name);
    w.put(p + "grade", std::string(sectests::to_string(list[i].verdict.grade)));
    w.put(p + "detail", list[i].verdict.detail);
    w.put(p + "artifacts", csv(list[i].verdict.artifacts));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& content) {
    int line_no = 0;
    for (const auto& line : text::split(content, '\n')) {
      ++line_no;
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(line_no, 1, "expected key=value");
      fields_[line.substr(0, eq)] = text::unescape(line.substr(eq + 1));
    }
  }
  const std::string& get(const std::string& key) const {
    auto it = fields_.find(key);
    if (it == fields_.end()) fail(ErrorCode::parse, "report.rec lacks '" + key + "'");
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& def) const {
    auto it = fields_.find(key);
    return it == fields_.end() ? def : it->second;
  }
  std::size_t count(const std::string& key) const {
    auto v = text::to_int(get(key));
    if (!v || *v < 0) fail(ErrorCode::parse, "report.rec: bad count '" + key + "'");
    return static_cast<std::size_t>(*v);
  }
  double number(const std::string& key) const {
    auto v = text::to_double(get(key));
    if (!v) fail(ErrorCode::parse, "report.rec: bad number '" + key + "'");
    return *v;
  }

 private:
  std::map<std::string, std::string> fields_;
};

std::vector<TestResult> get_results(const Reader& r, const std::string& prefix) {
  std::vector<TestResult> out;
  std::size_t n = r.count(prefix + ".count");
  for (std::size_t i = 0; i < n; ++i) {
    std::string p = prefix + "." + std::to_string(i) + ".";
    TestResult t;
    t.test = r.get(p + "test");
    t.element = r.get(p + "element");
    auto g = sectests::grade_from_string(r.get(p + "grade"));
    if (!g) fail(ErrorCode::parse, "report.rec: bad grade at " + p);
    t.verdict = {r.get_or(p + "verdict_name", t.test), *g, r.get(p + "detail"), uncsv(r.get(p + "artifacts"))};
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::string serialize_report(const RunReport& r) {
  Writer w;
  w.put("format", "iotbed-report 1");
  w.put("run_id", r.run_id);
  w.put("scenario", r.scenario);
  w.put("seed", std::to_string(r.seed));
  w.put("backend", r.backend);
  w.put("trace_ref", r.trace_ref);
  w.put("device.count", std::to_string(r.devices.size()));
  for (std::size_t i = 0; i < r.devices.size(); ++i) {
    std::string p = "device." + std::to_string(i) + ".";
    const auto& d = r.devices[i];
    w.put(p + "element", d.element);
    w.put(p + "device_type", d.device_type);
    w.put(p + "address", d.address);
    w.put(p + "connectivity", csv(d.connectivity));
    w.put(p + "protocols", csv(d.protocols));
  }
  put_results(w, "phase1", r.phase1);
  put_results(w, "phase2", r.phase2);
  w.put("error.count", std::to_string(r.errors.size()));
  for (std::size_t i = 0; i < r.errors.size(); ++i) {
    std::string p = "error." + std::to_string(i) + ".";
    w.put(p + "test", r.errors[i].test);
    w.put(p + "phase", r.errors[i].phase);
    w.put(p + "message", r.errors[i].message);
  }
  w.put("profile.count", std::to_string(r.profiling.size()));
  for (std::size_t i = 0; i < r.profiling.size(); ++i) {
    std::string p = "profile." + std::to_string(i) + ".";
    const auto& pd = r.profiling[i];
    w.put(p + "device", pd.device_id);
    w.put(p + "classes", csv(pd.classes));
    std::vector<std::string> pc, raw;
    for (double v : pd.per_class) pc.push_back(text::format_double(v));
    for (double v : pd.raw_sums) raw.push_back(text::format_double(v));
    w.put(p + "per_class", csv(pc));
    w.put(p + "raw_sums", csv(raw));
    w.put(p + "top_class", pd.top_class);
    w.put(p + "top_confidence", text::format_double(pd.top_confidence));
    w.put(p + "n_sequences", std::to_string(pd.n_sequences));
  }
  w.put("finding.count", std::to_string(r.findings.size()));
  for (std::size_t i = 0; i < r.findings.size(); ++i) {
    w.put("finding." + std::to_string(i), analysis::encode_finding(r.findings[i]));
  }
  w.put("note.count", std::to_string(r.notes.size()));
  for (std::size_t i = 0; i < r.notes.size(); ++i) w.put("note." + std::to_string(i), r.notes[i]);
  w.put("overall.pass_count", std::to_string(r.overall.pass_count));
  w.put("overall.fail_count", std::to_string(r.overall.fail_count));
  w.put("overall.highest_risk",
        r.overall.highest_risk ? std::string(sectests::to_string(*r.overall.highest_risk)) : "-");
  return w.out;
}

RunReport parse_report(const std::string& content) {
  Reader rd(content);
  if (rd.get("format") != "iotbed-report 1") fail(ErrorCode::parse, "unsupported report format");
  RunReport r;
  r.run_id = rd.get("run_id");
  r.scenario = rd.get("scenario");
  auto seed = text::to_int(rd.get("seed"));
  if (!seed) fail(ErrorCode::parse, "report.rec: bad seed");
  r.seed = static_cast<std::uint64_t>(*seed);
  r.backend = rd.get("backend");
  r.trace_ref = rd.get("trace_ref");
  for (std::size_t i = 0, n = rd.count("device.count"); i < n; ++i) {
    std::string p = "device." + std::to_string(i) + ".";
    r.devices.push_back({rd.get(p + "element"), rd.get(p + "device_type"), rd.get(p + "address"),
                         uncsv(rd.get(p + "connectivity")), uncsv(rd.get(p + "protocols"))});
  }
  r.phase1 = get_results(rd, "phase1");
  r.phase2 = get_results(rd, "phase2");
  for (std::size_t i = 0, n = rd.count("error.count"); i < n; ++i) {
    std::string p = "error." + std::to_string(i) + ".";
    r.errors.push_back({rd.get(p + "test"), rd.get(p + "phase"), rd.get(p + "message")});
  }
  for (std::size_t i = 0, n = rd.count("profile.count"); i < n; ++i) {
    std::string p = "profile." + std::to_string(i) + ".";
    profiler::ProfileDistribution pd;
    pd.device_id = rd.get(p + "device");
    pd.classes = uncsv(rd.get(p + "classes"));
    for (const auto& v : uncsv(rd.get(p + "per_class"))) pd.per_class.push_back(text::to_double(v).value_or(0.0));
    for (const auto& v : uncsv(rd.get(p + "raw_sums"))) pd.raw_sums.push_back(text::to_double(v).value_or(0.0));
    pd.top_class = rd.get(p + "top_class");
    pd.top_confidence = rd.number(p + "top_confidence");
    pd.n_sequences = rd.count(p + "n_sequences");
    r.profiling.push_back(std::move(pd));
  }
  for (std::size_t i = 0, n = rd.count("finding.count"); i < n; ++i) {
    r.findings.push_back(analysis::decode_finding(rd.get("finding." + std::to_string(i))));
  }
  for (std::size_t i = 0, n = rd.count("note.count"); i < n; ++i) r.notes.push_back(rd.get("note." + std::to_string(i)));
  r.overall.pass_count = static_cast<int>(rd.count("overall.pass_count"));
  r.overall.fail_count = static_cast<int>(rd.count("overall.fail_count"));
  if (const auto& h = rd.get("overall.highest_risk"); h != "-") {
    r.overall.highest_risk = sectests::grade_from_string(h);
    if (!r.overall.highest_risk) fail(ErrorCode::parse, "report.rec: bad highest_risk");
  }
  return r;
}

namespace {

void render_results(std::string& out, const std::string& title, const std::vector<TestResult>& list) {
  out += title + "\n";
  if (list.empty()) {
    out += "  (none)\n";
    return;
  }
  for (const auto& t : list) {
    out += "  " + t.test + " [" + t.element + "]: " + std::string(sectests::to_string(t.verdict.grade)) + "\n";
    out += "    " + t.verdict.detail + "\n";
    if (!t.verdict.artifacts.empty()) out += "    artifacts: " + text::join(t.verdict.artifacts, ", ") + "\n";
  }
}

}  // namespace

std::string render_report(const RunReport& r) {
  std::string out;
  out += "IoT testbed run report\n";
  out += "======================\n";
  out += "run:      " + r.run_id + "\n";
  out += "scenario: " + r.scenario + "\n";
  out += "seed:     " + std::to_string(r.seed) + "\n";
  out += "backend:  " + r.backend + "\n";
  out += "trace:    " + r.trace_ref + "\n\n";
  out += "Devices under test\n";
  if (r.devices.empty()) out += "  (none)\n";
  for (const auto& d : r.devices) {
    out += "  " + d.element + ": " + d.device_type + " at " + d.address + "\n";
    out += "    connectivity: " + (d.connectivity.empty() ? std::string("-") : text::join(d.connectivity, ", ")) + "\n";
    out += "    protocols:    " + (d.protocols.empty() ? std::string("-") : text::join(d.protocols, ", ")) + "\n";
  }
  out += "\n";
  render_results(out, "Phase 1: standard testing", r.phase1);
  out += "\n";
  render_results(out, "Phase 2: context-based testing", r.phase2);
  out += "\nPhase 3: analysis\n";
  out += "  Findings (" + std::to_string(r.findings.size()) + ")\n";
  for (const auto& f : r.findings) {
    out += "    " + std::string(analysis::to_string(f.classification)) + " on " + f.device + " at t=" +
           text::format_fixed(simnet::to_seconds(f.virtual_time), 3) + "s";
    if (f.location) {
      out += " location (" + text::format_fixed(f.location->lat, 6) + ", " + text::format_fixed(f.location->lon, 6) + ")";
    } else {
      out += " location unknown (context gap)";
    }
    if (f.day) out += " " + std::string(simnet::to_string(*f.day));
    out += " [" + std::string(analysis::to_string(f.corroboration)) + "]\n";
  }
  if (!r.profiling.empty()) {
    out += "  Profiling\n";
    std::string table = profiler::render_profile_table(r.profiling);
    for (const auto& line : text::split(table, '\n')) {
      if (!line.empty()) out += "    " + line + "\n";
    }
  }
  for (const auto& n : r.notes) out += "  note: " + n + "\n";
  if (!r.errors.empty()) {
    out += "\nErrored tests\n";
    for (const auto& e : r.errors) out += "  " + e.test + " (" + e.phase + "): " + e.message + "\n";
  }
  out += "\nOverall\n";
  out += "  passed:       " + std::to_string(r.overall.pass_count) + "\n";
  out += "  failed:       " + std::to_string(r.overall.fail_count) + "\n";
  out += "  highest risk: " +
         (r.overall.highest_risk ? std::string(sectests::to_string(*r.overall.highest_risk)) : std::string("-")) + "\n";
  return out;
}

int exit_code_for(const RunReport& r) {
  if (!r.errors.empty()) return 2;
  if (r.overall.fail_count > 0) return 1;
  if (r.overall.highest_risk && sectests::severity(*r.overall.highest_risk) > sectests::severity(Grade::MINOR_RISK)) {
    return 1;
  }
  return 0;
}

}  // namespace iotbed::orchestrator
