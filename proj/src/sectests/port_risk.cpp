#include "iotbed/sectests/port_risk.hpp"

#include <algorithm>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::sectests {

void PortScoreList::add(PortScore entry) {
  if (entry.port < 1 || entry.port > 65535) {
    fail(ErrorCode::validation, "score list port out of range: " + std::to_string(entry.port));
  }
  if (entry.score < 0) fail(ErrorCode::validation, "negative score for port " + std::to_string(entry.port));
  if (find(entry.port)) fail(ErrorCode::validation, "duplicate port in score list: " + std::to_string(entry.port));
  entries_.push_back(std::move(entry));
}

const PortScore* PortScoreList::find(int port) const {
  for (const auto& e : entries_) {
    if (e.port == port) return &e;
  }
  return nullptr;
}

PortScoreList default_score_list() {
  PortScoreList list;
  list.add({80, "A web server is running on this port", 3});
  list.add({5900, "A vnc server is running on this port", 3});
  list.add({445, "Microsoft-DS Active Directory, Windows shares", 1});
  list.add({443, "A TLSv1 server answered on this port", 5});
  list.add({49152, "The Win32 process 'wininit.exe' is listening on this port", 1});
  return list;
}

PortScoreList parse_score_list(const std::string& content) {
  PortScoreList list;
  int line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto first = line.find(',');
    auto last = line.rfind(',');
    if (first == std::string::npos || first == last) throw ParseError(line_no, 1, "expected port,description,score");
    auto port = text::to_int(text::trim(line.substr(0, first)));
    auto score = text::to_double(text::trim(line.substr(last + 1)));
    if (!port) throw ParseError(line_no, 1, "bad port");
    if (!score) throw ParseError(line_no, static_cast<int>(last) + 2, "bad score");
    list.add({static_cast<int>(*port), text::trim(line.substr(first + 1, last - first - 1)), *score});
  }
  return list;
}

PortScoreList load_score_list(const std::string& path) { return parse_score_list(text::read_file(path)); }

Grade risk_level_for(double total, const RiskThresholds& t) {
  if (total <= 0) return Grade::SAFE;
  if (total < t.major_from) return Grade::MINOR_RISK;
  if (total <= t.critical_above) return Grade::MAJOR_RISK;
  return Grade::CRITICAL_RISK;
}

RiskAssessment score_ports(std::vector<int> open_ports, const PortScoreList& list, const RiskThresholds& t) {
  RiskAssessment a;
  std::sort(open_ports.begin(), open_ports.end());
  open_ports.erase(std::unique(open_ports.begin(), open_ports.end()), open_ports.end());
  a.open_ports = open_ports;
  for (const auto& e : list.entries()) {
    if (std::binary_search(open_ports.begin(), open_ports.end(), e.port)) {
      a.scored.push_back(e);
      a.total_score += e.score;
    }
  }
  for (int p : open_ports) {
    if (!list.find(p)) a.unscored.push_back(p);
  }
  a.risk_level = risk_level_for(a.total_score, t);
  return a;
}

std::vector<int> port_scan(simnet::Transport& transport, const std::string& target, int first, int last) {
  if (first < 1 || last > 65535 || first > last) {
    fail(ErrorCode::invalid_argument, "bad port range " + std::to_string(first) + "-" + std::to_string(last));
  }
  if (!transport.reachable(target)) fail(ErrorCode::not_found, "unreachable target " + target);
  std::vector<int> open;
  for (int p = first; p <= last; ++p) {
    if (transport.connect(target, p)) open.push_back(p);
  }
  return open;
}

std::string format_risk_report(const std::string& target, const RiskAssessment& a) {
  std::string out = "Overall Results\n";
  out += "  Target: " + target + "\n";
  std::vector<std::string> ports;
  for (int p : a.open_ports) ports.push_back(std::to_string(p) + "/tcp");
  out += "  Discovered open ports (" + std::to_string(a.open_ports.size()) + "): " +
         (ports.empty() ? std::string("none") : text::join(ports, ", ")) + "\n";
  out += "  Risk Level: " + std::string(display_name(a.risk_level)) + " (" + std::string(to_string(a.risk_level)) +
         ")\n";
  out += "\nMetric Score\n";
  for (const auto& s : a.scored) {
    out += "  " + std::to_string(s.port) + "\t" + text::format_double(s.score) + "\t" + s.description + "\n";
  }
  if (!a.unscored.empty()) {
    std::vector<std::string> u;
    for (int p : a.unscored) u.push_back(std::to_string(p));
    out += "  unscored: " + text::join(u, ", ") + "\n";
  }
  out += "  Total: " + text::format_double(a.total_score) + "\n";
  return out;
}

}  // namespace iotbed::sectests
