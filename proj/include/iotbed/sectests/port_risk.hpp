#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iotbed/sectests/verdict.hpp"
#include "iotbed/simnet/network.hpp"

namespace iotbed::sectests {

struct PortScore {
  int port = 0;
  std::string description;
  double score = 0.0;
  bool operator==(const PortScore&) const = default;
};

// Entries keep file order; scored output follows it.
class PortScoreList {
 public:
  void add(PortScore entry);  // throws Error(validation) on duplicate port or negative score
  const std::vector<PortScore>& entries() const { return entries_; }
  const PortScore* find(int port) const;

 private:
  std::vector<PortScore> entries_;
};

PortScoreList default_score_list();
// `port,description,score` lines; '#' comments. The description may itself
// contain commas.
PortScoreList parse_score_list(const std::string& content);
PortScoreList load_score_list(const std::string& path);

// 0 is SAFE, (0, major_from) MINOR, [major_from, critical_above] MAJOR,
// anything higher CRITICAL.
struct RiskThresholds {
  double major_from = 15.0;
  double critical_above = 30.0;
};

Grade risk_level_for(double total, const RiskThresholds& t = {});

struct RiskAssessment {
  std::vector<int> open_ports;      // sorted
  std::vector<PortScore> scored;    // score-list order
  std::vector<int> unscored;        // open ports with no score entry
  double total_score = 0.0;
  Grade risk_level = Grade::SAFE;
};

RiskAssessment score_ports(std::vector<int> open_ports, const PortScoreList& list,
                           const RiskThresholds& t = {});

// Connect scan over [first, last]. Throws Error(not_found) when the target
// is unreachable.
std::vector<int> port_scan(simnet::Transport& transport, const std::string& target, int first = 1,
                           int last = 65535);

// "Overall Results" and "Metric Score" sections.
std::string format_risk_report(const std::string& target, const RiskAssessment& a);

}  // namespace iotbed::sectests
