#include "iotbed/profiler/profile.hpp"

#include <algorithm>
#include <cstdio>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::profiler {

ProfileDistribution profile_sequences(const StatModel& m, const std::vector<SequenceInstance>& seqs,
                                      const std::string& device_id) {
  if (seqs.empty()) fail(ErrorCode::runtime, "INDETERMINATE: no sequences to profile for " + device_id);
  ProfileDistribution p;
  p.device_id = device_id;
  p.classes = m.classes;
  p.n_sequences = seqs.size();
  p.raw_sums.assign(m.classes.size(), 0.0);
  for (const auto& s : seqs) {
    const auto& d = classify_vector(m, s.summary);
    double w = *std::max_element(d.begin(), d.end());
    for (std::size_t k = 0; k < d.size(); ++k) p.raw_sums[k] += w * d[k];
  }
  // Mean of the weighted distributions; sums to the mean confidence, not 1.
  for (auto& v : p.raw_sums) v /= static_cast<double>(seqs.size());
  double sum = 0.0;
  for (double v : p.raw_sums) sum += v;
  p.per_class.resize(p.raw_sums.size());
  for (std::size_t k = 0; k < p.raw_sums.size(); ++k) p.per_class[k] = p.raw_sums[k] / sum;
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.per_class.size(); ++k) {
    if (p.per_class[k] > p.per_class[best]) best = k;
  }
  p.top_class = p.classes[best];
  p.top_confidence = p.per_class[best];
  return p;
}

ProfileDistribution profile_device(const StatModel& m, const std::vector<simnet::CaptureRecord>& capture,
                                   const std::string& device_id, const ExtractOptions& options) {
  return profile_sequences(m, extract_features(capture, options), device_id);
}

int ConfusionMatrix::total() const {
  int t = 0;
  for (const auto& row : counts) {
    for (int c : row) t += c;
  }
  return t;
}

double ConfusionMatrix::accuracy() const {
  int t = total();
  if (t == 0) return 0.0;
  int diag = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) diag += counts[i][i];
  return static_cast<double>(diag) / t;
}

ConfusionMatrix confusion_matrix(const StatModel& m, const std::vector<SequenceInstance>& held_out) {
  if (held_out.empty()) fail(ErrorCode::validation, "held-out set is empty");
  ConfusionMatrix cm;
  cm.classes = m.classes;
  cm.counts.assign(m.classes.size(), std::vector<int>(m.classes.size(), 0));
  for (const auto& inst : held_out) {
    if (!inst.label) fail(ErrorCode::validation, "held-out instance without label");
    auto it = std::find(m.classes.begin(), m.classes.end(), *inst.label);
    if (it == m.classes.end()) fail(ErrorCode::validation, "unknown label '" + *inst.label + "'");
    auto t = static_cast<std::size_t>(it - m.classes.begin());
    ++cm.counts[t][predict_index(m, inst.summary)];
  }
  return cm;
}

namespace {

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
  return buf;
}

}  // namespace

std::string render_profile_table(const std::vector<ProfileDistribution>& profiles) {
  if (profiles.empty()) return "(no profiles)\n";
  const auto& classes = profiles.front().classes;
  std::size_t w0 = 12;
  for (const auto& c : classes) w0 = std::max(w0, c.size() + 2);
  std::size_t wc = 12;
  for (const auto& p : profiles) wc = std::max(wc, p.device_id.size() + 2);
  std::string out = pad("Model class", w0);
  for (const auto& p : profiles) out += pad(p.device_id, wc);
  out += "\n";
  for (std::size_t k = 0; k < classes.size(); ++k) {
    out += pad(classes[k], w0);
    for (const auto& p : profiles) out += pad(k < p.per_class.size() ? percent(p.per_class[k]) : "-", wc);
    out += "\n";
  }
  out += pad("Top class", w0);
  for (const auto& p : profiles) out += pad(p.top_class, wc);
  out += "\n" + pad("Sequences", w0);
  for (const auto& p : profiles) out += pad(std::to_string(p.n_sequences), wc);
  out += "\n";
  return out;
}

std::string render_confusion_matrix(const ConfusionMatrix& cm) {
  std::size_t w = 10;
  for (const auto& c : cm.classes) w = std::max(w, c.size() + 2);
  std::string out = pad("true\\pred", w);
  for (const auto& c : cm.classes) out += pad(c, w);
  out += "\n";
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    out += pad(cm.classes[i], w);
    for (int c : cm.counts[i]) out += pad(std::to_string(c), w);
    out += "\n";
  }
  out += "accuracy " + text::format_fixed(cm.accuracy(), 4) + "\n";
  return out;
}

std::string profile_record(const ProfileDistribution& p) {
  text::Record rec{{"device", p.device_id},
                   {"top_class", p.top_class},
                   {"top_confidence", text::format_fixed(p.top_confidence, 6)},
                   {"n_sequences", std::to_string(p.n_sequences)}};
  for (std::size_t k = 0; k < p.classes.size(); ++k) {
    rec.push_back({"p." + p.classes[k], text::format_fixed(p.per_class[k], 6)});
    rec.push_back({"raw." + p.classes[k], text::format_fixed(p.raw_sums[k], 6)});
  }
  return text::encode_record(rec);
}

}  // namespace iotbed::profiler
