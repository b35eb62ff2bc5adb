#pragma once

#include <string>
#include <vector>

#include "iotbed/profiler/tree.hpp"

namespace iotbed::profiler {

struct ProfileDistribution {
  std::string device_id;
  std::vector<std::string> classes;
  std::vector<double> per_class;  // renormalized, class order
  std::vector<double> raw_sums;   // confidence-weighted sums before normalization
  std::string top_class;
  double top_confidence = 0.0;
  std::size_t n_sequences = 0;
};

ProfileDistribution profile_sequences(const StatModel& m, const std::vector<SequenceInstance>& seqs,
                                      const std::string& device_id);
// Throws Error(runtime) "INDETERMINATE: ..." when the capture yields no
// sequences.
ProfileDistribution profile_device(const StatModel& m, const std::vector<simnet::CaptureRecord>& capture,
                                   const std::string& device_id, const ExtractOptions& options = {});

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<int>> counts;  // [true][predicted]

  int total() const;
  double accuracy() const;
};

// Throws Error(validation) for an empty set or a label outside the model.
ConfusionMatrix confusion_matrix(const StatModel& m, const std::vector<SequenceInstance>& held_out);

// Rows are model classes, columns tested devices, cells percentages with two
// decimals.
std::string render_profile_table(const std::vector<ProfileDistribution>& profiles);
std::string render_confusion_matrix(const ConfusionMatrix& cm);
// One `key=value` record line per profile.
std::string profile_record(const ProfileDistribution& p);

}  // namespace iotbed::profiler
