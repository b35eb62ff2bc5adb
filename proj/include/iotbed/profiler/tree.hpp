#pragma once

#include <map>
#include <string>
#include <vector>

#include "iotbed/profiler/features.hpp"

namespace iotbed::profiler {

struct TrainParams {
  int max_depth = 12;
  int min_leaf = 5;
};

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;  // x[feature] >= threshold goes right
  int left = -1;
  int right = -1;
  double gain = 0.0;               // information gain of the split (internal nodes)
  std::vector<double> distribution;  // class order; leaves only
  std::vector<int> counts;           // training instances per class reaching this node
};

struct StatModel {
  std::vector<std::string> classes;
  std::size_t n_features = kSummaryLength;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<int> class_counts;
  TrainParams params;
  std::string criterion = "information_gain";
  std::string warning;

  std::size_t depth() const;
  std::size_t leaf_count() const;
};

// Entropy in bits of a class-count vector.
double entropy(const std::vector<int>& counts);

// Trains on raw vectors. Classes are sorted by name. Throws Error(validation)
// for empty input, ragged vectors, or a class smaller than min_leaf (only
// when there are at least two classes). A single class yields one leaf and
// sets `warning`.
StatModel train_vectors(const std::vector<std::vector<double>>& x, const std::vector<std::string>& labels,
                        const TrainParams& params = {});

// Every instance must carry a label (Error(validation) otherwise).
StatModel train_model(const std::vector<SequenceInstance>& instances, const TrainParams& params = {});

// Leaf distribution reached by `x`. Throws Error(invalid_argument) on a
// dimension mismatch.
const std::vector<double>& classify_vector(const StatModel& m, const std::vector<double>& x);
std::map<std::string, double> classify_sequence(const StatModel& m, const SequenceInstance& inst);
// argmax with ties broken by class order.
std::size_t predict_index(const StatModel& m, const std::vector<double>& x);

std::string serialize_model(const StatModel& m);
StatModel parse_model(const std::string& text);
void save_model(const std::string& path, const StatModel& m);
StatModel load_model(const std::string& path);

}  // namespace iotbed::profiler
