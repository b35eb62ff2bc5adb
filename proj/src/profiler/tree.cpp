#include "iotbed/profiler/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iotbed/common/error.hpp"
#include "iotbed/common/text.hpp"

namespace iotbed::profiler {

double entropy(const std::vector<int>& counts) {
  double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (n <= 0) return 0.0;
  double h = 0.0;
  for (int c : counts) {
    if (c <= 0) continue;
    double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

struct Builder {
  const std::vector<std::vector<double>>& x;
  const std::vector<std::size_t>& y;
  std::size_t n_classes;
  std::size_t n_features;
  TrainParams params;
  std::vector<TreeNode> nodes;

  std::vector<int> count(const std::vector<std::size_t>& idx) const {
    std::vector<int> c(n_classes, 0);
    for (auto i : idx) ++c[y[i]];
    return c;
  }

  int make_leaf(const std::vector<int>& counts) {
    TreeNode n;
    n.counts = counts;
    double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    n.distribution.resize(n_classes, 0.0);
    for (std::size_t k = 0; k < n_classes; ++k) n.distribution[k] = total > 0 ? counts[k] / total : 0.0;
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size() - 1);
  }

  int build(std::vector<std::size_t> idx, int depth) {
    auto counts = count(idx);
    const int n = static_cast<int>(idx.size());
    int nonzero = static_cast<int>(std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }));
    if (nonzero <= 1 || depth >= params.max_depth || n < 2 * params.min_leaf) return make_leaf(counts);

    const double parent_h = entropy(counts);
    double best_gain = 0.0;
    std::size_t best_f = 0;
    double best_t = 0.0;
    bool found = false;
    std::vector<std::size_t> order = idx;
    for (std::size_t f = 0; f < n_features; ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
      std::vector<int> left(n_classes, 0);
      std::vector<int> right = counts;
      for (int i = 0; i + 1 < n; ++i) {
        std::size_t cur = order[static_cast<std::size_t>(i)];
        ++left[y[cur]];
        --right[y[cur]];
        double v = x[cur][f];
        double next = x[order[static_cast<std::size_t>(i) + 1]][f];
        if (!(next > v)) continue;
        int nl = i + 1, nr = n - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        double h = (nl * entropy(left) + nr * entropy(right)) / n;
        double gain = parent_h - h;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_f = f;
          best_t = v + (next - v) / 2.0;
          found = true;
        }
      }
    }
    if (!found) return make_leaf(counts);

    std::vector<std::size_t> li, ri;
    for (auto i : idx) (x[i][best_f] >= best_t ? ri : li).push_back(i);
    int self = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes[static_cast<std::size_t>(self)].leaf = false;
    nodes[static_cast<std::size_t>(self)].feature = best_f;
    nodes[static_cast<std::size_t>(self)].threshold = best_t;
    nodes[static_cast<std::size_t>(self)].gain = best_gain;
    nodes[static_cast<std::size_t>(self)].counts = counts;
    int l = build(std::move(li), depth + 1);
    int r = build(std::move(ri), depth + 1);
    nodes[static_cast<std::size_t>(self)].left = l;
    nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

}  // namespace

std::size_t StatModel::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    if (i < 0 || static_cast<std::size_t>(i) >= nodes.size()) continue;
    const auto& n = nodes[static_cast<std::size_t>(i)];
    best = std::max(best, d);
    if (!n.leaf) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

std::size_t StatModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

StatModel train_vectors(const std::vector<std::vector<double>>& x, const std::vector<std::string>& labels,
                        const TrainParams& params) {
  if (x.empty()) fail(ErrorCode::validation, "no training instances");
  if (x.size() != labels.size()) fail(ErrorCode::invalid_argument, "instance/label count mismatch");
  if (params.max_depth < 0 || params.min_leaf < 1) fail(ErrorCode::invalid_argument, "bad tree parameters");
  const std::size_t nf = x.front().size();
  for (const auto& row : x) {
    if (row.size() != nf) fail(ErrorCode::validation, "instances have differing feature counts");
  }
  StatModel m;
  m.params = params;
  m.n_features = nf;
  m.classes = labels;
  std::sort(m.classes.begin(), m.classes.end());
  m.classes.erase(std::unique(m.classes.begin(), m.classes.end()), m.classes.end());
  std::vector<std::size_t> y;
  y.reserve(labels.size());
  for (const auto& l : labels) {
    y.push_back(static_cast<std::size_t>(std::lower_bound(m.classes.begin(), m.classes.end(), l) - m.classes.begin()));
  }
  m.class_counts.assign(m.classes.size(), 0);
  for (auto c : y) ++m.class_counts[c];
  if (m.classes.size() == 1) {
    m.warning = "single-class training set; model always predicts '" + m.classes.front() + "'";
  } else {
    for (std::size_t k = 0; k < m.classes.size(); ++k) {
      if (m.class_counts[k] < params.min_leaf) {
        fail(ErrorCode::validation, "class '" + m.classes[k] + "' has " + std::to_string(m.class_counts[k]) +
                                        " instances, fewer than min_leaf " + std::to_string(params.min_leaf));
      }
    }
  }
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  Builder b{x, y, m.classes.size(), nf, params, {}};
  b.build(std::move(idx), 0);
  m.nodes = std::move(b.nodes);
  return m;
}

StatModel train_model(const std::vector<SequenceInstance>& instances, const TrainParams& params) {
  std::vector<std::vector<double>> x;
  std::vector<std::string> labels;
  for (const auto& inst : instances) {
    if (!inst.label || inst.label->empty()) fail(ErrorCode::validation, "unlabeled training instance");
    x.push_back(inst.summary);
    labels.push_back(*inst.label);
  }
  return train_vectors(x, labels, params);
}

const std::vector<double>& classify_vector(const StatModel& m, const std::vector<double>& x) {
  if (x.size() != m.n_features) {
    fail(ErrorCode::invalid_argument, "feature dimension " + std::to_string(x.size()) + " does not match model (" +
                                          std::to_string(m.n_features) + ")");
  }
  if (m.nodes.empty()) fail(ErrorCode::invalid_argument, "empty model");
  std::size_t i = 0;
  while (!m.nodes[i].leaf) {
    const auto& n = m.nodes[i];
    i = static_cast<std::size_t>(x[n.feature] >= n.threshold ? n.right : n.left);
  }
  return m.nodes[i].distribution;
}

std::map<std::string, double> classify_sequence(const StatModel& m, const SequenceInstance& inst) {
  const auto& d = classify_vector(m, inst.summary);
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < m.classes.size(); ++k) out[m.classes[k]] = d[k];
  return out;
}

std::size_t predict_index(const StatModel& m, const std::vector<double>& x) {
  const auto& d = classify_vector(m, x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (d[k] > d[best]) best = k;
  }
  return best;
}

std::string serialize_model(const StatModel& m) {
  std::string out = "iotbed-model 1\n";
  out += "criterion " + m.criterion + "\n";
  out += "params max_depth=" + std::to_string(m.params.max_depth) + " min_leaf=" + std::to_string(m.params.min_leaf) + "\n";
  out += "features " + std::to_string(m.n_features) + "\n";
  out += "classes " + std::to_string(m.classes.size()) + "\n";
  for (std::size_t k = 0; k < m.classes.size(); ++k) {
    out += "class " + std::to_string(m.class_counts[k]) + " " + m.classes[k] + "\n";
  }
  out += "nodes " + std::to_string(m.nodes.size()) + "\n";
  for (const auto& n : m.nodes) {
    std::vector<std::string> counts;
    for (int c : n.counts) counts.push_back(std::to_string(c));
    if (n.leaf) {
      std::vector<std::string> dist;
      for (double p : n.distribution) dist.push_back(text::format_double(p));
      out += "leaf " + text::join(counts, ",") + " " + text::join(dist, ",") + "\n";
    } else {
      out += "split " + std::to_string(n.feature) + " " + text::format_double(n.threshold) + " " +
             std::to_string(n.left) + " " + std::to_string(n.right) + " " + text::format_double(n.gain) + " " +
             text::join(counts, ",") + "\n";
    }
  }
  return out;
}

namespace {

std::vector<std::string> words_of(const std::string& line) {
  std::vector<std::string> out;
  for (auto& w : text::split(line, ' ')) {
    if (!w.empty()) out.push_back(w);
  }
  return out;
}

std::int64_t need_int(const std::string& s, int line) {
  auto v = text::to_int(s);
  if (!v) throw ParseError(line, 1, "expected integer, got '" + s + "'");
  return *v;
}

double need_double(const std::string& s, int line) {
  auto v = text::to_double(s);
  if (!v) throw ParseError(line, 1, "expected number, got '" + s + "'");
  return *v;
}

}  // namespace

StatModel parse_model(const std::string& content) {
  auto lines = text::split(content, '\n');
  std::size_t pos = 0;
  int line_no = 0;
  auto next = [&]() -> std::string {
    while (pos < lines.size()) {
      ++line_no;
      std::string l = text::trim(lines[pos++]);
      if (!l.empty()) return l;
    }
    throw ParseError(line_no, 1, "unexpected end of model file");
  };
  if (next() != "iotbed-model 1") throw ParseError(line_no, 1, "not an iotbed model (version 1)");
  StatModel m;
  auto w = words_of(next());
  if (w.size() != 2 || w[0] != "criterion") throw ParseError(line_no, 1, "expected criterion");
  m.criterion = w[1];
  w = words_of(next());
  if (w.size() != 3 || w[0] != "params") throw ParseError(line_no, 1, "expected params");
  auto kv = [&](const std::string& item, const std::string& key) {
    if (!text::starts_with(item, key + "=")) throw ParseError(line_no, 1, "expected " + key);
    return static_cast<int>(need_int(item.substr(key.size() + 1), line_no));
  };
  m.params.max_depth = kv(w[1], "max_depth");
  m.params.min_leaf = kv(w[2], "min_leaf");
  w = words_of(next());
  if (w.size() != 2 || w[0] != "features") throw ParseError(line_no, 1, "expected features");
  m.n_features = static_cast<std::size_t>(need_int(w[1], line_no));
  w = words_of(next());
  if (w.size() != 2 || w[0] != "classes") throw ParseError(line_no, 1, "expected classes");
  auto nc = need_int(w[1], line_no);
  for (std::int64_t k = 0; k < nc; ++k) {
    std::string l = next();
    auto parts = words_of(l);
    if (parts.size() < 3 || parts[0] != "class") throw ParseError(line_no, 1, "expected class");
    m.class_counts.push_back(static_cast<int>(need_int(parts[1], line_no)));
    m.classes.push_back(l.substr(l.find(parts[1], 6) + parts[1].size() + 1));
  }
  w = words_of(next());
  if (w.size() != 2 || w[0] != "nodes") throw ParseError(line_no, 1, "expected nodes");
  auto nn = need_int(w[1], line_no);
  auto ints = [&](const std::string& s) {
    std::vector<int> v;
    for (auto& p : text::split(s, ',')) v.push_back(static_cast<int>(need_int(p, line_no)));
    return v;
  };
  for (std::int64_t i = 0; i < nn; ++i) {
    auto parts = words_of(next());
    TreeNode n;
    if (parts.size() == 3 && parts[0] == "leaf") {
      n.counts = ints(parts[1]);
      for (auto& p : text::split(parts[2], ',')) n.distribution.push_back(need_double(p, line_no));
      if (n.distribution.size() != m.classes.size()) throw ParseError(line_no, 1, "leaf distribution size mismatch");
    } else if (parts.size() == 7 && parts[0] == "split") {
      n.leaf = false;
      n.feature = static_cast<std::size_t>(need_int(parts[1], line_no));
      n.threshold = need_double(parts[2], line_no);
      n.left = static_cast<int>(need_int(parts[3], line_no));
      n.right = static_cast<int>(need_int(parts[4], line_no));
      n.gain = need_double(parts[5], line_no);
      n.counts = ints(parts[6]);
      if (n.feature >= m.n_features) throw ParseError(line_no, 1, "split feature out of range");
      if (n.left <= i || n.right <= i || n.left >= nn || n.right >= nn) throw ParseError(line_no, 1, "bad child index");
    } else {
      throw ParseError(line_no, 1, "expected leaf or split");
    }
    m.nodes.push_back(std::move(n));
  }
  if (m.nodes.empty()) throw ParseError(line_no, 1, "model has no nodes");
  return m;
}

void save_model(const std::string& path, const StatModel& m) { text::write_file(path, serialize_model(m)); }

StatModel load_model(const std::string& path) { return parse_model(text::read_file(path)); }

}  // namespace iotbed::profiler
