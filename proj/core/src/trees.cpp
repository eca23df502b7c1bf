#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>

#include <boost/math/distributions/normal.hpp>

#include "permguard/error.hpp"
#include "permguard/learners.hpp"

namespace permguard::models {
namespace {

constexpr double kMinGain = 1e-12;

double entropy_of(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

class TreeGrower {
 public:
  TreeGrower(const TrainingView& data, const TreeGrowOptions& options, Rng* rng)
      : data_(data), options_(options), rng_(rng) {}

  Tree grow(std::span<const std::size_t> rows) {
    std::vector<std::size_t> root(rows.begin(), rows.end());
    build(std::move(root));
    return std::move(tree_);
  }

 private:
  int build(std::vector<std::size_t> rows) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::vector<double> counts(data_.classes, 0.0);
    for (auto r : rows) counts[static_cast<std::size_t>(data_.y[r])] += 1.0;
    tree_.nodes[id].counts = counts;

    const auto nonzero = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; });
    if (nonzero <= 1 || rows.size() < options_.min_split) return id;

    const int feature = choose_split(rows, counts);
    if (feature < 0) return id;

    std::vector<std::size_t> zero_rows, one_rows;
    for (auto r : rows) (data_.row(r)[feature] ? one_rows : zero_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[id].feature = feature;
    const int zero = build(std::move(zero_rows));
    const int one = build(std::move(one_rows));
    tree_.nodes[id].zero = zero;
    tree_.nodes[id].one = one;
    return id;
  }

  struct Candidate {
    int feature;
    double gain;
    double ratio;
  };

  std::optional<Candidate> evaluate(std::span<const std::size_t> rows, std::span<const double> parent,
                                    double parent_entropy, std::size_t feature) {
    std::fill(ones_.begin(), ones_.end(), 0.0);
    double n1 = 0.0;
    for (auto r : rows) {
      if (data_.row(r)[feature]) {
        ones_[static_cast<std::size_t>(data_.y[r])] += 1.0;
        n1 += 1.0;
      }
    }
    const double n = static_cast<double>(rows.size());
    if (n1 == 0.0 || n1 == n) return std::nullopt;
    for (std::size_t c = 0; c < parent.size(); ++c) zeros_[c] = parent[c] - ones_[c];
    const double gain = parent_entropy - (n1 / n) * entropy_of(ones_) - ((n - n1) / n) * entropy_of(zeros_);
    if (gain <= kMinGain) return std::nullopt;
    const double split_info = entropy_of(std::array<double, 2>{n1, n - n1});
    return Candidate{static_cast<int>(feature), gain, gain / split_info};
  }

  int choose_split(std::span<const std::size_t> rows, std::span<const double> counts) {
    ones_.assign(data_.classes, 0.0);
    zeros_.assign(data_.classes, 0.0);
    const double parent_entropy = entropy_of(counts);
    std::vector<Candidate> candidates;

    if (options_.features_per_node == 0) {
      for (std::size_t f = 0; f < data_.cols; ++f) {
        if (auto c = evaluate(rows, counts, parent_entropy, f)) candidates.push_back(*c);
      }
    } else {
      std::vector<std::size_t> order(data_.cols);
      std::iota(order.begin(), order.end(), 0);
      // Partial Fisher-Yates: draw features one at a time without replacement.
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t pick = k + rng_->index(order.size() - k);
        std::swap(order[k], order[pick]);
        if (auto c = evaluate(rows, counts, parent_entropy, order[k])) candidates.push_back(*c);
        if (k + 1 >= options_.features_per_node && !candidates.empty()) break;
      }
    }
    if (candidates.empty()) return -1;

    double threshold = -1.0;
    if (options_.average_gain_filter) {
      double sum = 0.0;
      for (const auto& c : candidates) sum += c.gain;
      threshold = sum / static_cast<double>(candidates.size()) - kMinGain;
    }
    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
      if (c.gain < threshold) continue;
      if (!best || c.ratio > best->ratio || (c.ratio == best->ratio && c.feature < best->feature)) best = &c;
    }
    return best->feature;
  }

  const TrainingView& data_;
  const TreeGrowOptions& options_;
  Rng* rng_;
  Tree tree_;
  std::vector<double> ones_, zeros_;
};

double node_errors(const TreeNode& node) {
  double total = 0.0, best = 0.0;
  for (double c : node.counts) {
    total += c;
    best = std::max(best, c);
  }
  return total - best;
}

double node_total(const TreeNode& node) { return std::accumulate(node.counts.begin(), node.counts.end(), 0.0); }

double prune_node(Tree& tree, int id, double confidence) {
  TreeNode& node = tree.nodes[id];
  const double n = node_total(node);
  const double e = node_errors(node);
  const double as_leaf = e + pessimistic_added_errors(n, e, confidence);
  if (node.is_leaf()) return as_leaf;
  const double subtree = prune_node(tree, node.zero, confidence) + prune_node(tree, node.one, confidence);
  if (as_leaf <= subtree + 0.1) {
    TreeNode& again = tree.nodes[id];
    again.feature = again.zero = again.one = -1;
    return as_leaf;
  }
  return subtree;
}

int compact(const Tree& from, int id, Tree& to) {
  const int out = static_cast<int>(to.nodes.size());
  to.nodes.push_back(from.nodes[id]);
  if (!from.nodes[id].is_leaf()) {
    const int zero = compact(from, from.nodes[id].zero, to);
    const int one = compact(from, from.nodes[id].one, to);
    to.nodes[out].zero = zero;
    to.nodes[out].one = one;
  }
  return out;
}

}  // namespace

const TreeNode& Tree::leaf_for(std::span<const std::uint8_t> row) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) node = &nodes[row[node->feature] ? node->one : node->zero];
  return *node;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  // children are always appended after their parent
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[nodes[i].zero] = level[i] + 1;
      level[nodes[i].one] = level[i] + 1;
    }
  }
  return deepest;
}

Tree grow_tree(const TrainingView& data, std::span<const std::size_t> rows, const TreeGrowOptions& options,
               Rng* rng) {
  if (options.features_per_node > 0 && rng == nullptr) {
    throw Error(Errc::InvalidArgument, "random feature sampling needs a generator");
  }
  return TreeGrower(data, options, rng).grow(rows);
}

double pessimistic_added_errors(double n, double e, double confidence) {
  if (confidence > 0.5 || n <= 0.0) return 0.0;
  if (e < 1.0) {
    const double base = n * (1.0 - std::pow(confidence, 1.0 / n));
    if (e == 0.0) return base;
    return base + e * (pessimistic_added_errors(n, 1.0, confidence) - base);
  }
  if (e + 0.5 >= n) return std::max(n - e, 0.0);
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - confidence);
  const double f = (e + 0.5) / n;
  const double r = (f + z * z / (2.0 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) /
                   (1.0 + z * z / n);
  return r * n - e;
}

void prune_tree(Tree& tree, double confidence) {
  if (tree.nodes.empty()) return;
  prune_node(tree, 0, confidence);
  Tree compacted;
  compact(tree, 0, compacted);
  tree = std::move(compacted);
}

// --- logistic leaves ----------------------------------------------------------

std::vector<double> LogisticModel::probabilities(std::span<const std::uint8_t> row) const {
  std::vector<double> z(classes);
  const std::size_t stride = dims + 1;
  for (std::size_t c = 0; c < classes; ++c) {
    const double* w = weights.data() + c * stride;
    double s = w[dims];
    for (std::size_t j = 0; j < dims; ++j) {
      if (row[j]) s += w[j];
    }
    z[c] = s;
  }
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (auto& v : z) total += (v = std::exp(v - m));
  for (auto& v : z) v /= total;
  return z;
}

LogisticModel fit_logistic(const TrainingView& data, std::span<const std::size_t> rows, std::size_t iterations,
                           double step, double* final_loss) {
  LogisticModel model;
  model.classes = data.classes;
  model.dims = data.cols;
  const std::size_t stride = data.cols + 1;
  model.weights.assign(model.classes * stride, 0.0);

  // active indices once, rows are binary
  std::vector<std::vector<std::uint32_t>> active(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = data.row(rows[k]);
    for (std::size_t j = 0; j < data.cols; ++j) {
      if (r[j]) active[k].push_back(static_cast<std::uint32_t>(j));
    }
  }
  const double inv_n = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
  std::vector<double> grad(model.weights.size());
  std::vector<double> z(model.classes);

  auto forward = [&](std::size_t k) {
    for (std::size_t c = 0; c < model.classes; ++c) {
      const double* w = model.weights.data() + c * stride;
      double s = w[data.cols];
      for (auto j : active[k]) s += w[j];
      z[c] = s;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) total += (v = std::exp(v - m));
    for (auto& v : z) v /= total;
  };

  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      forward(k);
      const auto target = static_cast<std::size_t>(data.y[rows[k]]);
      for (std::size_t c = 0; c < model.classes; ++c) {
        const double delta = z[c] - (c == target ? 1.0 : 0.0);
        double* g = grad.data() + c * stride;
        for (auto j : active[k]) g[j] += delta;
        g[data.cols] += delta;
      }
    }
    for (std::size_t i = 0; i < grad.size(); ++i) model.weights[i] -= step * grad[i] * inv_n;
  }
  if (final_loss) {
    double loss = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      forward(k);
      loss -= std::log(std::max(z[static_cast<std::size_t>(data.y[rows[k]])], 1e-300));
    }
    *final_loss = loss * inv_n;
  }
  return model;
}

}  // namespace permguard::models
