#pragma once

// Learned state and training kernels behind models::fit. Exposed so tests and
// feature selection can reach the individual solvers directly.

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "permguard/models.hpp"
#include "permguard/rng.hpp"

namespace permguard::models {

// --- trees ------------------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  int zero = -1;     // child for feature value 0
  int one = -1;      // child for feature value 1
  std::vector<double> counts;  // class counts of the training rows reaching this node
  int leaf_model = -1;         // LMT: index of the leaf's logistic model

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const std::uint8_t> row) const;
  std::size_t leaf_count() const;
  std::size_t depth() const;
  bool operator==(const Tree&) const = default;
};

struct TreeGrowOptions {
  /// 0 = examine every feature; otherwise sample this many per node and keep
  /// drawing beyond it only until some feature yields positive gain.
  std::size_t features_per_node = 0;
  /// Nodes with fewer rows become leaves.
  std::size_t min_split = 2;
  /// Restrict the gain-ratio choice to features with at least average gain.
  bool average_gain_filter = true;
};

/// Grows a binary-split tree on `rows` (duplicates allowed, as in bootstrap
/// samples) using the gain-ratio criterion.
Tree grow_tree(const TrainingView& data, std::span<const std::size_t> rows, const TreeGrowOptions& options,
               Rng* rng);

/// Upper confidence bound on extra errors at a leaf with n rows and e errors,
/// the pessimistic estimate used by C4.5 pruning.
double pessimistic_added_errors(double n, double e, double confidence);

/// Bottom-up subtree replacement.
void prune_tree(Tree& tree, double confidence);

struct ForestParams {
  std::vector<Tree> trees;
  bool operator==(const ForestParams&) const = default;
};

/// Multinomial logistic regression; weights are classes x (dims + 1), bias last.
struct LogisticModel {
  std::size_t classes = 0;
  std::size_t dims = 0;
  std::vector<double> weights;

  std::vector<double> probabilities(std::span<const std::uint8_t> row) const;
  bool operator==(const LogisticModel&) const = default;
};

/// Full-batch gradient descent on mean cross-entropy from zero weights.
LogisticModel fit_logistic(const TrainingView& data, std::span<const std::size_t> rows, std::size_t iterations,
                           double step, double* final_loss = nullptr);

struct LmtParams {
  Tree tree;
  std::vector<LogisticModel> leaves;
  bool operator==(const LmtParams&) const = default;
};

// --- naive Bayes --------------------------------------------------------------

struct NaiveBayesParams {
  std::vector<double> log_prior;  // per class
  std::vector<double> log_prob;   // classes x dims
  bool operator==(const NaiveBayesParams&) const = default;
};

NaiveBayesParams fit_naive_bayes(const TrainingView& data);
/// Normalized log-posterior per class.
std::vector<double> naive_bayes_scores(const NaiveBayesParams& p, std::span<const std::uint8_t> row);

// --- linear SVM ---------------------------------------------------------------

/// Active feature indices per row (binary data).
struct SparseRows {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> indices;

  std::size_t rows() const { return offsets.size() - 1; }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {indices.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  void push_row(std::span<const std::uint32_t> active);
};

struct BinarySvm {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t epochs = 0;
  bool converged = false;
  double primal_objective = 0.0;

  double decision(std::span<const std::uint8_t> row) const;
  bool operator==(const BinarySvm&) const = default;
};

struct SvmOptions {
  double cost = 1.0;
  double tolerance = 0.001;
  std::size_t max_epochs = 1000;  // iteration budget is max_epochs * rows
};

/// L1-loss soft-margin SVM over binary features. The dual is solved by
/// two-coordinate descent (SMO with second-order pair selection) until the
/// maximal violating pair differs by less than `tolerance`; the bias is not
/// regularized. Labels are +1/-1. Rows are processed in a canonical order, so
/// the result does not depend on the order they are passed in.
///
/// `dual`, when given, carries the multipliers in input row order. A feasible
/// vector (entries in [0, cost], sum of alpha*y zero) seeds the solver; anything
/// else starts from zero. The final multipliers are written back.
BinarySvm train_binary_svm(const SparseRows& x, std::span<const int> y, std::size_t dims, const SvmOptions& options,
                           std::vector<double>* dual = nullptr);

struct LinearSvmParams {
  /// One problem for binary tasks (positive = class 1); one per class otherwise.
  std::vector<BinarySvm> problems;
  bool operator==(const LinearSvmParams&) const = default;
};

// --- boosting -----------------------------------------------------------------

struct Stump {
  std::size_t feature = 0;
  int class_if_zero = 0;
  int class_if_one = 0;
  double alpha = 0.0;
  double weighted_error = 0.0;
  bool operator==(const Stump&) const = default;
};

struct BoostParams {
  std::vector<Stump> stumps;
  bool operator==(const BoostParams&) const = default;
};

BoostParams fit_adaboost(const TrainingView& data, std::size_t rounds);

// --- multilayer perceptron ----------------------------------------------------

/// Fully connected ReLU network. Two classes use one sigmoid output unit;
/// more classes use a softmax layer. All parameters live in one flat vector:
/// for each layer, the weight matrix (out x in, row-major) then the biases.
class MlpNetwork {
 public:
  MlpNetwork() = default;
  MlpNetwork(std::size_t inputs, std::vector<std::size_t> hidden, std::size_t classes, Rng& rng);

  /// Rebuilds a network from serialized parts; throws SchemaViolation when
  /// the parameter count does not fit the widths.
  static MlpNetwork restore(std::vector<std::size_t> widths, std::size_t classes, std::vector<double> params);

  std::size_t inputs() const { return widths_.front(); }
  std::size_t classes() const { return classes_; }
  const std::vector<std::size_t>& widths() const { return widths_; }

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  /// Class probabilities for one row.
  std::vector<double> probabilities(std::span<const std::uint8_t> row) const;

  /// Mean cross-entropy over the listed rows.
  double loss(const TrainingView& data, std::span<const std::size_t> rows) const;
  /// Gradient of loss() with respect to parameters(), same layout.
  std::vector<double> gradient(const TrainingView& data, std::span<const std::size_t> rows) const;

  /// Mini-batch training over shuffled batches; returns the final mean
  /// training loss. Adam uses beta1 0.9, beta2 0.999, epsilon 1e-8.
  double train(const TrainingView& data, std::size_t epochs, std::size_t batch_size, double learning_rate,
               MlpOptimizer optimizer, Rng& rng);

  bool operator==(const MlpNetwork&) const = default;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + widths_[layer] * widths_[layer + 1];
  }
  /// Activations per layer; the last entry holds output-layer logits.
  std::vector<std::vector<double>> forward(std::span<const std::uint8_t> row) const;
  void accumulate_gradient(std::span<const std::uint8_t> row, int target, std::vector<double>& grad,
                           double& loss) const;

  std::vector<std::size_t> widths_;   // inputs, hidden..., output units
  std::vector<std::size_t> offsets_;  // per layer start in params_
  std::size_t classes_ = 0;
  std::vector<double> params_;
};

namespace detail {

struct Parameters {
  std::variant<Tree, ForestParams, NaiveBayesParams, LinearSvmParams, LmtParams, BoostParams, MlpNetwork> value;
  double objective = 0.0;
};

}  // namespace detail

}  // namespace permguard::models
