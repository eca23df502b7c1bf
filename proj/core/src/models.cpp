#include "permguard/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "permguard/error.hpp"
#include "permguard/learners.hpp"

namespace permguard::models {

using nlohmann::json;

namespace {

constexpr std::pair<Kind, std::string_view> kKindNames[] = {
    {Kind::DecisionTree, "DecisionTree"},
    {Kind::RandomTree, "RandomTree"},
    {Kind::RandomForest, "RandomForest"},
    {Kind::NaiveBayesMultinomial, "NaiveBayesMultinomial"},
    {Kind::LinearSvm, "LinearSvm"},
    {Kind::Lmt, "Lmt"},
    {Kind::AdaBoost, "AdaBoost"},
    {Kind::Mlp, "Mlp"},
};

bool accepts_single_class(Kind kind) {
  return kind == Kind::DecisionTree || kind == Kind::RandomTree || kind == Kind::RandomForest;
}

std::size_t sqrt_features(std::size_t d) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
}

std::vector<double> distribution(const TreeNode& leaf) {
  std::vector<double> p(leaf.counts);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : p) v /= total;
  }
  return p;
}

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

/// Tree grown for forest member `t`; tree 0 without bootstrap is exactly a
/// RandomTree under the same seed.
Tree grow_random_tree(const TrainingView& data, std::uint64_t seed, std::size_t t, bool bootstrap) {
  Rng rng(mix_seed(seed, t));
  std::vector<std::size_t> rows(data.rows);
  if (bootstrap) {
    for (auto& r : rows) r = rng.index(data.rows);
    std::sort(rows.begin(), rows.end());
  } else {
    std::iota(rows.begin(), rows.end(), 0);
  }
  TreeGrowOptions options;
  options.features_per_node = sqrt_features(data.cols);
  options.average_gain_filter = false;
  return grow_tree(data, rows, options, &rng);
}

SparseRows sparse_of(const TrainingView& data) {
  SparseRows x;
  std::vector<std::uint32_t> active;
  for (std::size_t i = 0; i < data.rows; ++i) {
    active.clear();
    const auto r = data.row(i);
    for (std::size_t j = 0; j < data.cols; ++j) {
      if (r[j]) active.push_back(static_cast<std::uint32_t>(j));
    }
    x.push_row(active);
  }
  return x;
}

}  // namespace

std::string_view to_string(Kind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

Kind kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(Errc::InvalidArgument, "unknown model kind '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw Error(Errc::InvalidArgument, std::string(what) + " must be positive");
  };
  switch (kind) {
    case Kind::RandomForest:
      positive(tree_count, "tree_count");
      break;
    case Kind::DecisionTree:
      if (!(pruning_confidence > 0.0 && pruning_confidence <= 0.5)) {
        throw Error(Errc::InvalidArgument, "pruning_confidence must be in (0, 0.5]");
      }
      break;
    case Kind::LinearSvm:
      if (!(tolerance > 0.0)) throw Error(Errc::InvalidArgument, "tolerance must be positive");
      if (!(cost > 0.0)) throw Error(Errc::InvalidArgument, "cost must be positive");
      positive(max_epochs, "max_epochs");
      break;
    case Kind::Lmt:
      positive(min_split_instances, "min_split_instances");
      positive(leaf_iterations, "leaf_iterations");
      if (!(leaf_step > 0.0)) throw Error(Errc::InvalidArgument, "leaf_step must be positive");
      break;
    case Kind::AdaBoost:
      positive(rounds, "rounds");
      break;
    case Kind::Mlp:
      for (auto w : hidden_layers) positive(w, "hidden layer width");
      positive(epochs, "epochs");
      positive(batch_size, "batch_size");
      if (!(learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be positive");
      break;
    case Kind::RandomTree:
    case Kind::NaiveBayesMultinomial:
      break;
  }
}

ModelConfig default_config(Kind kind, std::uint64_t seed) {
  ModelConfig c;
  c.kind = kind;
  c.seed = seed;
  return c;
}

json config_to_json(const ModelConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["seed"] = c.seed;
  switch (c.kind) {
    case Kind::RandomForest:
      j["tree_count"] = c.tree_count;
      j["bootstrap"] = c.bootstrap;
      break;
    case Kind::DecisionTree:
      j["pruning_confidence"] = c.pruning_confidence;
      j["prune"] = c.prune;
      break;
    case Kind::LinearSvm:
      j["tolerance"] = c.tolerance;
      j["cost"] = c.cost;
      j["max_epochs"] = c.max_epochs;
      break;
    case Kind::Lmt:
      j["min_split_instances"] = c.min_split_instances;
      j["leaf_iterations"] = c.leaf_iterations;
      j["leaf_step"] = c.leaf_step;
      break;
    case Kind::AdaBoost:
      j["rounds"] = c.rounds;
      break;
    case Kind::Mlp:
      j["hidden_layers"] = c.hidden_layers;
      j["epochs"] = c.epochs;
      j["learning_rate"] = c.learning_rate;
      j["batch_size"] = c.batch_size;
      j["optimizer"] = c.optimizer == MlpOptimizer::Adam ? "adam" : "sgd";
      break;
    case Kind::RandomTree:
    case Kind::NaiveBayesMultinomial:
      break;
  }
  return j;
}

ModelConfig config_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("kind")) throw Error(Errc::SchemaViolation, "model config needs a 'kind'");
    ModelConfig c = default_config(kind_from_string(j.at("kind").get<std::string>()));
    c.seed = j.value("seed", c.seed);
    c.tree_count = j.value("tree_count", c.tree_count);
    c.bootstrap = j.value("bootstrap", c.bootstrap);
    c.pruning_confidence = j.value("pruning_confidence", c.pruning_confidence);
    c.prune = j.value("prune", c.prune);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.cost = j.value("cost", c.cost);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.min_split_instances = j.value("min_split_instances", c.min_split_instances);
    c.leaf_iterations = j.value("leaf_iterations", c.leaf_iterations);
    c.leaf_step = j.value("leaf_step", c.leaf_step);
    c.rounds = j.value("rounds", c.rounds);
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("optimizer")) {
      const auto name = j.at("optimizer").get<std::string>();
      if (name == "adam") {
        c.optimizer = MlpOptimizer::Adam;
      } else if (name == "sgd") {
        c.optimizer = MlpOptimizer::Sgd;
      } else {
        throw Error(Errc::SchemaViolation, "model config: unknown optimizer '" + name + "'");
      }
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("model config: ") + e.what());
  }
}

// --- TrainedModel ---------------------------------------------------------------

TrainedModel::TrainedModel(ModelConfig config, std::vector<std::string> classes, std::size_t dimension,
                           std::shared_ptr<const detail::Parameters> parameters)
    : config_(std::move(config)),
      classes_(std::move(classes)),
      dimension_(dimension),
      params_(std::move(parameters)) {}

double TrainedModel::final_objective() const { return params_->objective; }

std::vector<double> TrainedModel::score(std::span<const std::uint8_t> row) const {
  if (row.size() != dimension_) {
    throw Error(Errc::DimensionMismatch, "row has " + std::to_string(row.size()) + " features, model expects " +
                                             std::to_string(dimension_));
  }
  const std::size_t classes = classes_.size();
  return std::visit(
      [&](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Tree>) {
          return distribution(p.leaf_for(row));
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          std::vector<double> votes(classes, 0.0);
          for (const auto& tree : p.trees) votes[argmax(distribution(tree.leaf_for(row)))] += 1.0;
          for (auto& v : votes) v /= static_cast<double>(p.trees.size());
          return votes;
        } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          return naive_bayes_scores(p, row);
        } else if constexpr (std::is_same_v<T, LinearSvmParams>) {
          if (classes == 2) {
            const double f = p.problems.front().decision(row);
            return {-f, f};
          }
          std::vector<double> s;
          for (const auto& problem : p.problems) s.push_back(problem.decision(row));
          return s;
        } else if constexpr (std::is_same_v<T, LmtParams>) {
          return p.leaves[static_cast<std::size_t>(p.tree.leaf_for(row).leaf_model)].probabilities(row);
        } else if constexpr (std::is_same_v<T, BoostParams>) {
          std::vector<double> votes(classes, 0.0);
          for (const auto& s : p.stumps) {
            votes[static_cast<std::size_t>(row[s.feature] ? s.class_if_one : s.class_if_zero)] += s.alpha;
          }
          return votes;
        } else {
          return p.probabilities(row);
        }
      },
      params_->value);
}

std::size_t TrainedModel::predict_index(std::span<const std::uint8_t> row) const { return argmax(score(row)); }

// --- fitting --------------------------------------------------------------------

TrainedModel fit(const ModelConfig& config, const TrainingView& data, std::vector<std::string> class_names) {
  config.validate();
  if (data.rows == 0) throw Error(Errc::EmptyCorpus, "cannot fit on zero rows");
  if (data.cols == 0) throw Error(Errc::DegenerateDimension, "cannot fit on zero features");
  if (class_names.size() != data.classes || data.classes == 0) {
    throw Error(Errc::InvalidArgument, "class list does not match the class count");
  }
  const std::set<int> present(data.y.begin(), data.y.end());
  if (present.size() < 2 && !accepts_single_class(config.kind)) {
    throw Error(Errc::SingleClassCorpus, std::string(to_string(config.kind)) + " needs at least two classes present");
  }

  auto params = std::make_shared<detail::Parameters>();
  params->objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> all(data.rows);
  std::iota(all.begin(), all.end(), 0);

  switch (config.kind) {
    case Kind::DecisionTree: {
      Tree tree = grow_tree(data, all, TreeGrowOptions{}, nullptr);
      if (config.prune) prune_tree(tree, config.pruning_confidence);
      params->value = std::move(tree);
      break;
    }
    case Kind::RandomTree:
      params->value = grow_random_tree(data, config.seed, 0, false);
      break;
    case Kind::RandomForest: {
      ForestParams forest;
      forest.trees.reserve(config.tree_count);
      for (std::size_t t = 0; t < config.tree_count; ++t) {
        forest.trees.push_back(grow_random_tree(data, config.seed, t, config.bootstrap));
      }
      params->value = std::move(forest);
      break;
    }
    case Kind::NaiveBayesMultinomial:
      params->value = fit_naive_bayes(data);
      break;
    case Kind::LinearSvm: {
      const SparseRows x = sparse_of(data);
      LinearSvmParams svm;
      const std::size_t problems = data.classes == 2 ? 1 : data.classes;
      double objective = 0.0;
      for (std::size_t p = 0; p < problems; ++p) {
        const int positive = data.classes == 2 ? 1 : static_cast<int>(p);
        std::vector<int> y(data.rows);
        for (std::size_t i = 0; i < data.rows; ++i) y[i] = data.y[i] == positive ? 1 : -1;
        SvmOptions options{config.cost, config.tolerance, config.max_epochs};
        svm.problems.push_back(train_binary_svm(x, y, data.cols, options));
        objective += svm.problems.back().primal_objective;
      }
      params->objective = objective;
      params->value = std::move(svm);
      break;
    }
    case Kind::Lmt: {
      TreeGrowOptions options;
      options.min_split = config.min_split_instances;
      LmtParams lmt;
      lmt.tree = grow_tree(data, all, options, nullptr);
      // route every training row to its leaf
      std::vector<std::vector<std::size_t>> leaf_rows(lmt.tree.nodes.size());
      for (std::size_t i = 0; i < data.rows; ++i) {
        const TreeNode* node = &lmt.tree.nodes.front();
        std::size_t id = 0;
        while (!node->is_leaf()) {
          id = static_cast<std::size_t>(data.row(i)[node->feature] ? node->one : node->zero);
          node = &lmt.tree.nodes[id];
        }
        leaf_rows[id].push_back(i);
      }
      double weighted_loss = 0.0;
      for (std::size_t id = 0; id < lmt.tree.nodes.size(); ++id) {
        auto& node = lmt.tree.nodes[id];
        if (!node.is_leaf()) continue;
        node.leaf_model = static_cast<int>(lmt.leaves.size());
        double loss = 0.0;
        lmt.leaves.push_back(fit_logistic(data, leaf_rows[id], config.leaf_iterations, config.leaf_step, &loss));
        weighted_loss += loss * static_cast<double>(leaf_rows[id].size());
      }
      params->objective = weighted_loss / static_cast<double>(data.rows);
      params->value = std::move(lmt);
      break;
    }
    case Kind::AdaBoost:
      params->value = fit_adaboost(data, config.rounds);
      break;
    case Kind::Mlp: {
      Rng rng(config.seed);
      MlpNetwork net(data.cols, config.hidden_layers, data.classes, rng);
      params->objective = net.train(data, config.epochs, config.batch_size, config.learning_rate, config.optimizer, rng);
      params->value = std::move(net);
      break;
    }
  }
  return TrainedModel(config, std::move(class_names), data.cols, std::move(params));
}

TrainedModel fit(const ModelConfig& config, const dataset::FeatureMatrix& matrix, dataset::Task task) {
  const std::vector<int> y = matrix.class_indices(task);
  auto classes = matrix.class_names(task);
  TrainingView view{matrix.cells(), matrix.rows(), matrix.cols(), y, classes.size()};
  return fit(config, view, std::move(classes));
}

// --- serialization --------------------------------------------------------------

namespace {

json tree_to_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"feature", n.feature}, {"zero", n.zero}, {"one", n.one}, {"counts", n.counts},
                     {"leaf_model", n.leaf_model}});
  }
  return nodes;
}

Tree tree_from_json(const json& j, std::size_t dims, std::size_t classes) {
  Tree t;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.zero = n.at("zero").get<int>();
    node.one = n.at("one").get<int>();
    node.counts = n.at("counts").get<std::vector<double>>();
    node.leaf_model = n.at("leaf_model").get<int>();
    t.nodes.push_back(std::move(node));
  }
  const int size = static_cast<int>(t.nodes.size());
  if (size == 0) throw Error(Errc::SchemaViolation, "tree without nodes");
  for (const auto& n : t.nodes) {
    if (n.counts.size() != classes) throw Error(Errc::SchemaViolation, "tree node class counts mismatch");
    if (n.is_leaf()) continue;
    if (n.feature >= static_cast<int>(dims) || n.zero <= 0 || n.one <= 0 || n.zero >= size || n.one >= size) {
      throw Error(Errc::SchemaViolation, "tree node references out of range");
    }
  }
  return t;
}

json svm_to_json(const BinarySvm& s) {
  return {{"weights", s.weights}, {"bias", s.bias}, {"epochs", s.epochs}, {"converged", s.converged},
          {"primal_objective", s.primal_objective}};
}

BinarySvm svm_from_json(const json& j, std::size_t dims) {
  BinarySvm s;
  s.weights = j.at("weights").get<std::vector<double>>();
  s.bias = j.at("bias").get<double>();
  s.epochs = j.at("epochs").get<std::size_t>();
  s.converged = j.at("converged").get<bool>();
  s.primal_objective = j.at("primal_objective").get<double>();
  if (s.weights.size() != dims) throw Error(Errc::SchemaViolation, "svm weight vector length mismatch");
  return s;
}

json logistic_to_json(const LogisticModel& m) { return {{"weights", m.weights}}; }

}  // namespace

json TrainedModel::to_json() const {
  json params = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Tree>) {
          return {{"nodes", tree_to_json(p)}};
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
          return {{"trees", trees}};
        } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          return {{"log_prior", p.log_prior}, {"log_prob", p.log_prob}};
        } else if constexpr (std::is_same_v<T, LinearSvmParams>) {
          json problems = json::array();
          for (const auto& s : p.problems) problems.push_back(svm_to_json(s));
          return {{"problems", problems}};
        } else if constexpr (std::is_same_v<T, LmtParams>) {
          json leaves = json::array();
          for (const auto& l : p.leaves) leaves.push_back(logistic_to_json(l));
          return {{"nodes", tree_to_json(p.tree)}, {"leaves", leaves}};
        } else if constexpr (std::is_same_v<T, BoostParams>) {
          json stumps = json::array();
          for (const auto& s : p.stumps) {
            stumps.push_back({{"feature", s.feature}, {"class_if_zero", s.class_if_zero},
                              {"class_if_one", s.class_if_one}, {"alpha", s.alpha},
                              {"weighted_error", s.weighted_error}});
          }
          return {{"stumps", stumps}};
        } else {
          return {{"widths", p.widths()}, {"parameters", p.parameters()}};
        }
      },
      params_->value);
  json j;
  j["kind"] = models::to_string(config_.kind);
  j["config"] = config_to_json(config_);
  j["classes"] = classes_;
  j["dimension"] = dimension_;
  j["objective"] = std::isnan(params_->objective) ? json(nullptr) : json(params_->objective);
  j["parameters"] = std::move(params);
  return j;
}

TrainedModel TrainedModel::from_json(const json& j) {
  try {
    for (const char* field : {"kind", "config", "classes", "dimension", "parameters"}) {
      if (!j.contains(field)) throw Error(Errc::SchemaViolation, std::string("model file lacks '") + field + "'");
    }
    ModelConfig config = config_from_json(j.at("config"));
    if (kind_from_string(j.at("kind").get<std::string>()) != config.kind) {
      throw Error(Errc::SchemaViolation, "model kind disagrees with its config");
    }
    auto classes = j.at("classes").get<std::vector<std::string>>();
    const auto dims = j.at("dimension").get<std::size_t>();
    const std::size_t k = classes.size();
    if (k == 0) throw Error(Errc::SchemaViolation, "model without classes");
    const json& p = j.at("parameters");
    auto params = std::make_shared<detail::Parameters>();
    params->objective = j.contains("objective") && !j["objective"].is_null() ? j["objective"].get<double>()
                                                                               : std::numeric_limits<double>::quiet_NaN();
    switch (config.kind) {
      case Kind::DecisionTree:
      case Kind::RandomTree:
        params->value = tree_from_json(p.at("nodes"), dims, k);
        break;
      case Kind::RandomForest: {
        ForestParams f;
        for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t, dims, k));
        if (f.trees.empty()) throw Error(Errc::SchemaViolation, "forest without trees");
        params->value = std::move(f);
        break;
      }
      case Kind::NaiveBayesMultinomial: {
        NaiveBayesParams nb;
        nb.log_prior = p.at("log_prior").get<std::vector<double>>();
        nb.log_prob = p.at("log_prob").get<std::vector<double>>();
        if (nb.log_prior.size() != k || nb.log_prob.size() != k * dims) {
          throw Error(Errc::SchemaViolation, "naive Bayes table size mismatch");
        }
        params->value = std::move(nb);
        break;
      }
      case Kind::LinearSvm: {
        LinearSvmParams svm;
        for (const auto& s : p.at("problems")) svm.problems.push_back(svm_from_json(s, dims));
        if (svm.problems.size() != (k == 2 ? 1 : k)) throw Error(Errc::SchemaViolation, "svm problem count mismatch");
        params->value = std::move(svm);
        break;
      }
      case Kind::Lmt: {
        LmtParams lmt;
        lmt.tree = tree_from_json(p.at("nodes"), dims, k);
        for (const auto& l : p.at("leaves")) {
          LogisticModel m;
          m.classes = k;
          m.dims = dims;
          m.weights = l.at("weights").get<std::vector<double>>();
          if (m.weights.size() != k * (dims + 1)) throw Error(Errc::SchemaViolation, "leaf model size mismatch");
          lmt.leaves.push_back(std::move(m));
        }
        for (const auto& n : lmt.tree.nodes) {
          if (n.is_leaf() && (n.leaf_model < 0 || n.leaf_model >= static_cast<int>(lmt.leaves.size()))) {
            throw Error(Errc::SchemaViolation, "leaf without a logistic model");
          }
        }
        params->value = std::move(lmt);
        break;
      }
      case Kind::AdaBoost: {
        BoostParams b;
        for (const auto& s : p.at("stumps")) {
          Stump st;
          st.feature = s.at("feature").get<std::size_t>();
          st.class_if_zero = s.at("class_if_zero").get<int>();
          st.class_if_one = s.at("class_if_one").get<int>();
          st.alpha = s.at("alpha").get<double>();
          st.weighted_error = s.at("weighted_error").get<double>();
          if (st.feature >= dims || st.class_if_zero < 0 || st.class_if_one < 0 ||
              st.class_if_zero >= static_cast<int>(k) || st.class_if_one >= static_cast<int>(k)) {
            throw Error(Errc::SchemaViolation, "stump out of range");
          }
          b.stumps.push_back(st);
        }
        params->value = std::move(b);
        break;
      }
      case Kind::Mlp: {
        auto widths = p.at("widths").get<std::vector<std::size_t>>();
        if (widths.empty() || widths.front() != dims) throw Error(Errc::SchemaViolation, "network input width mismatch");
        params->value = MlpNetwork::restore(std::move(widths), k, p.at("parameters").get<std::vector<double>>());
        break;
      }
    }
    return TrainedModel(std::move(config), std::move(classes), dims, std::move(params));
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidArgument) throw Error(Errc::SchemaViolation, e.what());
    throw;
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write model " + path.string());
  out << model.to_json().dump(1) << '\n';
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path, std::optional<Kind> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open model " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaViolation, path.string() + ": " + e.what());
  }
  if (expected && j.contains("kind") && j["kind"].is_string() && j["kind"].get<std::string>() != to_string(*expected)) {
    throw Error(Errc::KindMismatch, "model file holds " + j["kind"].get<std::string>() + ", expected " +
                                        std::string(to_string(*expected)));
  }
  return TrainedModel::from_json(j);
}

}  // namespace permguard::models
