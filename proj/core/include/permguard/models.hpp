#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "permguard/dataset.hpp"

namespace permguard::models {

enum class MlpOptimizer { Sgd, Adam };

enum class Kind { DecisionTree, RandomTree, RandomForest, NaiveBayesMultinomial, LinearSvm, Lmt, AdaBoost, Mlp };

inline constexpr Kind kAllKinds[] = {Kind::DecisionTree, Kind::RandomTree, Kind::RandomForest,
                                     Kind::NaiveBayesMultinomial, Kind::LinearSvm, Kind::Lmt,
                                     Kind::AdaBoost, Kind::Mlp};

std::string_view to_string(Kind kind);
/// Accepts the names produced by to_string; throws InvalidArgument otherwise.
Kind kind_from_string(std::string_view name);

/// Hyperparameters for every kind. Fields that do not apply to `kind` are
/// ignored and left out of the serialized form.
struct ModelConfig {
  Kind kind = Kind::RandomForest;
  std::uint64_t seed = 0;

  // RandomForest
  std::size_t tree_count = 100;
  bool bootstrap = true;
  // DecisionTree
  double pruning_confidence = 0.25;
  bool prune = true;
  // LinearSvm
  double tolerance = 0.001;
  double cost = 1.0;
  std::size_t max_epochs = 1000;
  // Lmt
  std::size_t min_split_instances = 15;
  std::size_t leaf_iterations = 200;
  double leaf_step = 0.1;
  // AdaBoost
  std::size_t rounds = 50;
  // Mlp
  std::vector<std::size_t> hidden_layers{10, 10};
  std::size_t epochs = 100;
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  MlpOptimizer optimizer = MlpOptimizer::Adam;

  /// Throws InvalidArgument on non-positive counts or rates.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

ModelConfig default_config(Kind kind, std::uint64_t seed = 0);

nlohmann::json config_to_json(const ModelConfig& config);
/// Missing fields take their defaults; `kind` is required.
ModelConfig config_from_json(const nlohmann::json& j);

/// Row-major binary training data with class indices into `classes`.
struct TrainingView {
  std::span<const std::uint8_t> cells;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const int> y;
  std::size_t classes = 0;

  std::span<const std::uint8_t> row(std::size_t i) const { return cells.subspan(i * cols, cols); }
};

namespace detail {
struct Parameters;
}

class TrainedModel {
 public:
  TrainedModel(ModelConfig config, std::vector<std::string> classes, std::size_t dimension,
               std::shared_ptr<const detail::Parameters> parameters);

  const ModelConfig& config() const { return config_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t dimension() const { return dimension_; }

  /// One finite real per class; larger means more likely. Throws DimensionMismatch.
  std::vector<double> score(std::span<const std::uint8_t> row) const;
  /// argmax of score; ties go to the earlier class.
  std::size_t predict_index(std::span<const std::uint8_t> row) const;
  const std::string& predict(std::span<const std::uint8_t> row) const { return classes_[predict_index(row)]; }

  /// Training objective at the end of fitting, when the kind has one (SVM
  /// primal, MLP/LMT mean cross-entropy); NaN otherwise.
  double final_objective() const;

  const detail::Parameters& parameters() const { return *params_; }

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);

 private:
  ModelConfig config_;
  std::vector<std::string> classes_;
  std::size_t dimension_;
  std::shared_ptr<const detail::Parameters> params_;
};

/// Trains a model on the matrix for the given task. Deterministic in
/// (config, matrix).
TrainedModel fit(const ModelConfig& config, const dataset::FeatureMatrix& matrix,
                 dataset::Task task = dataset::Task::Detection);
TrainedModel fit(const ModelConfig& config, const TrainingView& data, std::vector<std::string> class_names);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
/// Throws KindMismatch when `expected` is set and differs from the file.
TrainedModel load_model(const std::filesystem::path& path, std::optional<Kind> expected = std::nullopt);

}  // namespace permguard::models
