#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "permguard/dataset.hpp"
#include "permguard/models.hpp"

namespace permguard::eval {

struct FoldAssignment {
  std::vector<std::size_t> fold_of;  // row -> fold id in [0, k)
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::vector<std::size_t> rows_in(std::size_t fold) const;
  std::vector<std::size_t> rows_outside(std::size_t fold) const;
};

/// Per class, rows are shuffled by the seeded generator and dealt round-robin
/// over the folds, continuing where the previous class stopped. Classes with
/// fewer than k members are assigned anyway and noted in `warnings`.
FoldAssignment stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// Square count matrix; rows = actual class, columns = predicted class.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}
  ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts);

  std::size_t classes() const { return classes_; }
  std::uint64_t at(std::size_t actual, std::size_t predicted) const { return counts_[actual * classes_ + predicted]; }
  void add(std::size_t actual, std::size_t predicted, std::uint64_t n = 1) { counts_[actual * classes_ + predicted] += n; }
  std::uint64_t row_sum(std::size_t actual) const;
  std::uint64_t col_sum(std::size_t predicted) const;
  std::uint64_t total() const;
  bool empty() const { return classes_ == 0; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_ = 0;
  std::vector<std::uint64_t> counts_;
};

enum class Averaging { Weighted, Macro };

/// TP / (TP + FP) for one class; 0 when the class is never predicted.
double precision(const ConfusionMatrix& confusion, std::size_t positive_class);
/// Support-weighted (or plain mean) of per-class precision.
double precision(const ConfusionMatrix& confusion, Averaging averaging);
double recall(const ConfusionMatrix& confusion, std::size_t positive_class);
double recall(const ConfusionMatrix& confusion, Averaging averaging);
double accuracy(const ConfusionMatrix& confusion);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> curve;  // from (0,0) to (1,1), one point per distinct threshold
  double auc = 0.0;
};

/// Binary ROC over labels in {+1,-1}; ties in score earn half credit.
/// Throws OneClassOnly.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Macro average of one-vs-rest AUCs. `scores` is n x classes row-major,
/// `labels` hold class indices. Classes without both positives and negatives
/// are skipped and counted into `skipped`. Throws NoEvaluableClass.
double multiclass_auc(std::span<const double> scores, std::size_t classes, std::span<const int> labels,
                      std::size_t* skipped = nullptr);

struct FoldMetrics {
  std::size_t rows = 0;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  std::optional<double> auc;
};

struct EvalReport {
  std::vector<std::string> class_names;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  std::vector<RocPoint> roc;  // binary tasks only
  ConfusionMatrix confusion;
  std::vector<FoldMetrics> per_fold;
  /// Mean over folds of the metrics on each fold's own training rows.
  double train_precision = 0.0;
  double train_auc = 0.0;
  models::ModelConfig config_echo;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  Averaging averaging = Averaging::Weighted;
  std::vector<std::size_t> fold_of;
  std::vector<std::size_t> predictions;  // pooled, per row
  std::vector<double> scores;            // pooled, rows x classes
  std::vector<std::string> ids;
  std::vector<int> actual;
  std::vector<std::string> warnings;
};

struct CvOptions {
  std::size_t jobs = 1;
  Averaging averaging = Averaging::Weighted;
};

/// k-fold cross-validation: each fold is scored by a model fitted on the
/// other folds with seed mix_seed(seed, fold). Headline numbers are pooled.
EvalReport cross_validate(const models::ModelConfig& config, const dataset::FeatureMatrix& matrix,
                          dataset::Task task, std::size_t k, std::uint64_t seed, const CvOptions& options = {});

/// As above, but training rows come from `train_source` and scored rows from
/// `test_source`. Both must share rows, labels and columns.
EvalReport cross_validate(const models::ModelConfig& config, const dataset::FeatureMatrix& train_source,
                          const dataset::FeatureMatrix& test_source, dataset::Task task, std::size_t k,
                          std::uint64_t seed, const CvOptions& options = {});

nlohmann::json report_to_json(const EvalReport& report);
/// CSV `fpr,tpr`.
std::string roc_csv(const std::vector<RocPoint>& roc);
/// Class-name header row and column; the percentage variant normalizes rows to 100.
std::string confusion_csv(const ConfusionMatrix& confusion, const std::vector<std::string>& class_names,
                          bool percentage);

/// Shortest round-trip decimal used in every CSV this library writes.
std::string format_number(double value);

}  // namespace permguard::eval
