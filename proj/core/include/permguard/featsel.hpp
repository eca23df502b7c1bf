#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "permguard/dataset.hpp"
#include "permguard/models.hpp"

namespace permguard::featsel {

enum class Method { InfoGain, Rfe };

struct RankedEntry {
  std::size_t feature_index = 0;
  double score = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

/// For InfoGain, scores are the gains (non-increasing). For RFE, entry i has
/// rank i+1 and its score is the feature's |weight| in the SVM trained just
/// before it was eliminated.
struct RankedFeatures {
  std::vector<RankedEntry> entries;
  Method method = Method::InfoGain;

  std::vector<std::size_t> indices() const;
  bool operator==(const RankedFeatures&) const = default;
};

struct RfeCurvePoint {
  std::size_t feature_count = 0;
  double cv_score = 0.0;
};

struct RfeCurve {
  std::vector<RfeCurvePoint> points;
  std::size_t best_count = 0;
};

struct SvmConfig {
  double cost = 1.0;
  double tolerance = 0.001;
  std::size_t max_epochs = 1000;
};

/// Shannon entropy in bits of a class histogram. Throws AllZeroCounts.
double entropy(std::span<const std::size_t> class_counts);

/// Information gain of a binary feature with respect to the detection labels.
double information_gain(const dataset::FeatureMatrix& matrix, std::size_t feature);

/// Same quantity over arbitrary class indices; used for family labels too.
double information_gain(std::span<const std::uint8_t> cells, std::size_t cols, std::span<const int> y,
                        std::size_t classes, std::size_t feature);

/// Every feature scored by information gain, highest first; ties by
/// permission name.
RankedFeatures rank_by_ig(const dataset::FeatureMatrix& matrix);

/// Recursive feature elimination with a linear SVM, dropping the feature of
/// smallest |weight| each round (larger index first on ties).
RankedFeatures rfe_rank(const dataset::FeatureMatrix& matrix, const SvmConfig& svm);

/// Mean stratified k-fold accuracy of a linear SVM on the top-k RFE features
/// for every k in 1..d.
RfeCurve rfe_curve(const dataset::FeatureMatrix& matrix, const SvmConfig& svm, std::size_t folds,
                   std::uint64_t seed, std::size_t jobs = 1);
/// Variant reusing a ranking computed earlier.
RfeCurve rfe_curve(const dataset::FeatureMatrix& matrix, const RankedFeatures& ranking, const SvmConfig& svm,
                   std::size_t folds, std::uint64_t seed, std::size_t jobs = 1);

/// Restricts the matrix to the top-k ranked features, in rank order.
dataset::FeatureMatrix select(const dataset::FeatureMatrix& matrix, const RankedFeatures& ranked, std::size_t k);

/// CSV `rank,feature_index,permission,score`.
void write_ranking_csv(const RankedFeatures& ranked, const dataset::PermissionVocabulary& vocab,
                       const std::filesystem::path& path);
std::string ranking_csv(const RankedFeatures& ranked, const dataset::PermissionVocabulary& vocab);
RankedFeatures read_ranking_csv(const std::filesystem::path& path, Method method);
/// CSV `feature_count,cv_score`.
std::string curve_csv(const RfeCurve& curve);

}  // namespace permguard::featsel
