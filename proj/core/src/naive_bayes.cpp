#include <algorithm>
#include <cmath>

#include "permguard/learners.hpp"

namespace permguard::models {

// Multinomial event model with add-one smoothing on both the per-class
// feature counts and the class priors.
NaiveBayesParams fit_naive_bayes(const TrainingView& data) {
  const std::size_t classes = data.classes;
  const std::size_t d = data.cols;
  std::vector<double> feature_counts(classes * d, 0.0);
  std::vector<double> class_rows(classes, 0.0);
  for (std::size_t i = 0; i < data.rows; ++i) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    class_rows[c] += 1.0;
    const auto r = data.row(i);
    for (std::size_t j = 0; j < d; ++j) feature_counts[c * d + j] += r[j];
  }

  NaiveBayesParams p;
  p.log_prior.resize(classes);
  p.log_prob.resize(classes * d);
  const double n = static_cast<double>(data.rows);
  for (std::size_t c = 0; c < classes; ++c) {
    p.log_prior[c] = std::log((class_rows[c] + 1.0) / (n + static_cast<double>(classes)));
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) total += feature_counts[c * d + j] + 1.0;
    for (std::size_t j = 0; j < d; ++j) p.log_prob[c * d + j] = std::log((feature_counts[c * d + j] + 1.0) / total);
  }
  return p;
}

std::vector<double> naive_bayes_scores(const NaiveBayesParams& p, std::span<const std::uint8_t> row) {
  const std::size_t classes = p.log_prior.size();
  const std::size_t d = row.size();
  std::vector<double> joint(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    double s = p.log_prior[c];
    for (std::size_t j = 0; j < d; ++j) {
      if (row[j]) s += p.log_prob[c * d + j];
    }
    joint[c] = s;
  }
  const double m = *std::max_element(joint.begin(), joint.end());
  double total = 0.0;
  for (double v : joint) total += std::exp(v - m);
  const double log_evidence = m + std::log(total);
  for (auto& v : joint) v -= log_evidence;
  return joint;
}

}  // namespace permguard::models
