#include <algorithm>
#include <cmath>

#include "permguard/learners.hpp"

namespace permguard::models {

// Multiclass exponential-loss boosting (SAMME) over depth-1 stumps. With two
// classes this reduces to discrete AdaBoost.
BoostParams fit_adaboost(const TrainingView& data, std::size_t rounds) {
  const std::size_t n = data.rows, d = data.cols, classes = data.classes;
  const double chance_error = 1.0 - 1.0 / static_cast<double>(classes);
  const double extra = std::log(static_cast<double>(classes) - 1.0);
  constexpr double kFloor = 1e-10;

  std::vector<std::vector<std::uint32_t>> active(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (r[j]) active[i].push_back(static_cast<std::uint32_t>(j));
    }
  }

  std::vector<double> weight(n, 1.0 / static_cast<double>(n));
  std::vector<double> ones(d * classes);
  std::vector<double> class_mass(classes);
  BoostParams params;

  for (std::size_t round = 0; round < rounds; ++round) {
    std::fill(ones.begin(), ones.end(), 0.0);
    std::fill(class_mass.begin(), class_mass.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(data.y[i]);
      class_mass[c] += weight[i];
      for (auto j : active[i]) ones[j * classes + c] += weight[i];
    }
    double total = 0.0;
    for (double m : class_mass) total += m;

    Stump best;
    double best_error = 2.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double* on = ones.data() + j * classes;
      int c1 = 0, c0 = 0;
      double m1 = -1.0, m0 = -1.0;
      for (std::size_t c = 0; c < classes; ++c) {
        const double off = class_mass[c] - on[c];
        if (on[c] > m1) m1 = on[c], c1 = static_cast<int>(c);
        if (off > m0) m0 = off, c0 = static_cast<int>(c);
      }
      const double error = std::max(0.0, total - m1 - m0) / total;
      if (error < best_error) {
        best_error = error;
        best.feature = j;
        best.class_if_zero = c0;
        best.class_if_one = c1;
      }
    }
    best.weighted_error = best_error;

    if (best_error >= chance_error) {
      // no stump beats chance; keep one so the ensemble is never empty
      if (params.stumps.empty()) {
        best.alpha = 1.0;
        params.stumps.push_back(best);
      }
      break;
    }
    const double err = std::max(best_error, kFloor);
    best.alpha = std::log((1.0 - err) / err) + extra;
    params.stumps.push_back(best);
    if (best_error <= kFloor) break;

    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool on = std::binary_search(active[i].begin(), active[i].end(), static_cast<std::uint32_t>(best.feature));
      const int predicted = on ? best.class_if_one : best.class_if_zero;
      if (predicted != data.y[i]) weight[i] *= std::exp(best.alpha);
      norm += weight[i];
    }
    for (auto& w : weight) w /= norm;
  }
  return params;
}

}  // namespace permguard::models
