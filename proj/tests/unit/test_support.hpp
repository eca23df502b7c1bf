#pragma once
// Helpers shared by the unit and acceptance tests. The oracle_* functions are
// deliberately naive re-implementations (pair counting, natural-log entropy,
// per-row bookkeeping) so they share no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "permguard/dataset.hpp"
#include "permguard/rng.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return PERMGUARD_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "data" / "fixtures" / name; }

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("permguard-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string feature_name(std::size_t j) {
  std::string s = std::to_string(j);
  return "p." + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

/// Matrix from literal 0/1 rows; labels are +1/-1, families optional.
inline permguard::dataset::FeatureMatrix make_matrix(const std::vector<std::vector<int>>& rows,
                                                     const std::vector<int>& labels,
                                                     std::vector<std::optional<std::string>> families = {}) {
  using namespace permguard::dataset;
  const std::size_t d = rows.empty() ? 0 : rows[0].size();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back(feature_name(j));
  std::vector<std::uint8_t> cells;
  std::vector<Label> ls;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int v : rows[i]) cells.push_back(static_cast<std::uint8_t>(v));
    ls.push_back(labels[i] > 0 ? Label::Malware : Label::Benign);
    ids.push_back("r" + std::to_string(i));
  }
  if (families.empty()) families.assign(rows.size(), std::nullopt);
  return FeatureMatrix(PermissionVocabulary(names), std::move(cells), std::move(ls), std::move(families),
                       std::move(ids));
}

/// n x d matrix with independent cells; both classes present when n >= 2.
inline permguard::dataset::FeatureMatrix random_matrix(std::mt19937_64& gen, std::size_t n, std::size_t d,
                                                       double density = 0.4) {
  std::bernoulli_distribution cell(density), coin(0.5);
  std::vector<std::vector<int>> rows(n, std::vector<int>(d));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = cell(gen) ? 1 : 0;
    labels[i] = coin(gen) ? 1 : -1;
  }
  if (n >= 2) {
    labels[0] = 1;
    labels[1] = -1;
  }
  return make_matrix(rows, labels);
}

// --- oracles --------------------------------------------------------------------

inline double oracle_entropy(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) h += (c / total) * std::log(total / c);
  }
  return h / std::log(2.0);
}

/// IG of column `feature` over binary labels, by explicit partitioning.
inline double oracle_ig(const permguard::dataset::FeatureMatrix& m, std::size_t feature) {
  std::vector<int> on, off, all;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const int l = permguard::dataset::to_int(m.labels()[i]);
    all.push_back(l);
    (m.at(i, feature) ? on : off).push_back(l);
  }
  auto h = [](const std::vector<int>& ls) {
    if (ls.empty()) return 0.0;
    const double pos = static_cast<double>(std::count(ls.begin(), ls.end(), 1));
    return oracle_entropy({pos, static_cast<double>(ls.size()) - pos});
  };
  const double n = static_cast<double>(all.size());
  return h(all) - (static_cast<double>(on.size()) / n) * h(on) - (static_cast<double>(off.size()) / n) * h(off);
}

/// Mann-Whitney pair counting with half credit for ties.
inline double oracle_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] <= 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] > 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Support-weighted precision straight from (actual, predicted) pairs.
inline double oracle_weighted_precision(const std::vector<int>& actual, const std::vector<int>& predicted,
                                        int classes) {
  double total = 0.0;
  for (int c = 0; c < classes; ++c) {
    double tp = 0, predicted_c = 0, support = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
      if (predicted[i] == c) {
        predicted_c += 1;
        if (actual[i] == c) tp += 1;
      }
      if (actual[i] == c) support += 1;
    }
    const double p = predicted_c > 0 ? tp / predicted_c : 0.0;
    total += support / static_cast<double>(actual.size()) * p;
  }
  return total;
}

inline double relative_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

}  // namespace testsupport
