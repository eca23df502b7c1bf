#include "permguard/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "permguard/error.hpp"
#include "permguard/eval.hpp"
#include "permguard/learners.hpp"
#include "permguard/parallel.hpp"
#include "permguard/rng.hpp"

namespace permguard::featsel {

std::vector<std::size_t> RankedFeatures::indices() const {
  std::vector<std::size_t> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.feature_index);
  return out;
}

double entropy(std::span<const std::size_t> class_counts) {
  std::size_t total = 0;
  for (auto c : class_counts) total += c;
  if (total == 0) throw Error(Errc::AllZeroCounts, "entropy of an all-zero histogram");
  double h = 0.0;
  for (auto c : class_counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double information_gain(std::span<const std::uint8_t> cells, std::size_t cols, std::span<const int> y,
                        std::size_t classes, std::size_t feature) {
  if (feature >= cols) {
    throw Error(Errc::FeatureIndexOutOfRange,
                "feature " + std::to_string(feature) + " outside 0.." + std::to_string(cols == 0 ? 0 : cols - 1));
  }
  const std::size_t n = y.size();
  if (n == 0) throw Error(Errc::EmptyCorpus, "information gain over zero rows");
  std::vector<std::size_t> all(classes, 0), on(classes, 0), off(classes, 0);
  std::size_t n_on = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    ++all[c];
    if (cells[i * cols + feature]) {
      ++on[c];
      ++n_on;
    } else {
      ++off[c];
    }
  }
  const std::size_t n_off = n - n_on;
  double children = 0.0;
  if (n_on) children += static_cast<double>(n_on) / static_cast<double>(n) * entropy(on);
  if (n_off) children += static_cast<double>(n_off) / static_cast<double>(n) * entropy(off);
  // rounding can leave a tiny negative residue for uninformative features
  return std::max(0.0, entropy(all) - children);
}

double information_gain(const dataset::FeatureMatrix& matrix, std::size_t feature) {
  const auto y = matrix.class_indices(dataset::Task::Detection);
  return information_gain(matrix.cells(), matrix.cols(), y, 2, feature);
}

RankedFeatures rank_by_ig(const dataset::FeatureMatrix& matrix) {
  if (matrix.empty()) throw Error(Errc::EmptyCorpus, "cannot rank features of an empty matrix");
  const auto y = matrix.class_indices(dataset::Task::Detection);
  RankedFeatures out;
  out.method = Method::InfoGain;
  for (std::size_t f = 0; f < matrix.cols(); ++f) {
    out.entries.push_back({f, information_gain(matrix.cells(), matrix.cols(), y, 2, f)});
  }
  const auto& vocab = matrix.vocabulary();
  std::stable_sort(out.entries.begin(), out.entries.end(), [&](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return vocab.name(a.feature_index) < vocab.name(b.feature_index);
  });
  return out;
}

namespace {

std::vector<int> signed_labels(const dataset::FeatureMatrix& matrix) {
  std::vector<int> y;
  y.reserve(matrix.rows());
  for (auto l : matrix.labels()) y.push_back(dataset::to_int(l));
  return y;
}

models::SvmOptions svm_options(const SvmConfig& c) {
  return {c.cost, c.tolerance, c.max_epochs};
}

// Sparse view of `rows` restricted to `features` (renumbered 0..features.size()-1).
models::SparseRows restrict(const dataset::FeatureMatrix& m, std::span<const std::size_t> rows,
                            std::span<const std::size_t> features) {
  models::SparseRows x;
  std::vector<std::uint32_t> active;
  for (auto r : rows) {
    active.clear();
    const auto row = m.row(r);
    for (std::size_t j = 0; j < features.size(); ++j) {
      if (row[features[j]]) active.push_back(static_cast<std::uint32_t>(j));
    }
    x.push_row(active);
  }
  return x;
}

}  // namespace

RankedFeatures rfe_rank(const dataset::FeatureMatrix& matrix, const SvmConfig& svm) {
  if (matrix.empty()) throw Error(Errc::EmptyCorpus, "cannot rank features of an empty matrix");
  if (matrix.cols() == 0) throw Error(Errc::DegenerateDimension, "RFE needs at least one feature");
  const auto y = signed_labels(matrix);
  std::vector<std::size_t> all_rows(matrix.rows());
  std::iota(all_rows.begin(), all_rows.end(), 0);

  std::vector<std::size_t> surviving(matrix.cols());
  std::iota(surviving.begin(), surviving.end(), 0);
  std::vector<RankedEntry> removed;
  // the dual feasible set does not depend on the features, so each round
  // starts from the previous round's multipliers
  std::vector<double> dual;
  while (!surviving.empty()) {
    const auto x = restrict(matrix, all_rows, surviving);
    const auto model = models::train_binary_svm(x, y, surviving.size(), svm_options(svm), &dual);
    std::size_t victim = 0;
    for (std::size_t j = 1; j < surviving.size(); ++j) {
      const double a = std::fabs(model.weights[j]), b = std::fabs(model.weights[victim]);
      // scanning in ascending order, "<=" lands on the larger index when tied
      if (a <= b) victim = j;
    }
    removed.push_back({surviving[victim], std::fabs(model.weights[victim])});
    surviving.erase(surviving.begin() + static_cast<std::ptrdiff_t>(victim));
  }
  RankedFeatures out;
  out.method = Method::Rfe;
  out.entries.assign(removed.rbegin(), removed.rend());
  return out;
}

RfeCurve rfe_curve(const dataset::FeatureMatrix& matrix, const SvmConfig& svm, std::size_t folds,
                   std::uint64_t seed, std::size_t jobs) {
  return rfe_curve(matrix, rfe_rank(matrix, svm), svm, folds, seed, jobs);
}

RfeCurve rfe_curve(const dataset::FeatureMatrix& matrix, const RankedFeatures& ranking, const SvmConfig& svm,
                   std::size_t folds, std::uint64_t seed, std::size_t jobs) {
  if (folds < 2) throw Error(Errc::InvalidArgument, "RFE curve needs at least two folds");
  const auto y = signed_labels(matrix);
  const auto classes = matrix.class_indices(dataset::Task::Detection);
  std::size_t pos = 0, neg = 0;
  for (int v : y) (v > 0 ? pos : neg) += 1;
  if (pos < folds || neg < folds) {
    throw Error(Errc::InsufficientClassMembers, "each class needs at least " + std::to_string(folds) +
                                                    " members (have " + std::to_string(neg) + " benign, " +
                                                    std::to_string(pos) + " malware)");
  }
  if (ranking.entries.size() != matrix.cols()) throw Error(Errc::InvalidArgument, "ranking does not cover every feature");
  const auto assignment = eval::stratified_folds(classes, folds, seed);
  const auto order = ranking.indices();

  struct Split {
    std::vector<std::size_t> train, test;
    std::vector<int> train_y;
  };
  std::vector<Split> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    splits[f].train = assignment.rows_outside(f);
    splits[f].test = assignment.rows_in(f);
    for (auto r : splits[f].train) splits[f].train_y.push_back(y[r]);
  }

  const std::size_t d = matrix.cols();
  std::vector<double> accuracy(folds * d, 0.0);
  // folds run concurrently; within a fold the feature count grows and each
  // fit starts from the previous multipliers
  parallel_for(folds, jobs, [&](std::size_t f) {
    const auto& s = splits[f];
    std::vector<double> dual;
    for (std::size_t count = 1; count <= d; ++count) {
      const std::span<const std::size_t> features(order.data(), count);
      const auto model = models::train_binary_svm(restrict(matrix, s.train, features), s.train_y, count, svm_options(svm), &dual);
      std::size_t correct = 0;
      for (auto r : s.test) {
        double v = model.bias;
        const auto row = matrix.row(r);
        for (std::size_t j = 0; j < count; ++j) {
          if (row[features[j]]) v += model.weights[j];
        }
        // a zero decision falls to the benign side, matching predict's tie rule
        const int predicted = v > 0.0 ? 1 : -1;
        if (predicted == y[r]) ++correct;
      }
      accuracy[f * d + count - 1] = static_cast<double>(correct) / static_cast<double>(s.test.size());
    }
  });
  RfeCurve curve;
  curve.points.resize(d);
  for (std::size_t idx = 0; idx < d; ++idx) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) sum += accuracy[f * d + idx];
    curve.points[idx] = {idx + 1, sum / static_cast<double>(folds)};
  }
  curve.best_count = 1;
  double best = curve.points[0].cv_score;
  for (const auto& p : curve.points) {
    if (p.cv_score > best) {
      best = p.cv_score;
      curve.best_count = p.feature_count;
    }
  }
  return curve;
}

dataset::FeatureMatrix select(const dataset::FeatureMatrix& matrix, const RankedFeatures& ranked, std::size_t k) {
  if (k == 0) throw Error(Errc::InvalidArgument, "selection size must be positive");
  if (k > ranked.entries.size() || k > matrix.cols()) {
    throw Error(Errc::KTooLarge, "cannot select " + std::to_string(k) + " of " + std::to_string(ranked.entries.size()) +
                                     " ranked features");
  }
  const auto idx = ranked.indices();
  return matrix.take_cols(std::span<const std::size_t>(idx.data(), k));
}

std::string ranking_csv(const RankedFeatures& ranked, const dataset::PermissionVocabulary& vocab) {
  std::ostringstream out;
  out << "rank,feature_index,permission,score\n";
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    const auto& e = ranked.entries[i];
    out << i + 1 << ',' << e.feature_index << ',' << vocab.name(e.feature_index) << ','
        << eval::format_number(e.score) << '\n';
  }
  return out.str();
}

void write_ranking_csv(const RankedFeatures& ranked, const dataset::PermissionVocabulary& vocab,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << ranking_csv(ranked, vocab);
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

RankedFeatures read_ranking_csv(const std::filesystem::path& path, Method method) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "rank,feature_index,permission,score") {
    throw Error(Errc::SchemaViolation, path.string() + ": missing ranking header");
  }
  RankedFeatures out;
  out.method = method;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 4) throw Error(Errc::SchemaViolation, path.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
    try {
      out.entries.push_back({std::stoul(fields[1]), std::stod(fields[3])});
    } catch (const std::exception&) {
      throw Error(Errc::SchemaViolation, path.string() + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

std::string curve_csv(const RfeCurve& curve) {
  std::ostringstream out;
  out << "feature_count,cv_score\n";
  for (const auto& p : curve.points) out << p.feature_count << ',' << eval::format_number(p.cv_score) << '\n';
  return out.str();
}

}  // namespace permguard::featsel
