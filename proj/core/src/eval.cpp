#include "permguard/eval.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <sstream>

#include "permguard/error.hpp"
#include "permguard/parallel.hpp"
#include "permguard/rng.hpp"

namespace permguard::eval {

using nlohmann::json;

std::vector<std::size_t> FoldAssignment::rows_in(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldAssignment::rows_outside(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) rows.push_back(i);
  }
  return rows;
}

FoldAssignment stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(Errc::InvalidArgument, "cross-validation needs k >= 2");
  if (k > labels.size()) {
    throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " exceeds " + std::to_string(labels.size()) + " rows");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.fold_of.assign(labels.size(), 0);
  Rng rng(seed);
  std::size_t next = 0;
  for (auto& [label, rows] : by_class) {
    rng.shuffle(std::span<std::size_t>(rows));
    for (auto r : rows) {
      out.fold_of[r] = next;
      next = (next + 1) % k;
    }
    if (rows.size() < k) {
      out.warnings.push_back("class " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                             " member(s), fewer than k = " + std::to_string(k) + "; some folds lack it");
    }
  }
  return out;
}

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts)
    : classes_(classes), counts_(std::move(counts)) {
  if (counts_.size() != classes_ * classes_) throw Error(Errc::InvalidArgument, "confusion matrix is not square");
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t actual) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(actual, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t a = 0; a < classes_; ++a) s += at(a, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

namespace {

void require_nonempty(const ConfusionMatrix& m) {
  if (m.empty() || m.total() == 0) throw Error(Errc::EmptyMatrix, "confusion matrix holds no counts");
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

template <typename PerClass>
double averaged(const ConfusionMatrix& m, Averaging averaging, PerClass per_class) {
  require_nonempty(m);
  const double n = static_cast<double>(m.total());
  double sum = 0.0;
  for (std::size_t c = 0; c < m.classes(); ++c) {
    const double v = per_class(c);
    sum += averaging == Averaging::Weighted ? (static_cast<double>(m.row_sum(c)) / n) * v : v;
  }
  return averaging == Averaging::Weighted ? sum : sum / static_cast<double>(m.classes());
}

}  // namespace

double precision(const ConfusionMatrix& m, std::size_t positive) {
  require_nonempty(m);
  return ratio(m.at(positive, positive), m.col_sum(positive));
}

double precision(const ConfusionMatrix& m, Averaging averaging) {
  return averaged(m, averaging, [&](std::size_t c) { return ratio(m.at(c, c), m.col_sum(c)); });
}

double recall(const ConfusionMatrix& m, std::size_t positive) {
  require_nonempty(m);
  return ratio(m.at(positive, positive), m.row_sum(positive));
}

double recall(const ConfusionMatrix& m, Averaging averaging) {
  return averaged(m, averaging, [&](std::size_t c) { return ratio(m.at(c, c), m.row_sum(c)); });
}

double accuracy(const ConfusionMatrix& m) {
  require_nonempty(m);
  std::uint64_t diag = 0;
  for (std::size_t c = 0; c < m.classes(); ++c) diag += m.at(c, c);
  return ratio(diag, m.total());
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(Errc::InvalidArgument, "scores and labels differ in length");
  std::uint64_t pos = 0, neg = 0;
  for (int l : labels) (l > 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw Error(Errc::OneClassOnly, "ROC needs both positive and negative labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult out;
  out.curve.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0, twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    const std::uint64_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (labels[order[i]] > 0 ? tp : fp) += 1;
    // trapezoid in count space: exact pair counting with half-credit ties
    twice_area += (fp - fp0) * (tp + tp0);
    out.curve.push_back({static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos)});
  }
  out.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return out;
}

double multiclass_auc(std::span<const double> scores, std::size_t classes, std::span<const int> labels,
                      std::size_t* skipped) {
  if (classes < 2) throw Error(Errc::InvalidArgument, "multiclass AUC needs at least two classes");
  if (scores.size() != labels.size() * classes) throw Error(Errc::InvalidArgument, "score matrix shape mismatch");
  std::vector<double> column(labels.size());
  std::vector<int> binary(labels.size());
  double sum = 0.0;
  std::size_t used = 0, missing = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool is_c = labels[i] == static_cast<int>(c);
      binary[i] = is_c ? 1 : -1;
      column[i] = scores[i * classes + c];
      (is_c ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
      ++missing;
      continue;
    }
    sum += roc_auc(column, binary).auc;
    ++used;
  }
  if (skipped) *skipped = missing;
  if (used == 0) throw Error(Errc::NoEvaluableClass, "no class has both positive and negative rows");
  return sum / static_cast<double>(used);
}

// --- cross-validation -------------------------------------------------------------

namespace {

struct FoldOutcome {
  std::vector<std::size_t> test_rows;
  std::vector<std::size_t> predictions;
  std::vector<double> scores;
  FoldMetrics metrics;
  std::optional<double> train_precision;
  std::optional<double> train_auc;
};

bool is_binary(dataset::Task task) { return task == dataset::Task::Detection; }

double headline_precision(const ConfusionMatrix& m, dataset::Task task, Averaging averaging) {
  return is_binary(task) ? precision(m, std::size_t{1}) : precision(m, averaging);
}

double headline_recall(const ConfusionMatrix& m, dataset::Task task, Averaging averaging) {
  return is_binary(task) ? recall(m, std::size_t{1}) : recall(m, averaging);
}

std::optional<double> auc_of(std::span<const double> scores, std::size_t classes, std::span<const int> y,
                             dataset::Task task) {
  try {
    if (is_binary(task)) {
      std::vector<double> pos(y.size());
      std::vector<int> labels(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) {
        pos[i] = scores[i * classes + 1];
        labels[i] = y[i] == 1 ? 1 : -1;
      }
      return roc_auc(pos, labels).auc;
    }
    if (classes < 2) return std::nullopt;
    return multiclass_auc(scores, classes, y);
  } catch (const Error& e) {
    if (e.code() == Errc::OneClassOnly || e.code() == Errc::NoEvaluableClass) return std::nullopt;
    throw;
  }
}

}  // namespace

EvalReport cross_validate(const models::ModelConfig& config, const dataset::FeatureMatrix& matrix,
                          dataset::Task task, std::size_t k, std::uint64_t seed, const CvOptions& options) {
  return cross_validate(config, matrix, matrix, task, k, seed, options);
}

EvalReport cross_validate(const models::ModelConfig& config, const dataset::FeatureMatrix& train_source,
                          const dataset::FeatureMatrix& test_source, dataset::Task task, std::size_t k,
                          std::uint64_t seed, const CvOptions& options) {
  if (train_source.rows() != test_source.rows() || train_source.cols() != test_source.cols() ||
      train_source.labels() != test_source.labels() || train_source.families() != test_source.families()) {
    throw Error(Errc::InvalidArgument, "training and scoring matrices must share rows, labels and columns");
  }
  const std::vector<int> y = test_source.class_indices(task);
  const std::vector<std::string> names = test_source.class_names(task);
  const std::size_t classes = names.size();
  const FoldAssignment folds = stratified_folds(y, k, seed);

  std::vector<FoldOutcome> outcomes(k);
  parallel_for(k, options.jobs, [&](std::size_t f) {
    FoldOutcome& out = outcomes[f];
    const std::vector<std::size_t> train_rows = folds.rows_outside(f);
    out.test_rows = folds.rows_in(f);

    const dataset::FeatureMatrix train = train_source.take_rows(train_rows);
    std::vector<int> train_y(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) train_y[i] = y[train_rows[i]];
    models::ModelConfig fold_config = config;
    fold_config.seed = mix_seed(seed, f);
    const models::TrainingView view{train.cells(), train.rows(), train.cols(), train_y, classes};
    const models::TrainedModel model = models::fit(fold_config, view, names);

    auto score_rows = [&](const dataset::FeatureMatrix& source, std::span<const std::size_t> rows,
                          std::vector<std::size_t>& predicted, std::vector<double>& scores) {
      for (auto r : rows) {
        const auto s = model.score(source.row(r));
        predicted.push_back(static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin()));
        scores.insert(scores.end(), s.begin(), s.end());
      }
    };
    score_rows(test_source, out.test_rows, out.predictions, out.scores);

    ConfusionMatrix cm(classes);
    std::vector<int> fold_y;
    for (std::size_t i = 0; i < out.test_rows.size(); ++i) {
      cm.add(static_cast<std::size_t>(y[out.test_rows[i]]), out.predictions[i]);
      fold_y.push_back(y[out.test_rows[i]]);
    }
    out.metrics.rows = out.test_rows.size();
    out.metrics.precision = headline_precision(cm, task, options.averaging);
    out.metrics.recall = headline_recall(cm, task, options.averaging);
    out.metrics.accuracy = accuracy(cm);
    out.metrics.auc = auc_of(out.scores, classes, fold_y, task);

    std::vector<std::size_t> train_pred;
    std::vector<double> train_scores;
    score_rows(train_source, train_rows, train_pred, train_scores);
    ConfusionMatrix train_cm(classes);
    for (std::size_t i = 0; i < train_rows.size(); ++i) train_cm.add(static_cast<std::size_t>(train_y[i]), train_pred[i]);
    out.train_precision = headline_precision(train_cm, task, options.averaging);
    out.train_auc = auc_of(train_scores, classes, train_y, task);
  });

  EvalReport report;
  report.class_names = names;
  report.config_echo = config;
  report.config_echo.seed = seed;
  report.seed = seed;
  report.k = k;
  report.averaging = options.averaging;
  report.fold_of = folds.fold_of;
  report.warnings = folds.warnings;
  report.ids = test_source.ids();
  report.actual = y;
  report.predictions.assign(y.size(), 0);
  report.scores.assign(y.size() * classes, 0.0);
  report.confusion = ConfusionMatrix(classes);

  double train_precision_sum = 0.0, train_auc_sum = 0.0;
  std::size_t train_auc_count = 0;
  for (const auto& out : outcomes) {
    for (std::size_t i = 0; i < out.test_rows.size(); ++i) {
      const std::size_t r = out.test_rows[i];
      report.predictions[r] = out.predictions[i];
      std::copy_n(out.scores.begin() + static_cast<std::ptrdiff_t>(i * classes), classes,
                  report.scores.begin() + static_cast<std::ptrdiff_t>(r * classes));
      report.confusion.add(static_cast<std::size_t>(y[r]), out.predictions[i]);
    }
    report.per_fold.push_back(out.metrics);
    train_precision_sum += *out.train_precision;
    if (out.train_auc) {
      train_auc_sum += *out.train_auc;
      ++train_auc_count;
    }
  }
  report.precision = headline_precision(report.confusion, task, options.averaging);
  report.recall = headline_recall(report.confusion, task, options.averaging);
  report.accuracy = accuracy(report.confusion);
  report.train_precision = train_precision_sum / static_cast<double>(k);
  report.train_auc = train_auc_count ? train_auc_sum / static_cast<double>(train_auc_count) : 0.0;

  if (is_binary(task)) {
    std::vector<double> pos(y.size());
    std::vector<int> labels(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      pos[i] = report.scores[i * classes + 1];
      labels[i] = y[i] == 1 ? 1 : -1;
    }
    RocResult roc = roc_auc(pos, labels);
    report.auc = roc.auc;
    report.roc = std::move(roc.curve);
  } else if (classes >= 2) {
    std::size_t skipped = 0;
    report.auc = multiclass_auc(report.scores, classes, y, &skipped);
    if (skipped) report.warnings.push_back(std::to_string(skipped) + " class(es) skipped in multiclass AUC");
  }
  return report;
}

// --- output -------------------------------------------------------------------------

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

json report_to_json(const EvalReport& r) {
  json j;
  j["class_names"] = r.class_names;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["accuracy"] = r.accuracy;
  j["auc"] = r.auc;
  j["train_precision"] = r.train_precision;
  j["train_auc"] = r.train_auc;
  j["seed"] = r.seed;
  j["k"] = r.k;
  j["config"] = models::config_to_json(r.config_echo);
  j["conventions"] = {
      {"pooling", "headline metrics pooled over all folds; per_fold holds fold-level values"},
      {"precision_averaging", r.class_names.size() == 2 && r.class_names[0] == "-1"
                                  ? "binary, positive class +1"
                                  : (r.averaging == Averaging::Weighted ? "weighted by class support" : "macro")},
      {"auc_ties", "half credit (Mann-Whitney)"},
      {"multiclass_auc", "macro one-vs-rest over classes present"},
  };
  json roc = json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  j["roc"] = roc;
  json cm = json::array();
  for (std::size_t a = 0; a < r.confusion.classes(); ++a) {
    json row = json::array();
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) row.push_back(r.confusion.at(a, p));
    cm.push_back(row);
  }
  j["confusion"] = cm;
  json folds = json::array();
  for (const auto& f : r.per_fold) {
    folds.push_back({{"rows", f.rows},
                     {"precision", f.precision},
                     {"recall", f.recall},
                     {"accuracy", f.accuracy},
                     {"auc", f.auc ? json(*f.auc) : json(nullptr)}});
  }
  j["per_fold"] = folds;
  json rows = json::array();
  const std::size_t classes = r.class_names.size();
  for (std::size_t i = 0; i < r.predictions.size(); ++i) {
    std::vector<double> s(r.scores.begin() + static_cast<std::ptrdiff_t>(i * classes),
                          r.scores.begin() + static_cast<std::ptrdiff_t>((i + 1) * classes));
    rows.push_back({{"id", r.ids.at(i)},
                    {"fold", r.fold_of.at(i)},
                    {"actual", r.class_names.at(static_cast<std::size_t>(r.actual.at(i)))},
                    {"predicted", r.class_names.at(r.predictions[i])},
                    {"scores", s}});
  }
  j["rows"] = rows;
  j["warnings"] = r.warnings;
  return j;
}

std::string roc_csv(const std::vector<RocPoint>& roc) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const auto& p : roc) out << format_number(p.fpr) << ',' << format_number(p.tpr) << '\n';
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& m, const std::vector<std::string>& names, bool percentage) {
  std::ostringstream out;
  out << "actual\\predicted";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t a = 0; a < m.classes(); ++a) {
    out << names.at(a);
    const std::uint64_t row = m.row_sum(a);
    for (std::size_t p = 0; p < m.classes(); ++p) {
      out << ',';
      if (percentage) {
        out << format_number(row == 0 ? 0.0 : 100.0 * static_cast<double>(m.at(a, p)) / static_cast<double>(row));
      } else {
        out << m.at(a, p);
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace permguard::eval
