#include "permguard/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "permguard/error.hpp"
#include "permguard/rng.hpp"

namespace permguard::experiments {

using nlohmann::json;

std::string to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::None: return "none";
    case SelectionMethod::InfoGain: return "ig";
    case SelectionMethod::Rfe: return "rfe";
    case SelectionMethod::Custom: return "custom";
  }
  return "none";
}

SelectionMethod selection_from_string(const std::string& name) {
  if (name == "none") return SelectionMethod::None;
  if (name == "ig") return SelectionMethod::InfoGain;
  if (name == "rfe") return SelectionMethod::Rfe;
  if (name == "custom") return SelectionMethod::Custom;
  throw Error(Errc::InvalidArgument, "unknown selection method '" + name + "' (expected none, ig, rfe or custom)");
}

Selected apply_selection(const dataset::FeatureMatrix& matrix, const Selection& selection) {
  Selected out;
  switch (selection.method) {
    case SelectionMethod::None:
      out.matrix = matrix;
      out.features.resize(matrix.cols());
      std::iota(out.features.begin(), out.features.end(), 0);
      return out;
    case SelectionMethod::Custom:
      if (selection.custom_features.empty()) throw Error(Errc::InvalidArgument, "custom selection lists no features");
      out.features = selection.custom_features;
      out.matrix = matrix.take_cols(out.features);
      return out;
    case SelectionMethod::InfoGain:
      out.ranking = featsel::rank_by_ig(matrix);
      break;
    case SelectionMethod::Rfe:
      out.ranking = featsel::rfe_rank(matrix, selection.svm);
      break;
  }
  out.matrix = featsel::select(matrix, *out.ranking, selection.k);
  const auto idx = out.ranking->indices();
  out.features.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(selection.k));
  return out;
}

json selection_to_json(const Selection& selection, const Selected& selected) {
  json j = {{"method", to_string(selection.method)}, {"features", selected.features}};
  json names = json::array();
  for (std::size_t c = 0; c < selected.matrix.cols(); ++c) names.push_back(selected.matrix.vocabulary().name(c));
  j["permissions"] = names;
  if (selection.method == SelectionMethod::InfoGain || selection.method == SelectionMethod::Rfe) j["k"] = selection.k;
  if (selection.method == SelectionMethod::Rfe) {
    j["svm"] = {{"cost", selection.svm.cost},
                {"tolerance", selection.svm.tolerance},
                {"max_epochs", selection.svm.max_epochs}};
  }
  j["ranked_before_cv"] = true;
  return j;
}

std::vector<models::ModelConfig> default_configs(std::uint64_t seed) {
  std::vector<models::ModelConfig> out;
  for (auto kind : models::kAllKinds) out.push_back(models::default_config(kind, seed));
  return out;
}

DetectionRun run_detection(const dataset::FeatureMatrix& matrix, const std::vector<models::ModelConfig>& configs,
                           const Selection& selection, std::size_t k, std::uint64_t seed, std::size_t jobs) {
  const Selected selected = apply_selection(matrix, selection);
  DetectionRun run;
  run.selection = selection;
  run.features = selected.features;
  for (const auto& config : configs) {
    run.reports.push_back({std::string(models::to_string(config.kind)),
                           eval::cross_validate(config, selected.matrix, dataset::Task::Detection, k, seed, {jobs})});
  }
  return run;
}

std::vector<std::size_t> top_benign_permissions(const dataset::FeatureMatrix& matrix) {
  std::vector<std::size_t> freq(matrix.cols(), 0);
  bool any = false;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    if (matrix.labels()[i] != dataset::Label::Benign) continue;
    any = true;
    const auto row = matrix.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) freq[j] += row[j];
  }
  if (!any) throw Error(Errc::NoBenignRows, "benign-frequency ranking needs at least one benign row");
  std::vector<std::size_t> order(matrix.cols());
  std::iota(order.begin(), order.end(), 0);
  const auto& vocab = matrix.vocabulary();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (freq[a] != freq[b]) return freq[a] > freq[b];
    return vocab.name(a) < vocab.name(b);
  });
  return order;
}

dataset::FeatureMatrix attack_augment(const dataset::FeatureMatrix& matrix, const AttackSpec& spec) {
  if (spec.n_injected > spec.benign_ranking.size()) {
    throw Error(Errc::NTooLarge, "cannot inject " + std::to_string(spec.n_injected) + " of " +
                                     std::to_string(spec.benign_ranking.size()) + " ranked permissions");
  }
  std::set<std::size_t> seen;
  for (auto f : spec.benign_ranking) {
    if (f >= matrix.cols()) throw Error(Errc::FeatureIndexOutOfRange, "benign ranking names feature " + std::to_string(f));
    if (!seen.insert(f).second) throw Error(Errc::InvalidArgument, "benign ranking repeats feature " + std::to_string(f));
  }
  std::vector<std::uint8_t> cells(matrix.cells().begin(), matrix.cells().end());
  const std::size_t d = matrix.cols();
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    if (matrix.labels()[i] != dataset::Label::Malware) continue;
    for (std::size_t r = 0; r < spec.n_injected; ++r) cells[i * d + spec.benign_ranking[r]] = 1;
  }
  return matrix.with_cells(std::move(cells));
}

std::vector<RobustnessRow> run_robustness(const dataset::FeatureMatrix& matrix, const models::ModelConfig& config,
                                          std::size_t n_max, std::size_t k, std::uint64_t seed, AttackMode mode,
                                          std::size_t jobs) {
  const auto ranking = top_benign_permissions(matrix);
  std::vector<RobustnessRow> rows;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const auto attacked = attack_augment(matrix, {n, ranking});
    const auto& train = mode == AttackMode::Both ? attacked : matrix;
    rows.push_back({n, eval::cross_validate(config, train, attacked, dataset::Task::Detection, k, seed, {jobs})});
  }
  return rows;
}

std::vector<ImbalanceSpec> default_imbalance_specs(std::uint64_t seed) {
  const std::pair<std::size_t, std::size_t> cells[] = {{100, 300},  {200, 600},  {400, 1200}, {800, 2400}, {100, 600},
                                                       {200, 1200}, {400, 2400}, {100, 1200}, {200, 2400}};
  std::vector<ImbalanceSpec> out;
  for (std::size_t i = 0; i < std::size(cells); ++i) out.push_back({cells[i].first, cells[i].second, mix_seed(seed, i)});
  return out;
}

dataset::FeatureMatrix subsample(const dataset::FeatureMatrix& matrix, const ImbalanceSpec& spec) {
  std::vector<std::size_t> malware, benign;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    (matrix.labels()[i] == dataset::Label::Malware ? malware : benign).push_back(i);
  }
  if (spec.malware_count > malware.size() || spec.benign_count > benign.size()) {
    throw Error(Errc::InsufficientSamples, "requested " + std::to_string(spec.malware_count) + " malware / " +
                                               std::to_string(spec.benign_count) + " benign but corpus has " +
                                               std::to_string(malware.size()) + " / " + std::to_string(benign.size()));
  }
  if (spec.malware_count == 0 || spec.benign_count == 0) throw Error(Errc::InvalidArgument, "imbalance counts must be positive");
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(malware));
  rng.shuffle(std::span<std::size_t>(benign));
  std::vector<std::size_t> chosen(malware.begin(), malware.begin() + static_cast<std::ptrdiff_t>(spec.malware_count));
  chosen.insert(chosen.end(), benign.begin(), benign.begin() + static_cast<std::ptrdiff_t>(spec.benign_count));
  std::sort(chosen.begin(), chosen.end());
  return matrix.take_rows(chosen);
}

std::vector<ImbalanceRow> run_imbalance(const dataset::FeatureMatrix& matrix, const models::ModelConfig& config,
                                        const std::vector<ImbalanceSpec>& specs, std::size_t k, std::uint64_t seed,
                                        std::size_t jobs) {
  std::vector<ImbalanceRow> rows;
  for (const auto& spec : specs) {
    const auto sub = subsample(matrix, spec);
    rows.push_back({spec, eval::cross_validate(config, sub, dataset::Task::Detection, k, seed, {jobs})});
  }
  return rows;
}

std::vector<dataset::Sample> malware_only(std::span<const dataset::Sample> samples) {
  std::vector<dataset::Sample> out;
  for (const auto& s : samples) {
    if (s.label == dataset::Label::Malware) out.push_back(s);
  }
  return out;
}

MulticlassRun run_multiclass(const dataset::FeatureMatrix& malware_matrix, const std::vector<models::ModelConfig>& configs,
                             std::size_t k, std::uint64_t seed, std::size_t jobs, eval::Averaging averaging) {
  MulticlassRun run;
  std::map<std::string, std::size_t> sizes;
  for (const auto& f : malware_matrix.families()) {
    if (!f) throw Error(Errc::SchemaViolation, "multiclass input has a row without a family");
    ++sizes[*f];
  }
  for (const auto& [name, n] : sizes) {
    if (n < 2) run.warnings.push_back("family " + name + " has " + std::to_string(n) + " sample(s)");
  }
  for (const auto& config : configs) {
    run.reports.push_back({std::string(models::to_string(config.kind)),
                           eval::cross_validate(config, malware_matrix, dataset::Task::Family, k, seed, {jobs, averaging})});
  }
  for (std::size_t i = 1; i < run.reports.size(); ++i) {
    if (run.reports[i].report.precision > run.reports[run.best].report.precision) run.best = i;
  }
  return run;
}

dataset::FeatureMatrix balanced_subsets(const dataset::FeatureMatrix& malware_matrix, std::size_t per_family,
                                        std::uint64_t seed) {
  if (per_family == 0) throw Error(Errc::InvalidArgument, "per_family must be positive");
  std::map<std::string, std::vector<std::size_t>> by_family;
  for (std::size_t i = 0; i < malware_matrix.rows(); ++i) {
    const auto& f = malware_matrix.families()[i];
    if (!f) throw Error(Errc::SchemaViolation, "balanced subsets need a family on every row");
    by_family[*f].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (auto& [name, rows] : by_family) {
    if (rows.size() < per_family) continue;
    rng.shuffle(std::span<std::size_t>(rows));
    chosen.insert(chosen.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(per_family));
  }
  if (chosen.empty()) {
    throw Error(Errc::NoQualifyingFamily, "no family has " + std::to_string(per_family) + " or more samples");
  }
  std::sort(chosen.begin(), chosen.end());
  return malware_matrix.take_rows(chosen);
}

namespace {

std::string num(double v) { return eval::format_number(v); }

}  // namespace

std::string technique_summary_csv(const std::vector<TechniqueReport>& reports) {
  std::ostringstream out;
  out << "technique,precision_train,precision_test,auc_train,auc_test\n";
  for (const auto& r : reports) {
    out << r.technique << ',' << num(r.report.train_precision) << ',' << num(r.report.precision) << ','
        << num(r.report.train_auc) << ',' << num(r.report.auc) << '\n';
  }
  return out.str();
}

std::string robustness_csv(const std::vector<RobustnessRow>& rows) {
  std::ostringstream out;
  out << "N,precision,auc\n";
  for (const auto& r : rows) out << r.n << ',' << num(r.report.precision) << ',' << num(r.report.auc) << '\n';
  return out.str();
}

std::string imbalance_csv(const std::vector<ImbalanceRow>& rows) {
  std::ostringstream out;
  out << "malware,benign,precision_train,precision_test,auc_train,auc_test\n";
  for (const auto& r : rows) {
    out << r.spec.malware_count << ',' << r.spec.benign_count << ',' << num(r.report.train_precision) << ','
        << num(r.report.precision) << ',' << num(r.report.train_auc) << ',' << num(r.report.auc) << '\n';
  }
  return out.str();
}

json manifest_to_json(const ExperimentManifest& m) {
  json configs = json::array();
  for (const auto& c : m.configs) configs.push_back(models::config_to_json(c));
  json sel = {{"method", to_string(m.selection.method)}, {"k", m.selection.k}};
  if (m.selection.method == SelectionMethod::Custom) sel["features"] = m.selection.custom_features;
  if (m.selection.method == SelectionMethod::Rfe) {
    sel["svm"] = {{"cost", m.selection.svm.cost},
                  {"tolerance", m.selection.svm.tolerance},
                  {"max_epochs", m.selection.svm.max_epochs}};
  }
  return {{"suite", m.suite},   {"corpus", m.corpus}, {"selection", sel}, {"configs", configs},
          {"seed", m.seed},     {"folds", m.folds},   {"output", m.output}, {"extra", m.extra}};
}

ExperimentManifest manifest_from_json(const json& j) {
  try {
    ExperimentManifest m;
    m.suite = j.at("suite").get<std::string>();
    m.corpus = j.at("corpus").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.folds = j.value("folds", std::size_t{5});
    m.output = j.value("output", std::string{});
    if (j.contains("extra")) m.extra = j.at("extra");
    if (j.contains("selection")) {
      const auto& s = j.at("selection");
      m.selection.method = selection_from_string(s.at("method").get<std::string>());
      m.selection.k = s.value("k", std::size_t{0});
      if (s.contains("features")) m.selection.custom_features = s.at("features").get<std::vector<std::size_t>>();
      if (s.contains("svm")) {
        const auto& v = s.at("svm");
        m.selection.svm.cost = v.value("cost", 1.0);
        m.selection.svm.tolerance = v.value("tolerance", 0.001);
        m.selection.svm.max_epochs = v.value("max_epochs", std::size_t{1000});
      }
    }
    if (j.contains("configs")) {
      for (const auto& c : j.at("configs")) m.configs.push_back(models::config_from_json(c));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("malformed experiment manifest: ") + e.what());
  }
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace permguard::experiments
