#include "commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "permguard/axml.hpp"
#include "permguard/dataset.hpp"
#include "permguard/error.hpp"
#include "permguard/eval.hpp"
#include "permguard/experiments.hpp"
#include "permguard/featsel.hpp"
#include "permguard/models.hpp"
#include "permguard/rng.hpp"
#include "permguard/synth.hpp"

namespace permguard::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using experiments::write_text;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::IoFailure, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

// Versions, seeds and input digests. Output paths and --jobs are left out so
// that reruns into other directories, or with other thread counts, match.
class RunSummary {
 public:
  explicit RunSummary(std::string command) {
    j_["tool"] = "permguard";
    j_["version"] = kToolVersion;
    j_["command"] = std::move(command);
    j_["json_library"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                         "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    j_["inputs"] = json::object();
    j_["parameters"] = json::object();
  }
  void input(const std::string& name, const std::string& digest) { j_["inputs"][name] = {{"sha256", digest}}; }
  void seed(std::uint64_t s) { j_["seed"] = s; }
  template <typename T>
  void param(const std::string& key, const T& value) {
    j_["parameters"][key] = value;
  }
  void write_into(const fs::path& dir) const { write_text(dir / "run-summary.json", dump(j_)); }
  void print() const { std::cerr << j_.dump() << "\n"; }

 private:
  json j_;
};

struct Corpus {
  std::vector<dataset::Sample> samples;
  dataset::FeatureMatrix matrix;
  std::string name;
  std::string digest;
  std::optional<synth::SynthSpec> spec;
};

Corpus load_corpus_arg(const std::string& arg) {
  Corpus c;
  c.name = arg;
  if (arg == kSyntheticDefault) {
    const auto spec_json = synth::default_spec_json();
    c.spec = synth::spec_from_json(spec_json);
    c.samples = synth::generate(*c.spec);
    c.matrix = dataset::vectorize_all(c.samples, synth::vocabulary(*c.spec)).matrix;
    c.digest = sha256(spec_json.dump());
    return c;
  }
  c.digest = sha256(read_file(arg));
  c.samples = dataset::load_corpus(arg);
  if (c.samples.empty()) throw Error(Errc::EmptyCorpus, arg + " holds no samples");
  c.matrix = dataset::to_matrix(c.samples);
  return c;
}

// Multiclass input: malware rows only, vocabulary rebuilt from what they request.
dataset::FeatureMatrix malware_matrix(const Corpus& c) {
  const auto malware = experiments::malware_only(c.samples);
  if (malware.empty()) throw Error(Errc::EmptyCorpus, c.name + " holds no malware samples");
  return dataset::to_matrix(malware);
}

dataset::Task parse_task(const std::string& s) {
  if (s == "detection") return dataset::Task::Detection;
  if (s == "family") return dataset::Task::Family;
  throw Error(Errc::InvalidArgument, "unknown task '" + s + "' (expected detection or family)");
}

eval::Averaging parse_averaging(const std::string& s) {
  if (s == "weighted") return eval::Averaging::Weighted;
  if (s == "macro") return eval::Averaging::Macro;
  throw Error(Errc::InvalidArgument, "unknown averaging '" + s + "' (expected weighted or macro)");
}

models::ModelConfig resolve_config(const ModelArgs& m, std::uint64_t seed) {
  if (!m.config.empty()) {
    std::ifstream in(m.config, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot read " + m.config);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(Errc::SchemaViolation, m.config + ": " + e.what());
    }
    auto c = models::config_from_json(j);
    c.seed = seed;
    return c;
  }
  if (m.kind.empty()) throw Error(Errc::InvalidArgument, "give --config or --kind");
  return models::default_config(models::kind_from_string(m.kind), seed);
}

std::vector<models::ModelConfig> resolve_kinds(const std::vector<std::string>& kinds, std::uint64_t seed,
                                               std::vector<models::ModelConfig> fallback) {
  if (kinds.empty()) return fallback;
  std::vector<models::ModelConfig> out;
  for (const auto& k : kinds) out.push_back(models::default_config(models::kind_from_string(k), seed));
  return out;
}

experiments::Selection make_selection(const std::string& method, std::size_t k) {
  experiments::Selection s;
  s.method = experiments::selection_from_string(method);
  s.k = k;
  if ((s.method == experiments::SelectionMethod::InfoGain || s.method == experiments::SelectionMethod::Rfe) && k == 0) {
    throw Error(Errc::InvalidArgument, "--k is required with --selection " + method);
  }
  return s;
}

void write_report(const fs::path& dir, const std::string& stem, const eval::EvalReport& report, const json& extra) {
  json j = eval::report_to_json(report);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  write_text(dir / "reports" / (stem + ".json"), dump(j));
  if (!report.roc.empty()) write_text(dir / "roc" / (stem + ".csv"), eval::roc_csv(report.roc));
}

void write_confusions(const fs::path& dir, const eval::EvalReport& report) {
  write_text(dir / "confusion.csv", eval::confusion_csv(report.confusion, report.class_names, false));
  write_text(dir / "confusion_pct.csv", eval::confusion_csv(report.confusion, report.class_names, true));
}

std::string ranking_for(const experiments::Selected& sel, const dataset::FeatureMatrix& source) {
  return sel.ranking ? featsel::ranking_csv(*sel.ranking, source.vocabulary()) : std::string{};
}

// Suite arguments merged with an optional experiment manifest.
struct SuitePlan {
  experiments::ExperimentManifest manifest;
  Corpus corpus;
};

SuitePlan plan_suite(const std::string& suite, const SuiteArgs& a, std::vector<models::ModelConfig> default_configs,
                     experiments::Selection default_selection) {
  SuitePlan p;
  auto& m = p.manifest;
  if (!a.manifest.empty()) {
    m = experiments::load_manifest(a.manifest);
    if (m.suite != suite) throw Error(Errc::SchemaViolation, a.manifest + " describes suite '" + m.suite + "', not '" + suite + "'");
    if (m.configs.empty()) m.configs = std::move(default_configs);
  } else {
    m.suite = suite;
    m.corpus = a.corpus;
    m.seed = a.seed;
    m.folds = a.folds;
    m.selection = default_selection;
    m.configs = std::move(default_configs);
  }
  m.output = ".";
  for (auto& c : m.configs) c.seed = m.seed;
  p.corpus = load_corpus_arg(m.corpus);
  return p;
}

void finish_suite(const fs::path& out, const SuitePlan& p, const std::string& command) {
  write_text(out / "manifest.json", dump(experiments::manifest_to_json(p.manifest)));
  RunSummary summary(command);
  summary.seed(p.manifest.seed);
  summary.input("corpus", p.corpus.digest);
  summary.param("corpus", p.corpus.name);
  summary.param("folds", p.manifest.folds);
  summary.write_into(out);
}

}  // namespace

// --- extraction / corpus --------------------------------------------------------------

int run_extract(const ExtractArgs& a) {
  std::ostringstream out;
  for (const auto& input : a.inputs) {
    const auto info = axml::parse_manifest_file(input);
    json rec = {{"id", fs::path(input).stem().string()},
                {"source", fs::path(input).filename().string()},
                {"package", info.package_name},
                {"permissions", info.permissions}};
    out << rec.dump() << "\n";
  }
  if (a.out.empty()) {
    std::cout << out.str();
  } else {
    write_text(a.out, out.str());
  }
  return 0;
}

int run_build_corpus(const BuildCorpusArgs& a) {
  std::map<std::string, std::set<std::string>> perms;
  std::vector<std::string> order;
  {
    std::istringstream in(read_file(a.extracted));
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineno;
      if (line.empty()) continue;
      try {
        const auto j = json::parse(line);
        const auto id = j.at("id").get<std::string>();
        if (perms.count(id)) throw Error(Errc::DuplicateId, a.extracted + ":" + std::to_string(lineno) + ": duplicate id " + id);
        perms[id] = j.at("permissions").get<std::set<std::string>>();
        order.push_back(id);
      } catch (const json::exception& e) {
        throw Error(Errc::SchemaViolation, a.extracted + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  std::map<std::string, std::pair<dataset::Label, std::optional<std::string>>> labels;
  {
    std::istringstream in(read_file(a.labels));
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || (lineno == 1 && line.rfind("id,", 0) == 0)) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() < 2 || f.size() > 3) {
        throw Error(Errc::SchemaViolation, a.labels + ":" + std::to_string(lineno) + ": expected id,label[,family]");
      }
      dataset::Label label;
      if (f[1] == "+1" || f[1] == "1") {
        label = dataset::Label::Malware;
      } else if (f[1] == "-1") {
        label = dataset::Label::Benign;
      } else {
        throw Error(Errc::SchemaViolation, a.labels + ":" + std::to_string(lineno) + ": label must be +1 or -1");
      }
      std::optional<std::string> family;
      if (f.size() == 3 && !f[2].empty()) family = f[2];
      labels[f[0]] = {label, family};
    }
  }
  std::vector<dataset::Sample> samples;
  for (const auto& id : order) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw Error(Errc::SchemaViolation, "no label for extracted id " + id);
    dataset::Sample s{id, perms[id], it->second.first, it->second.second};
    dataset::validate(s);
    samples.push_back(std::move(s));
  }
  dataset::save_corpus(samples, a.out);
  if (!a.vocab_out.empty() && !samples.empty()) dataset::save_vocabulary(dataset::build_vocabulary(samples), a.vocab_out);
  RunSummary summary("build-corpus");
  summary.input("extracted", sha256(read_file(a.extracted)));
  summary.input("labels", sha256(read_file(a.labels)));
  summary.param("samples", samples.size());
  summary.print();
  return 0;
}

// --- feature engineering ----------------------------------------------------------------

int run_rank(const RankArgs& a) {
  const auto corpus = load_corpus_arg(a.corpus);
  featsel::RankedFeatures ranked;
  RunSummary summary("rank");
  summary.input("corpus", corpus.digest);
  summary.param("method", a.method);
  if (a.method == "ig") {
    ranked = featsel::rank_by_ig(corpus.matrix);
  } else if (a.method == "rfe") {
    ranked = featsel::rfe_rank(corpus.matrix, {a.cost, a.tolerance, 1000});
    summary.param("cost", a.cost);
    summary.param("tolerance", a.tolerance);
  } else {
    throw Error(Errc::InvalidArgument, "unknown --method '" + a.method + "' (expected ig or rfe)");
  }
  if (a.top) {
    if (*a.top == 0 || *a.top > ranked.entries.size()) {
      throw Error(Errc::KTooLarge, "--top must lie in 1.." + std::to_string(ranked.entries.size()));
    }
    ranked.entries.resize(*a.top);
    summary.param("top", *a.top);
  }
  featsel::write_ranking_csv(ranked, corpus.matrix.vocabulary(), a.out);
  summary.print();
  return 0;
}

int run_curve(const CurveArgs& a) {
  const auto corpus = load_corpus_arg(a.corpus);
  const featsel::SvmConfig svm{a.cost, a.tolerance, 1000};
  RunSummary summary("curve");
  summary.input("corpus", corpus.digest);
  summary.seed(a.seed);
  summary.param("folds", a.folds);
  summary.param("cv_score", "mean stratified-fold accuracy");
  featsel::RfeCurve curve;
  if (!a.ranking.empty()) {
    summary.input("ranking", sha256(read_file(a.ranking)));
    curve = featsel::rfe_curve(corpus.matrix, featsel::read_ranking_csv(a.ranking, featsel::Method::Rfe), svm, a.folds,
                               a.seed, a.jobs);
  } else {
    curve = featsel::rfe_curve(corpus.matrix, svm, a.folds, a.seed, a.jobs);
  }
  write_text(a.out, featsel::curve_csv(curve));
  summary.param("best_count", curve.best_count);
  summary.print();
  return 0;
}

// --- models ----------------------------------------------------------------------------

int run_train(const TrainArgs& a) {
  const auto corpus = load_corpus_arg(a.corpus);
  const auto config = resolve_config(a.model, a.seed);
  const auto task = parse_task(a.model.task);
  const auto& matrix = task == dataset::Task::Family ? malware_matrix(corpus) : corpus.matrix;
  const auto model = models::fit(config, matrix, task);
  models::save_model(model, a.out);
  RunSummary summary("train");
  summary.input("corpus", corpus.digest);
  summary.seed(a.seed);
  summary.param("config", models::config_to_json(config));
  summary.print();
  return 0;
}

int run_evaluate(const EvaluateArgs& a) {
  const auto corpus = load_corpus_arg(a.corpus);
  const auto config = resolve_config(a.model, a.seed);
  const auto task = parse_task(a.model.task);
  const auto source = task == dataset::Task::Family ? malware_matrix(corpus) : corpus.matrix;
  const auto selection = make_selection(a.selection, a.k);
  const auto selected = experiments::apply_selection(source, selection);
  const auto report = eval::cross_validate(config, selected.matrix, task, a.folds, a.seed,
                                           {a.jobs, parse_averaging(a.averaging)});
  const fs::path out(a.out);
  json j = eval::report_to_json(report);
  j["selection"] = experiments::selection_to_json(selection, selected);
  write_text(out / "report.json", dump(j));
  if (!report.roc.empty()) write_text(out / "roc.csv", eval::roc_csv(report.roc));
  write_confusions(out, report);
  if (selected.ranking) write_text(out / "ranking.csv", ranking_for(selected, source));
  RunSummary summary("evaluate");
  summary.input("corpus", corpus.digest);
  summary.seed(a.seed);
  summary.param("config", models::config_to_json(config));
  summary.param("folds", a.folds);
  summary.param("task", a.model.task);
  summary.write_into(out);
  return 0;
}

// --- suites ----------------------------------------------------------------------------

int run_detect_suite(const SuiteArgs& a) {
  auto plan = plan_suite("detect", a, resolve_kinds(a.kinds, a.seed, experiments::default_configs(a.seed)),
                         experiments::Selection::ig(a.ig_k));
  auto& m = plan.manifest;
  std::vector<experiments::Selection> selections;
  if (a.manifest.empty()) {
    selections = {experiments::Selection::ig(a.ig_k), experiments::Selection::rfe(a.rfe_k)};
    m.extra["selections"] = {{{"method", "ig"}, {"k", a.ig_k}}, {{"method", "rfe"}, {"k", a.rfe_k}}};
  } else {
    selections = {m.selection};
  }
  const fs::path out(a.out);
  for (auto sel : selections) {
    const auto selected = experiments::apply_selection(plan.corpus.matrix, sel);
    const fs::path dir = out / experiments::to_string(sel.method);
    std::vector<experiments::TechniqueReport> reports;
    const json provenance = {{"selection", experiments::selection_to_json(sel, selected)}};
    for (const auto& config : m.configs) {
      auto report = eval::cross_validate(config, selected.matrix, dataset::Task::Detection, m.folds, m.seed, {a.jobs});
      write_report(dir, std::string(models::to_string(config.kind)), report, provenance);
      reports.push_back({std::string(models::to_string(config.kind)), std::move(report)});
    }
    write_text(dir / "summary.csv", experiments::technique_summary_csv(reports));
    if (selected.ranking) write_text(dir / "ranking.csv", ranking_for(selected, plan.corpus.matrix));
  }
  finish_suite(out, plan, "detect-suite");
  return 0;
}

int run_imbalance_suite(const SuiteArgs& a) {
  auto plan = plan_suite("imbalance", a, resolve_kinds(a.kinds, a.seed, {models::default_config(models::Kind::Mlp, a.seed)}),
                         make_selection(a.selection, a.selection == "rfe" ? a.rfe_k : a.ig_k));
  auto& m = plan.manifest;
  if (m.configs.size() != 1) throw Error(Errc::InvalidArgument, "imbalance-suite takes exactly one model kind");
  std::vector<experiments::ImbalanceSpec> specs;
  const std::vector<std::string> cells = m.extra.contains("cells") ? m.extra["cells"].get<std::vector<std::string>>() : a.cells;
  if (cells.empty()) {
    specs = experiments::default_imbalance_specs(m.seed);
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto colon = cells[i].find(':');
      if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "cell '" + cells[i] + "' is not malware:benign");
      try {
        specs.push_back({std::stoul(cells[i].substr(0, colon)), std::stoul(cells[i].substr(colon + 1)), mix_seed(m.seed, i)});
      } catch (const std::exception&) {
        throw Error(Errc::InvalidArgument, "cell '" + cells[i] + "' is not malware:benign");
      }
    }
  }
  json cell_list = json::array();
  for (const auto& s : specs) cell_list.push_back(std::to_string(s.malware_count) + ":" + std::to_string(s.benign_count));
  m.extra["cells"] = cell_list;

  const auto selected = experiments::apply_selection(plan.corpus.matrix, m.selection);
  const auto rows = experiments::run_imbalance(selected.matrix, m.configs[0], specs, m.folds, m.seed, a.jobs);
  const fs::path out(a.out);
  const json provenance = {{"selection", experiments::selection_to_json(m.selection, selected)}};
  for (const auto& r : rows) {
    json extra = provenance;
    extra["subsample"] = {{"malware", r.spec.malware_count}, {"benign", r.spec.benign_count}, {"seed", r.spec.seed},
                          {"without_replacement", true}};
    write_report(out, "m" + std::to_string(r.spec.malware_count) + "_b" + std::to_string(r.spec.benign_count), r.report, extra);
  }
  write_text(out / "summary.csv", experiments::imbalance_csv(rows));
  finish_suite(out, plan, "imbalance-suite");
  return 0;
}

int run_robustness_suite(const SuiteArgs& a) {
  auto plan = plan_suite("robustness", a, resolve_kinds(a.kinds, a.seed, {models::default_config(models::Kind::Mlp, a.seed)}),
                         make_selection(a.selection, a.selection == "rfe" ? a.rfe_k : a.ig_k));
  auto& m = plan.manifest;
  if (m.configs.size() != 1) throw Error(Errc::InvalidArgument, "robustness-suite takes exactly one model kind");
  const std::size_t n_max = m.extra.value("n_max", a.n_max);
  const std::string mode_name = m.extra.value("attack_mode", a.attack_mode);
  experiments::AttackMode mode;
  if (mode_name == "both") {
    mode = experiments::AttackMode::Both;
  } else if (mode_name == "test-only") {
    mode = experiments::AttackMode::TestOnly;
  } else {
    throw Error(Errc::InvalidArgument, "unknown attack mode '" + mode_name + "' (expected both or test-only)");
  }
  m.extra["n_max"] = n_max;
  m.extra["attack_mode"] = mode_name;

  const auto selected = experiments::apply_selection(plan.corpus.matrix, m.selection);
  const auto ranking = experiments::top_benign_permissions(selected.matrix);
  const auto rows = experiments::run_robustness(selected.matrix, m.configs[0], n_max, m.folds, m.seed, mode, a.jobs);
  const fs::path out(a.out);
  const json provenance = {{"selection", experiments::selection_to_json(m.selection, selected)},
                           {"attack",
                            {{"top_benign", "descending benign-row frequency, ties by permission name"},
                             {"mode", mode_name},
                             {"ranking_fixed_before_attack", true}}}};
  for (const auto& r : rows) {
    json extra = provenance;
    extra["attack"]["n_injected"] = r.n;
    char stem[16];
    std::snprintf(stem, sizeof stem, "N%02zu", r.n);
    write_report(out, stem, r.report, extra);
  }
  std::ostringstream rank_csv;
  rank_csv << "rank,feature_index,permission\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    rank_csv << i + 1 << ',' << ranking[i] << ',' << selected.matrix.vocabulary().name(ranking[i]) << '\n';
  }
  write_text(out / "benign_ranking.csv", rank_csv.str());
  write_text(out / "summary.csv", experiments::robustness_csv(rows));
  finish_suite(out, plan, "robustness-suite");
  return 0;
}

int run_multiclass_suite(const SuiteArgs& a) {
  auto plan = plan_suite("multiclass", a, resolve_kinds(a.kinds, a.seed, experiments::default_configs(a.seed)),
                         experiments::Selection{});
  auto& m = plan.manifest;
  const auto averaging = parse_averaging(m.extra.value("averaging", a.averaging));
  const auto per_family = m.extra.value("per_family", a.per_family);
  m.extra["averaging"] = m.extra.value("averaging", a.averaging);
  m.extra["per_family"] = per_family;
  const auto full = malware_matrix(plan.corpus);
  const fs::path out(a.out);

  auto run = [&](const dataset::FeatureMatrix& matrix, const fs::path& dir, const json& extra) {
    const auto result = experiments::run_multiclass(matrix, m.configs, m.folds, m.seed, a.jobs, averaging);
    for (const auto& r : result.reports) write_report(dir, r.technique, r.report, extra);
    write_text(dir / "summary.csv", experiments::technique_summary_csv(result.reports));
    write_confusions(dir, result.reports[result.best].report);
    std::map<std::string, std::size_t> sizes;
    for (const auto& f : matrix.families()) ++sizes[*f];
    json info = {{"best", result.reports[result.best].technique}, {"families", sizes}, {"warnings", result.warnings},
                 {"rows", matrix.rows()}, {"vocabulary_size", matrix.cols()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) info[it.key()] = it.value();
    write_text(dir / "run.json", dump(info));
  };
  run(full, out / "all", json::object());
  for (auto n : per_family) {
    dataset::FeatureMatrix subset;
    try {
      subset = experiments::balanced_subsets(full, n, mix_seed(m.seed, n));
    } catch (const Error& e) {
      if (e.code() != Errc::NoQualifyingFamily) throw;
      write_text(out / ("balanced-" + std::to_string(n)) / "run.json",
                 dump({{"per_family", n}, {"skipped", e.what()}}));
      continue;
    }
    run(subset, out / ("balanced-" + std::to_string(n)), {{"per_family", n}});
  }
  finish_suite(out, plan, "multiclass-suite");
  return 0;
}

int run_synth(const SynthArgs& a) {
  json j;
  if (a.spec.empty()) {
    j = synth::default_spec_json();
  } else {
    try {
      j = json::parse(read_file(a.spec));
    } catch (const json::exception& e) {
      throw Error(Errc::SpecInvalid, a.spec + ": " + e.what());
    }
  }
  j["seed"] = a.seed;
  const auto spec = synth::spec_from_json(j);
  const auto samples = synth::generate(spec);
  dataset::save_corpus(samples, a.out);
  if (!a.vocab_out.empty()) dataset::save_vocabulary(synth::vocabulary(spec), a.vocab_out);
  RunSummary summary("synth");
  summary.seed(a.seed);
  summary.input("spec", sha256(j.dump()));
  summary.param("samples", samples.size());
  summary.print();
  return 0;
}

}  // namespace permguard::cli
