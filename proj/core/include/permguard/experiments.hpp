#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "permguard/dataset.hpp"
#include "permguard/eval.hpp"
#include "permguard/featsel.hpp"
#include "permguard/models.hpp"

namespace permguard::experiments {

// --- feature selection ----------------------------------------------------------

enum class SelectionMethod { None, InfoGain, Rfe, Custom };

struct Selection {
  SelectionMethod method = SelectionMethod::None;
  std::size_t k = 0;                            // ignored for None
  std::vector<std::size_t> custom_features;     // Custom only, in order
  featsel::SvmConfig svm;                       // Rfe only

  static Selection ig(std::size_t k = 74) { return {SelectionMethod::InfoGain, k, {}, {}}; }
  static Selection rfe(std::size_t k = 82) { return {SelectionMethod::Rfe, k, {}, {}}; }
};

std::string to_string(SelectionMethod method);
SelectionMethod selection_from_string(const std::string& name);

struct Selected {
  dataset::FeatureMatrix matrix;
  std::vector<std::size_t> features;  // source column of each selected column
  std::optional<featsel::RankedFeatures> ranking;
};

/// Ranks on the whole matrix (before any fold split) and keeps the top k.
Selected apply_selection(const dataset::FeatureMatrix& matrix, const Selection& selection);

nlohmann::json selection_to_json(const Selection& selection, const Selected& selected);

// --- detection ------------------------------------------------------------------

struct TechniqueReport {
  std::string technique;
  eval::EvalReport report;
};

struct DetectionRun {
  Selection selection;
  std::vector<std::size_t> features;
  std::vector<TechniqueReport> reports;
};

DetectionRun run_detection(const dataset::FeatureMatrix& matrix, const std::vector<models::ModelConfig>& configs,
                           const Selection& selection, std::size_t k, std::uint64_t seed, std::size_t jobs = 1);

/// All eight kinds with their default hyperparameters.
std::vector<models::ModelConfig> default_configs(std::uint64_t seed);

// --- robustness -----------------------------------------------------------------

/// Features by descending frequency among benign rows; ties by permission name.
/// Throws NoBenignRows.
std::vector<std::size_t> top_benign_permissions(const dataset::FeatureMatrix& matrix);

struct AttackSpec {
  std::size_t n_injected = 0;
  std::vector<std::size_t> benign_ranking;
};

/// Sets the first n_injected ranked features on every malware row. Throws NTooLarge.
dataset::FeatureMatrix attack_augment(const dataset::FeatureMatrix& matrix, const AttackSpec& spec);

enum class AttackMode {
  Both,      // attack applied before folds are drawn
  TestOnly,  // models train on clean rows, score attacked rows
};

struct RobustnessRow {
  std::size_t n = 0;
  eval::EvalReport report;
};

/// N = 0..n_max; the benign ranking is taken from the unattacked matrix.
std::vector<RobustnessRow> run_robustness(const dataset::FeatureMatrix& matrix, const models::ModelConfig& config,
                                          std::size_t n_max, std::size_t k, std::uint64_t seed,
                                          AttackMode mode = AttackMode::Both, std::size_t jobs = 1);

// --- imbalance ------------------------------------------------------------------

struct ImbalanceSpec {
  std::size_t malware_count = 0;
  std::size_t benign_count = 0;
  std::uint64_t seed = 0;
};

/// The nine cells 1:3 x 4, 1:6 x 3, 1:12 x 2; cell i draws with mix_seed(seed, i).
std::vector<ImbalanceSpec> default_imbalance_specs(std::uint64_t seed);

/// Seeded draw without replacement; rows keep their source order. Throws InsufficientSamples.
dataset::FeatureMatrix subsample(const dataset::FeatureMatrix& matrix, const ImbalanceSpec& spec);

struct ImbalanceRow {
  ImbalanceSpec spec;
  eval::EvalReport report;
};

std::vector<ImbalanceRow> run_imbalance(const dataset::FeatureMatrix& matrix, const models::ModelConfig& config,
                                        const std::vector<ImbalanceSpec>& specs, std::size_t k, std::uint64_t seed,
                                        std::size_t jobs = 1);

// --- multiclass -----------------------------------------------------------------

/// Malware rows only, with a vocabulary rebuilt from the permissions they request.
std::vector<dataset::Sample> malware_only(std::span<const dataset::Sample> samples);

struct MulticlassRun {
  std::vector<TechniqueReport> reports;
  std::size_t best = 0;  // highest pooled precision; first wins ties
  std::vector<std::string> warnings;
};

MulticlassRun run_multiclass(const dataset::FeatureMatrix& malware_matrix, const std::vector<models::ModelConfig>& configs,
                             std::size_t k, std::uint64_t seed, std::size_t jobs = 1,
                             eval::Averaging averaging = eval::Averaging::Weighted);

/// Families with at least per_family rows, per_family of each drawn with the
/// seeded generator. Throws NoQualifyingFamily.
dataset::FeatureMatrix balanced_subsets(const dataset::FeatureMatrix& malware_matrix, std::size_t per_family,
                                        std::uint64_t seed);

// --- files ----------------------------------------------------------------------

/// `technique,precision_train,precision_test,auc_train,auc_test`
std::string technique_summary_csv(const std::vector<TechniqueReport>& reports);
/// `N,precision,auc`
std::string robustness_csv(const std::vector<RobustnessRow>& rows);
/// `malware,benign,precision_train,precision_test,auc_train,auc_test`
std::string imbalance_csv(const std::vector<ImbalanceRow>& rows);

/// Declarative run description.
struct ExperimentManifest {
  std::string suite;
  std::string corpus;
  Selection selection;
  std::vector<models::ModelConfig> configs;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::string output;
  nlohmann::json extra = nlohmann::json::object();  // suite-specific knobs
};

nlohmann::json manifest_to_json(const ExperimentManifest& m);
ExperimentManifest manifest_from_json(const nlohmann::json& j);
ExperimentManifest load_manifest(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories. Throws IoFailure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace permguard::experiments
