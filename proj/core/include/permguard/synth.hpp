#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "permguard/dataset.hpp"

namespace permguard::synth {

struct FamilySpec {
  std::string name;
  std::size_t size = 0;
  std::vector<std::size_t> characteristic_features;

  bool operator==(const FamilySpec&) const = default;
};

struct SynthSpec {
  std::size_t benign_count = 0;
  std::vector<FamilySpec> families;
  std::size_t vocab_size = 0;
  std::vector<double> benign_base_rate;  // one probability per feature
  double noise_flip_prob = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const SynthSpec&) const = default;
};

/// Throws SpecInvalid.
void validate(const SynthSpec& spec);

/// Benign rows draw each feature from its base rate. A malware row of family F
/// draws the same background, forces F's characteristic features on, then
/// flips every feature with noise_flip_prob. Benign samples come first; ids
/// are `syn-<ordinal>`.
std::vector<dataset::Sample> generate(const SynthSpec& spec);

/// `android.permission.SYN_<j>`, zero-padded so name order equals index order.
std::string permission_name(std::size_t feature, std::size_t vocab_size);

/// Every feature name of the spec, whether or not any sample requests it.
dataset::PermissionVocabulary vocabulary(const SynthSpec& spec);

/// Generated samples vectorized against vocabulary(spec).
dataset::FeatureMatrix generate_matrix(const SynthSpec& spec);

/// Sorted union of the families' characteristic features.
std::vector<std::size_t> planted_features(const SynthSpec& spec);

/// `benign_base_rate` may be an explicit list or {"uniform_min", "uniform_max"},
/// in which case rates are drawn once from the spec seed.
SynthSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SynthSpec& spec);
SynthSpec load_spec(const std::filesystem::path& path);

/// The acceptance corpus: 230 features, 20 planted across three families
/// (400/330/259 rows), 2657 benign, base rates in [0.05, 0.6], flip 0.05, seed 42.
nlohmann::json default_spec_json();
SynthSpec default_spec();

}  // namespace permguard::synth
