#include "permguard/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "permguard/error.hpp"
#include "permguard/rng.hpp"

namespace permguard::synth {

using nlohmann::json;

namespace {

constexpr std::uint64_t kRateStream = 1;
constexpr std::uint64_t kSampleStream = 2;

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::SpecInvalid, what); }

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.vocab_size == 0) invalid("vocab_size must be positive");
  if (spec.benign_base_rate.size() != spec.vocab_size) {
    invalid("benign_base_rate has " + std::to_string(spec.benign_base_rate.size()) + " entries, expected " +
            std::to_string(spec.vocab_size));
  }
  for (double p : spec.benign_base_rate) {
    if (!(p >= 0.0 && p <= 1.0)) invalid("base rates must lie in [0, 1]");
  }
  if (!(spec.noise_flip_prob >= 0.0 && spec.noise_flip_prob < 0.5)) invalid("noise_flip_prob must lie in [0, 0.5)");
  std::set<std::string> names;
  for (const auto& f : spec.families) {
    if (f.name.empty()) invalid("family names must be non-empty");
    if (!names.insert(f.name).second) invalid("duplicate family name " + f.name);
    for (auto j : f.characteristic_features) {
      if (j >= spec.vocab_size) invalid("family " + f.name + " plants feature " + std::to_string(j) + " outside the vocabulary");
    }
  }
}

std::string permission_name(std::size_t feature, std::size_t vocab_size) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(vocab_size == 0 ? 0 : vocab_size - 1).size());
  std::string digits = std::to_string(feature);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "android.permission.SYN_" + digits;
}

dataset::PermissionVocabulary vocabulary(const SynthSpec& spec) {
  std::vector<std::string> names;
  names.reserve(spec.vocab_size);
  for (std::size_t j = 0; j < spec.vocab_size; ++j) names.push_back(permission_name(j, spec.vocab_size));
  return dataset::PermissionVocabulary(std::move(names));
}

std::vector<dataset::Sample> generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(mix_seed(spec.seed, kSampleStream));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < spec.vocab_size; ++j) names.push_back(permission_name(j, spec.vocab_size));

  std::vector<dataset::Sample> out;
  std::vector<std::uint8_t> bits(spec.vocab_size);
  auto background = [&] {
    for (std::size_t j = 0; j < spec.vocab_size; ++j) bits[j] = rng.bernoulli(spec.benign_base_rate[j]) ? 1 : 0;
  };
  auto emit = [&](dataset::Label label, std::optional<std::string> family) {
    dataset::Sample s;
    s.id = "syn-" + std::to_string(out.size());
    for (std::size_t j = 0; j < spec.vocab_size; ++j) {
      if (bits[j]) s.permissions.insert(names[j]);
    }
    s.label = label;
    s.family = std::move(family);
    out.push_back(std::move(s));
  };

  for (std::size_t i = 0; i < spec.benign_count; ++i) {
    background();
    emit(dataset::Label::Benign, std::nullopt);
  }
  for (const auto& fam : spec.families) {
    for (std::size_t i = 0; i < fam.size; ++i) {
      background();
      for (auto j : fam.characteristic_features) bits[j] = 1;
      for (std::size_t j = 0; j < spec.vocab_size; ++j) {
        if (rng.bernoulli(spec.noise_flip_prob)) bits[j] ^= 1;
      }
      emit(dataset::Label::Malware, fam.name);
    }
  }
  return out;
}

dataset::FeatureMatrix generate_matrix(const SynthSpec& spec) {
  const auto samples = generate(spec);
  return dataset::vectorize_all(samples, vocabulary(spec)).matrix;
}

std::vector<std::size_t> planted_features(const SynthSpec& spec) {
  std::set<std::size_t> all;
  for (const auto& f : spec.families) all.insert(f.characteristic_features.begin(), f.characteristic_features.end());
  return {all.begin(), all.end()};
}

SynthSpec spec_from_json(const json& j) {
  try {
    SynthSpec spec;
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.vocab_size = j.at("vocab_size").get<std::size_t>();
    spec.benign_count = j.at("benign_count").get<std::size_t>();
    spec.noise_flip_prob = j.at("noise_flip_prob").get<double>();
    const auto& rates = j.at("benign_base_rate");
    if (rates.is_array()) {
      spec.benign_base_rate = rates.get<std::vector<double>>();
    } else if (rates.is_object()) {
      const double lo = rates.at("uniform_min").get<double>();
      const double hi = rates.at("uniform_max").get<double>();
      if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) invalid("uniform base-rate bounds must satisfy 0 <= min <= max <= 1");
      Rng rng(mix_seed(spec.seed, kRateStream));
      for (std::size_t f = 0; f < spec.vocab_size; ++f) spec.benign_base_rate.push_back(rng.uniform(lo, hi));
    } else {
      invalid("benign_base_rate must be a list or a uniform range");
    }
    for (const auto& fj : j.at("families")) {
      FamilySpec f;
      f.name = fj.at("name").get<std::string>();
      f.size = fj.at("size").get<std::size_t>();
      f.characteristic_features = fj.at("characteristic_features").get<std::vector<std::size_t>>();
      spec.families.push_back(std::move(f));
    }
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    invalid(std::string("malformed synth spec: ") + e.what());
  }
}

json spec_to_json(const SynthSpec& spec) {
  json fams = json::array();
  for (const auto& f : spec.families) {
    fams.push_back({{"name", f.name}, {"size", f.size}, {"characteristic_features", f.characteristic_features}});
  }
  return {{"seed", spec.seed},
          {"vocab_size", spec.vocab_size},
          {"benign_count", spec.benign_count},
          {"noise_flip_prob", spec.noise_flip_prob},
          {"benign_base_rate", spec.benign_base_rate},
          {"families", fams}};
}

SynthSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    invalid(path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

json default_spec_json() {
  // 20 planted features spread over the vocabulary at stride 11
  auto planted = [](std::size_t first, std::size_t count) {
    std::vector<std::size_t> v;
    for (std::size_t i = first; i < first + count; ++i) v.push_back(5 + 11 * i);
    return v;
  };
  return {{"seed", 42},
          {"vocab_size", 230},
          {"benign_count", 2657},
          {"noise_flip_prob", 0.05},
          {"benign_base_rate", {{"uniform_min", 0.05}, {"uniform_max", 0.6}}},
          {"families",
           {{{"name", "family-a"}, {"size", 400}, {"characteristic_features", planted(0, 7)}},
            {{"name", "family-b"}, {"size", 330}, {"characteristic_features", planted(7, 7)}},
            {{"name", "family-c"}, {"size", 259}, {"characteristic_features", planted(14, 6)}}}}};
}

SynthSpec default_spec() { return spec_from_json(default_spec_json()); }

}  // namespace permguard::synth
