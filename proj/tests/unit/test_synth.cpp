#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "permguard/error.hpp"
#include "permguard/eval.hpp"
#include "permguard/featsel.hpp"
#include "permguard/synth.hpp"
#include "test_support.hpp"

using namespace permguard;
using namespace permguard::synth;

namespace {

template <typename F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a permguard::Error");
  return Errc::InvalidArgument;
}

SynthSpec small_spec() {
  SynthSpec s;
  s.benign_count = 40;
  s.vocab_size = 12;
  s.benign_base_rate.assign(12, 0.3);
  s.families = {{"alpha", 20, {0, 1}}, {"beta", 15, {2, 3, 4}}};
  s.noise_flip_prob = 0.05;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("zero base rates and no noise give exactly the planted sets") {
    auto s = small_spec();
    s.benign_base_rate.assign(12, 0.0);
    s.noise_flip_prob = 0.0;
    const auto samples = generate(s);
    REQUIRE(samples.size() == 75);
    for (std::size_t i = 0; i < 40; ++i) {
      CHECK(samples[i].permissions.empty());
      CHECK(samples[i].label == dataset::Label::Benign);
      CHECK_FALSE(samples[i].family);
    }
    CHECK(samples[40].permissions == std::set<std::string>{permission_name(0, 12), permission_name(1, 12)});
    CHECK(samples[40].family == "alpha");
    CHECK(samples[74].permissions.size() == 3);
    CHECK(samples[74].family == "beta");
    CHECK(samples[0].id == "syn-0");
    CHECK(samples[74].id == "syn-74");
  }

  TEST_CASE("names and vocabulary") {
    CHECK(permission_name(7, 230) == "android.permission.SYN_007");
    CHECK(permission_name(7, 5000) == "android.permission.SYN_0007");
    const auto v = vocabulary(small_spec());
    CHECK(v.size() == 12);
    for (std::size_t j = 1; j < v.size(); ++j) CHECK(v.name(j - 1) < v.name(j));
    CHECK(generate_matrix(small_spec()).cols() == 12);
    CHECK(planted_features(small_spec()) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  }

  TEST_CASE("no benign rows") {
    auto s = small_spec();
    s.benign_count = 0;
    const auto samples = generate(s);
    CHECK(samples.size() == 35);
    CHECK(std::all_of(samples.begin(), samples.end(), [](const auto& x) { return x.label == dataset::Label::Malware; }));
  }

  TEST_CASE("same seed gives identical bytes, a new seed does not") {
    const auto a = dataset::serialize_corpus(generate(small_spec()));
    CHECK(dataset::serialize_corpus(generate(small_spec())) == a);
    auto s = small_spec();
    s.seed = 6;
    CHECK(dataset::serialize_corpus(generate(s)) != a);
  }

  TEST_CASE("validation") {
    auto s = small_spec();
    s.vocab_size = 0;
    CHECK(error_of([&] { validate(s); }) == Errc::SpecInvalid);
    s = small_spec();
    s.benign_base_rate.pop_back();
    CHECK(error_of([&] { validate(s); }) == Errc::SpecInvalid);
    s = small_spec();
    s.benign_base_rate[3] = 1.5;
    CHECK(error_of([&] { validate(s); }) == Errc::SpecInvalid);
    s = small_spec();
    s.noise_flip_prob = 0.5;
    CHECK(error_of([&] { validate(s); }) == Errc::SpecInvalid);
    s = small_spec();
    s.families[1].name = "alpha";
    CHECK(error_of([&] { validate(s); }) == Errc::SpecInvalid);
    s = small_spec();
    s.families[0].characteristic_features.push_back(12);
    CHECK(error_of([&] { generate(s); }) == Errc::SpecInvalid);
    auto j = spec_to_json(small_spec());
    j.erase("seed");
    CHECK(error_of([&] { spec_from_json(j); }) == Errc::SpecInvalid);
    j = spec_to_json(small_spec());
    j["benign_base_rate"] = {{"uniform_min", 0.7}, {"uniform_max", 0.2}};
    CHECK(error_of([&] { spec_from_json(j); }) == Errc::SpecInvalid);
  }

  TEST_CASE("json round trip") {
    CHECK(spec_from_json(spec_to_json(small_spec())) == small_spec());
    const auto dir = testsupport::scratch_dir("synth");
    std::ofstream(dir / "s.json") << spec_to_json(small_spec()).dump();
    CHECK(load_spec(dir / "s.json") == small_spec());
    CHECK(error_of([&] { load_spec(dir / "none.json"); }) == Errc::IoFailure);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("checked-in default spec") {
    const auto loaded = load_spec(testsupport::source_dir() / "data" / "synth-default.json");
    const auto s = default_spec();
    CHECK(loaded == s);
    CHECK(s.vocab_size == 230);
    CHECK(s.benign_count == 2657);
    CHECK(planted_features(s).size() == 20);
    std::size_t malware = 0;
    for (const auto& f : s.families) malware += f.size;
    CHECK(malware == 989);
    CHECK(s.noise_flip_prob == 0.05);
    CHECK(s.seed == 42);
    for (double p : s.benign_base_rate) {
      CHECK(p >= 0.05);
      CHECK(p <= 0.6);
    }
  }

  TEST_CASE("benign frequencies track the base rates") {
    const auto s = default_spec();
    const auto m = generate_matrix(s);
    for (std::size_t j = 0; j < s.vocab_size; ++j) {
      std::size_t on = 0;
      for (std::size_t i = 0; i < s.benign_count; ++i) on += m.row(i)[j];
      const double p = s.benign_base_rate[j];
      const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(s.benign_count));
      CHECK(std::fabs(static_cast<double>(on) / static_cast<double>(s.benign_count) - p) <= 4 * sigma);
    }
  }

  TEST_CASE("information gain recovers the planted features") {
    const auto s = default_spec();
    const auto ranked = featsel::rank_by_ig(generate_matrix(s));
    const auto top = ranked.indices();
    std::vector<std::size_t> top30(top.begin(), top.begin() + 30);
    std::sort(top30.begin(), top30.end());
    for (auto p : planted_features(s)) CHECK(std::binary_search(top30.begin(), top30.end(), p));
  }

  TEST_CASE("without noise a decision tree separates the classes") {
    auto s = small_spec();
    for (auto p : planted_features(s)) s.benign_base_rate[p] = 0.0;
    s.noise_flip_prob = 0.0;
    s.benign_count = 60;
    const auto r = eval::cross_validate(models::default_config(models::Kind::DecisionTree), generate_matrix(s),
                                        dataset::Task::Detection, 5, 1);
    CHECK(r.accuracy == 1.0);
  }
}
