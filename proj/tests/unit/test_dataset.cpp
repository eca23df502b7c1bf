#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "permguard/dataset.hpp"
#include "permguard/error.hpp"
#include "test_support.hpp"

using namespace permguard;
using namespace permguard::dataset;

namespace {

Sample sample(std::string id, std::set<std::string> perms, int label, std::optional<std::string> family = {}) {
  return {std::move(id), std::move(perms), label > 0 ? Label::Malware : Label::Benign, std::move(family)};
}

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

std::vector<Sample> random_samples(std::mt19937_64& gen, std::size_t n) {
  std::uniform_int_distribution<int> perm(0, 25), count(0, 6), coin(0, 1);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::string> perms;
    for (int k = count(gen); k > 0; --k) perms.insert("P" + std::string(1, static_cast<char>('A' + perm(gen))));
    const bool malware = coin(gen) == 1;
    out.push_back(sample("s" + std::to_string(i), perms, malware ? 1 : -1,
                         malware ? std::optional<std::string>("fam" + std::to_string(i % 3)) : std::nullopt));
  }
  return out;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("vocabulary is the sorted union") {
    const std::vector<Sample> s{sample("1", {"B", "A"}, 1), sample("2", {"C", "B"}, -1)};
    CHECK(build_vocabulary(s).names() == std::vector<std::string>{"A", "B", "C"});
  }

  TEST_CASE("one sample with no permissions gives an empty vocabulary") {
    const std::vector<Sample> s{sample("1", {}, -1)};
    const auto vocab = build_vocabulary(s);
    CHECK(vocab.size() == 0);
    const auto m = to_matrix(s);
    CHECK(m.rows() == 1);
    CHECK(m.cols() == 0);
    CHECK(m.row(0).empty());
  }

  TEST_CASE("zero samples is an empty corpus") {
    CHECK(error_of([] { build_vocabulary({}); }) == Errc::EmptyCorpus);
  }

  TEST_CASE("index_of inverts positional lookup") {
    const PermissionVocabulary v({"a", "b", "c"});
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.index_of(v.name(i)) == i);
    CHECK_FALSE(v.index_of("z").has_value());
    CHECK(error_of([] { PermissionVocabulary({"a", "a"}); }) == Errc::SchemaViolation);
  }

  TEST_CASE("vectorize") {
    const PermissionVocabulary v({"A", "B", "C"});
    std::size_t unknown = 0;
    CHECK(vectorize(sample("x", {"B"}, -1), v, &unknown) == std::vector<std::uint8_t>{0, 1, 0});
    CHECK(unknown == 0);
    CHECK(vectorize(sample("x", {"D"}, -1), v, &unknown) == std::vector<std::uint8_t>{0, 0, 0});
    CHECK(unknown == 1);
    CHECK(vectorize(sample("x", {"A", "B", "C"}, -1), v) == std::vector<std::uint8_t>{1, 1, 1});
  }

  TEST_CASE("vectorize_all counts unknown permissions") {
    const std::vector<Sample> s{sample("1", {"A", "Q"}, 1), sample("2", {"R", "S"}, -1)};
    const auto out = vectorize_all(s, PermissionVocabulary({"A"}));
    CHECK(out.unknown_permissions == 3);
    CHECK(out.matrix.rows() == 2);
  }

  TEST_CASE("corpus files") {
    const auto dir = testsupport::scratch_dir("corpus");
    SUBCASE("empty list round-trips to an empty file") {
      save_corpus({}, dir / "empty.jsonl");
      CHECK(std::filesystem::file_size(dir / "empty.jsonl") == 0);
      CHECK(load_corpus(dir / "empty.jsonl").empty());
    }
    SUBCASE("label 0 is a schema violation") {
      std::ofstream(dir / "bad.jsonl") << R"({"id":"a","label":0,"permissions":[]})" << '\n';
      CHECK(error_of([&] { load_corpus(dir / "bad.jsonl"); }) == Errc::SchemaViolation);
    }
    SUBCASE("three mixed records are byte-stable and reload equal") {
      const std::vector<Sample> s{sample("m1", {"android.permission.SEND_SMS", "android.permission.INTERNET"}, 1, "droidkungfu"),
                                  sample("b1", {}, -1), sample("b2", {"android.permission.INTERNET"}, -1)};
      save_corpus(s, dir / "c.jsonl");
      std::ifstream in(dir / "c.jsonl", std::ios::binary);
      std::stringstream text;
      text << in.rdbuf();
      CHECK(text.str() ==
            "{\"family\":\"droidkungfu\",\"id\":\"m1\",\"label\":1,\"permissions\":[\"android.permission.INTERNET\","
            "\"android.permission.SEND_SMS\"]}\n"
            "{\"id\":\"b1\",\"label\":-1,\"permissions\":[]}\n"
            "{\"id\":\"b2\",\"label\":-1,\"permissions\":[\"android.permission.INTERNET\"]}\n");
      CHECK(load_corpus(dir / "c.jsonl") == s);
      save_corpus(load_corpus(dir / "c.jsonl"), dir / "c2.jsonl");
      CHECK(std::filesystem::file_size(dir / "c2.jsonl") == std::filesystem::file_size(dir / "c.jsonl"));
    }
    SUBCASE("family on a benign sample") {
      std::ofstream(dir / "fam.jsonl") << R"({"id":"a","label":-1,"family":"x","permissions":[]})" << '\n';
      CHECK(error_of([&] { load_corpus(dir / "fam.jsonl"); }) == Errc::SchemaViolation);
      const std::vector<Sample> bad{sample("a", {}, -1, "x")};
      CHECK(error_of([&] { save_corpus(bad, dir / "x.jsonl"); }) == Errc::SchemaViolation);
    }
    SUBCASE("missing field") {
      std::ofstream(dir / "mf.jsonl") << R"({"id":"a","label":1})" << '\n';
      CHECK(error_of([&] { load_corpus(dir / "mf.jsonl"); }) == Errc::SchemaViolation);
    }
    SUBCASE("duplicate id") {
      std::ofstream(dir / "dup.jsonl") << R"({"id":"a","label":1,"permissions":[]})" << '\n'
                                       << R"({"id":"a","label":-1,"permissions":[]})" << '\n';
      CHECK(error_of([&] { load_corpus(dir / "dup.jsonl"); }) == Errc::DuplicateId);
    }
    SUBCASE("missing file") {
      CHECK(error_of([&] { load_corpus(dir / "nope.jsonl"); }) == Errc::IoFailure);
    }
    SUBCASE("vocabulary file") {
      const PermissionVocabulary v({"a.A", "b.B"});
      save_vocabulary(v, dir / "v.txt");
      CHECK(load_vocabulary(dir / "v.txt") == v);
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("random corpora round-trip through text") {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 50; ++t) {
      const auto s = random_samples(gen, 1 + t % 17);
      CHECK(parse_corpus(serialize_corpus(s)) == s);
    }
  }

  TEST_CASE("vectorization is monotone under permission supersets") {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 100; ++t) {
      const auto s = random_samples(gen, 8);
      const auto vocab = build_vocabulary(s);
      auto bigger = s[0];
      bigger.permissions.insert(s[1].permissions.begin(), s[1].permissions.end());
      const auto a = vectorize(s[0], vocab), b = vectorize(bigger, vocab);
      for (std::size_t j = 0; j < a.size(); ++j) CHECK(b[j] >= a[j]);
    }
  }

  TEST_CASE("vocabulary ignores sample order") {
    std::mt19937_64 gen(9);
    for (int t = 0; t < 50; ++t) {
      auto s = random_samples(gen, 12);
      const auto v = build_vocabulary(s);
      std::shuffle(s.begin(), s.end(), gen);
      CHECK(build_vocabulary(s) == v);
    }
  }

  TEST_CASE("malware-only vocabulary is a subset of the full one") {
    std::mt19937_64 gen(13);
    for (int t = 0; t < 50; ++t) {
      const auto s = random_samples(gen, 15);
      std::vector<Sample> malware;
      std::copy_if(s.begin(), s.end(), std::back_inserter(malware), [](const Sample& x) { return x.label == Label::Malware; });
      if (malware.empty()) continue;
      const auto full = build_vocabulary(s).names();
      const auto sub = build_vocabulary(malware);
      for (const auto& name : sub.names()) {
        CHECK(std::binary_search(full.begin(), full.end(), name));
      }
    }
  }

  TEST_CASE("matrix views") {
    const auto m = testsupport::make_matrix({{1, 0, 1}, {0, 1, 1}}, {1, -1}, {std::string("f"), std::nullopt});
    CHECK(m.class_names(Task::Detection) == std::vector<std::string>{"-1", "+1"});
    CHECK(m.class_indices(Task::Detection) == std::vector<int>{1, 0});
    const std::vector<std::size_t> cols{2, 0};
    const auto t = m.take_cols(cols);
    CHECK(t.vocabulary().names() == std::vector<std::string>{"p.002", "p.000"});
    CHECK(t.at(1, 0) == 1);
    CHECK(t.at(1, 1) == 0);
    const std::vector<std::size_t> bad{3};
    CHECK(error_of([&] { m.take_cols(bad); }) == Errc::FeatureIndexOutOfRange);
    const std::vector<std::size_t> rows{1, 1};
    CHECK(m.take_rows(rows).ids() == std::vector<std::string>{"r1", "r1"});
    CHECK(error_of([&] { m.class_indices(Task::Family); }) == Errc::SchemaViolation);
  }
}
