#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "permguard/synth.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + PERMGUARD_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// A small corpus on disk, returned as its path.
fs::path small_corpus(const fs::path& dir) {
  permguard::synth::SynthSpec s;
  s.benign_count = 60;
  s.vocab_size = 15;
  s.benign_base_rate.assign(15, 0.2);
  s.families = {{"alpha", 30, {0, 1, 2}}, {"beta", 30, {3, 4}}};
  s.noise_flip_prob = 0.02;
  s.seed = 3;
  const auto path = dir / "corpus.jsonl";
  permguard::dataset::save_corpus(permguard::synth::generate(s), path);
  return path;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    const auto dir = testsupport::scratch_dir("cli-usage");
    CHECK(cli("--help", dir).status == 0);
    CHECK(cli("", dir).status == 1);
    CHECK(cli("frobnicate", dir).status == 1);
    CHECK(cli("evaluate --seed 1 --out x", dir).status == 1);
    CHECK(cli("rank --method pca --corpus c --out r.csv", dir).status == 1);
    const auto corpus = small_corpus(dir);
    const auto r = cli("evaluate --corpus \"" + corpus.string() + "\" --kind NoSuchKind --seed 1 --out \"" +
                           (dir / "e").string() + "\"",
                       dir);
    CHECK(r.status == 1);
    CHECK(r.err.find("NoSuchKind") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("a missing corpus is a data error naming the path") {
    const auto dir = testsupport::scratch_dir("cli-missing");
    const auto r = cli("evaluate --corpus missing.jsonl --kind DecisionTree --seed 1 --out \"" + (dir / "e").string() + "\"", dir);
    CHECK(r.status == 2);
    CHECK(r.err.find("missing.jsonl") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("extract reads the fixture apk") {
    const auto dir = testsupport::scratch_dir("cli-extract");
    const auto r = cli("extract \"" + testsupport::fixture("two_permissions.apk").string() + "\"", dir);
    CHECK(r.status == 0);
    REQUIRE(lines(r.out) == 1);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("permissions").size() == 2);
    const auto bad = cli("extract \"" + testsupport::fixture("malformed_header.axml").string() + "\"", dir);
    CHECK(bad.status == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("rank keeps the requested number of rows") {
    const auto dir = testsupport::scratch_dir("cli-rank");
    const auto csv = dir / "ig.csv";
    const auto r = cli("rank --method ig --corpus synthetic-default --top 74 --out \"" + csv.string() + "\"", dir);
    CHECK(r.status == 0);
    const auto text = slurp(csv);
    CHECK(lines(text) == 75);
    CHECK(text.rfind("rank,feature_index,permission,score\n1,", 0) == 0);
    fs::remove_all(dir);
  }

  TEST_CASE("train and evaluate write their outputs") {
    const auto dir = testsupport::scratch_dir("cli-eval");
    const auto corpus = small_corpus(dir);
    const auto e = cli("evaluate --corpus \"" + corpus.string() + "\" --kind NaiveBayesMultinomial --seed 4 --selection ig --k 5 --out \"" +
                           (dir / "e").string() + "\"",
                       dir);
    CHECK(e.status == 0);
    for (const char* f : {"report.json", "roc.csv", "confusion.csv", "confusion_pct.csv", "ranking.csv"}) {
      CAPTURE(f);
      CHECK(fs::exists(dir / "e" / f));
    }
    const auto report = nlohmann::json::parse(slurp(dir / "e" / "report.json"));
    CHECK(report.at("seed") == 4);
    CHECK(report.at("rows").size() == 120);

    const auto t = cli("train --corpus \"" + corpus.string() + "\" --kind DecisionTree --seed 4 --out \"" +
                           (dir / "m.json").string() + "\"",
                       dir);
    CHECK(t.status == 0);
    CHECK(fs::exists(dir / "m.json"));

    const auto family = cli("evaluate --corpus \"" + corpus.string() +
                                "\" --kind DecisionTree --task family --seed 4 --out \"" + (dir / "f").string() + "\"",
                            dir);
    CHECK(family.status == 0);
    const auto fr = nlohmann::json::parse(slurp(dir / "f" / "report.json"));
    CHECK(fr.at("class_names") == nlohmann::json::array({"alpha", "beta"}));
    fs::remove_all(dir);
  }

  TEST_CASE("synth output matches the library") {
    const auto dir = testsupport::scratch_dir("cli-synth");
    const auto r = cli("synth --seed 42 --out \"" + (dir / "c.jsonl").string() + "\"", dir);
    CHECK(r.status == 0);
    CHECK(slurp(dir / "c.jsonl") == permguard::dataset::serialize_corpus(permguard::synth::generate(permguard::synth::default_spec())));
    fs::remove_all(dir);
  }
}
