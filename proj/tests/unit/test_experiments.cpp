#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "permguard/error.hpp"
#include "permguard/experiments.hpp"
#include "permguard/rng.hpp"
#include "test_support.hpp"

using namespace permguard;
using namespace permguard::experiments;
using testsupport::make_matrix;

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

// Malware rows with one family per entry of `sizes`; family i owns feature i
// exclusively, other cells are random.
dataset::FeatureMatrix family_matrix(const std::vector<std::size_t>& sizes, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution noise(0.3);
  std::vector<std::vector<int>> rows;
  std::vector<int> labels;
  std::vector<std::optional<std::string>> families;
  for (std::size_t f = 0; f < sizes.size(); ++f) {
    for (std::size_t i = 0; i < sizes[f]; ++i) {
      std::vector<int> row(d);
      for (std::size_t j = sizes.size(); j < d; ++j) row[j] = noise(gen) ? 1 : 0;
      row[f] = 1;
      rows.push_back(row);
      labels.push_back(1);
      families.push_back("fam" + std::to_string(f));
    }
  }
  return make_matrix(rows, labels, families);
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("benign frequency ranking") {
    // benign frequencies: f0 = 1, f1 = 3, f2 = 3, f3 = 0; malware rows do not count
    const auto m = make_matrix({{1, 1, 1, 0}, {0, 1, 1, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}, {1, 0, 0, 1}},
                               {-1, -1, -1, 1, 1});
    CHECK(top_benign_permissions(m) == std::vector<std::size_t>{1, 2, 0, 3});
    const auto malware = make_matrix({{1, 0}, {0, 1}}, {1, 1});
    CHECK(error_of([&] { top_benign_permissions(malware); }) == Errc::NoBenignRows);
  }

  TEST_CASE("attack augmentation") {
    const auto m = make_matrix({{0, 0, 0}, {0, 0, 1}, {1, 0, 0}}, {-1, 1, 1});
    const auto a = attack_augment(m, {2, {1, 2, 0}});
    CHECK(std::vector<std::uint8_t>(a.row(0).begin(), a.row(0).end()) == std::vector<std::uint8_t>{0, 0, 0});
    CHECK(std::vector<std::uint8_t>(a.row(1).begin(), a.row(1).end()) == std::vector<std::uint8_t>{0, 1, 1});
    CHECK(std::vector<std::uint8_t>(a.row(2).begin(), a.row(2).end()) == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(a.ids() == m.ids());
    CHECK(a.labels() == m.labels());
    CHECK(attack_augment(m, {0, {1, 2, 0}}).cells().size() == m.cells().size());
    CHECK(std::equal(m.cells().begin(), m.cells().end(), attack_augment(m, {0, {1, 2, 0}}).cells().begin()));
    CHECK(error_of([&] { attack_augment(m, {4, {1, 2, 0}}); }) == Errc::NTooLarge);
  }

  TEST_CASE("attack augmentation is monotone in N and leaves benign rows alone") {
    std::mt19937_64 gen(1);
    for (int t = 0; t < 50; ++t) {
      const auto m = testsupport::random_matrix(gen, 30, 12);
      const auto ranking = top_benign_permissions(m);
      auto previous = attack_augment(m, {0, ranking});
      for (std::size_t n = 1; n <= 12; ++n) {
        const auto next = attack_augment(m, {n, ranking});
        for (std::size_t i = 0; i < m.rows(); ++i) {
          for (std::size_t j = 0; j < m.cols(); ++j) {
            CHECK(next.row(i)[j] >= previous.row(i)[j]);
            if (m.labels()[i] == dataset::Label::Benign) CHECK(next.row(i)[j] == m.row(i)[j]);
          }
        }
        previous = next;
      }
    }
  }

  TEST_CASE("subsample draws exact counts") {
    std::mt19937_64 gen(2);
    const auto m = testsupport::random_matrix(gen, 200, 5);
    const auto malware_total = static_cast<std::size_t>(std::count(m.labels().begin(), m.labels().end(), dataset::Label::Malware));
    const auto sub = subsample(m, {20, 60, 9});
    CHECK(sub.rows() == 80);
    CHECK(std::count(sub.labels().begin(), sub.labels().end(), dataset::Label::Malware) == 20);
    std::set<std::string> ids(m.ids().begin(), m.ids().end());
    for (const auto& id : sub.ids()) CHECK(ids.count(id) == 1);
    CHECK(std::is_sorted(sub.ids().begin(), sub.ids().end(), [&](const std::string& a, const std::string& b) {
      return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
    }));
    CHECK(subsample(m, {20, 60, 9}).ids() == sub.ids());
    CHECK(error_of([&] { subsample(m, {malware_total + 1, 1, 9}); }) == Errc::InsufficientSamples);
    CHECK(default_imbalance_specs(3).size() == 9);
    CHECK(default_imbalance_specs(3)[0].seed == mix_seed(3, 0));
  }

  TEST_CASE("balanced subsets keep qualifying families only") {
    const auto m = family_matrix({60, 50, 40, 10, 5}, 8, 3);
    const auto b = balanced_subsets(m, 40, 7);
    CHECK(b.rows() == 120);
    std::map<std::string, int> counts;
    for (const auto& f : b.families()) ++counts[*f];
    CHECK(counts == std::map<std::string, int>{{"fam0", 40}, {"fam1", 40}, {"fam2", 40}});
    CHECK(balanced_subsets(m, 40, 7).ids() == b.ids());
    CHECK(error_of([&] { balanced_subsets(m, 61, 7); }) == Errc::NoQualifyingFamily);
  }

  TEST_CASE("robustness at N = 0 is plain cross-validation") {
    std::mt19937_64 gen(4);
    const auto m = testsupport::random_matrix(gen, 60, 6);
    const auto config = models::default_config(models::Kind::NaiveBayesMultinomial);
    const auto rows = run_robustness(m, config, 6, 5, 21);
    CHECK(rows.size() == 7);
    const auto plain = eval::cross_validate(config, m, dataset::Task::Detection, 5, 21);
    CHECK(rows[0].n == 0);
    CHECK(eval::report_to_json(rows[0].report).dump() == eval::report_to_json(plain).dump());
    const auto test_only = run_robustness(m, config, 2, 5, 21, AttackMode::TestOnly);
    CHECK(eval::report_to_json(test_only[0].report).dump() == eval::report_to_json(plain).dump());
    CHECK(robustness_csv(rows).rfind("N,precision,auc\n0,", 0) == 0);
  }

  TEST_CASE("multiclass warns about tiny families") {
    auto m = family_matrix({30, 30, 1}, 6, 5);
    const auto run = run_multiclass(m, {models::default_config(models::Kind::NaiveBayesMultinomial)}, 5, 1);
    CHECK(run.warnings.size() == 1);
    CHECK(run.warnings[0].find("fam2") != std::string::npos);
  }

  TEST_CASE("multiclass on disjoint families is perfect") {
    const auto m = family_matrix({50, 50, 50}, 9, 6);
    const auto run = run_multiclass(m,
                                    {models::default_config(models::Kind::DecisionTree),
                                     models::default_config(models::Kind::NaiveBayesMultinomial)},
                                    5, 2);
    for (const auto& t : run.reports) {
      CAPTURE(t.technique);
      CHECK(t.report.precision == 1.0);
      CHECK(t.report.auc == 1.0);
    }
    CHECK(run.best == 0);
  }

  TEST_CASE("detection on a separable corpus") {
    std::mt19937_64 gen(7);
    std::bernoulli_distribution noise(0.5);
    std::vector<std::vector<int>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
      std::vector<int> row(6);
      for (auto& v : row) v = noise(gen) ? 1 : 0;
      row[3] = i % 2;
      rows.push_back(row);
      labels.push_back(i % 2 ? 1 : -1);
    }
    const auto m = make_matrix(rows, labels);
    const auto run = run_detection(m,
                                   {models::default_config(models::Kind::DecisionTree),
                                    models::default_config(models::Kind::RandomForest)},
                                   Selection::ig(2), 5, 3);
    CHECK(run.features.size() == 2);
    CHECK(run.features[0] == 3);
    for (const auto& t : run.reports) {
      CHECK(t.report.precision == 1.0);
      CHECK(t.report.auc == 1.0);
    }
    const auto csv = technique_summary_csv(run.reports);
    CHECK(csv.rfind("technique,precision_train,precision_test,auc_train,auc_test\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  }

  TEST_CASE("selections") {
    std::mt19937_64 gen(8);
    const auto m = testsupport::random_matrix(gen, 40, 10);
    const auto none = apply_selection(m, {});
    CHECK(none.features.size() == 10);
    CHECK_FALSE(none.ranking);
    Selection custom{SelectionMethod::Custom, 0, {4, 1}, {}};
    const auto c = apply_selection(m, custom);
    CHECK(c.features == std::vector<std::size_t>{4, 1});
    CHECK(c.matrix.vocabulary().name(0) == testsupport::feature_name(4));
    const auto ig = apply_selection(m, Selection::ig(3));
    const auto order = ig.ranking->indices();
    CHECK(ig.features == std::vector<std::size_t>(order.begin(), order.begin() + 3));
    CHECK(selection_from_string(to_string(SelectionMethod::Rfe)) == SelectionMethod::Rfe);
    CHECK(error_of([] { selection_from_string("pca"); }) == Errc::InvalidArgument);
    CHECK(error_of([&] { apply_selection(m, Selection::ig(11)); }) == Errc::KTooLarge);
  }

  TEST_CASE("manifest round trip") {
    ExperimentManifest mf;
    mf.suite = "robustness";
    mf.corpus = "data/x.jsonl";
    mf.selection = Selection::rfe(12);
    mf.selection.svm.cost = 0.5;
    mf.configs = default_configs(9);
    mf.configs[2].tree_count = 17;
    mf.seed = 9;
    mf.folds = 4;
    mf.output = "out/";
    mf.extra = {{"n_max", 30}};
    const auto j = manifest_to_json(mf);
    const auto back = manifest_from_json(j);
    CHECK(back.suite == mf.suite);
    CHECK(back.corpus == mf.corpus);
    CHECK(back.selection.method == SelectionMethod::Rfe);
    CHECK(back.selection.k == 12);
    CHECK(back.selection.svm.cost == 0.5);
    CHECK(back.configs == mf.configs);
    CHECK(back.seed == 9);
    CHECK(back.folds == 4);
    CHECK(back.output == mf.output);
    CHECK(back.extra == mf.extra);
    CHECK(manifest_to_json(back) == j);

    const auto dir = testsupport::scratch_dir("manifest");
    write_text(dir / "a" / "m.json", j.dump());
    CHECK(manifest_to_json(load_manifest(dir / "a" / "m.json")) == j);
    write_text(dir / "bad.json", "{\"suite\": ");
    CHECK(error_of([&] { load_manifest(dir / "bad.json"); }) == Errc::SchemaViolation);
    CHECK(error_of([&] { load_manifest(dir / "missing.json"); }) == Errc::IoFailure);
    std::filesystem::remove_all(dir);
  }
}
