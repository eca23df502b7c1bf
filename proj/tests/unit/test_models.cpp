#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "permguard/error.hpp"
#include "permguard/learners.hpp"
#include "permguard/models.hpp"
#include "test_support.hpp"

using namespace permguard;
using namespace permguard::models;
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

double train_accuracy(const TrainedModel& model, const dataset::FeatureMatrix& m) {
  const auto y = m.class_indices(dataset::Task::Detection);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) ok += model.predict_index(m.row(i)) == static_cast<std::size_t>(y[i]);
  return static_cast<double>(ok) / static_cast<double>(m.rows());
}

// Feature 0 equals the label; the rest are noise.
dataset::FeatureMatrix label_column_corpus(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<int>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int l = i % 2 ? 1 : -1;
    std::vector<int> r{l > 0 ? 1 : 0};
    for (std::size_t j = 1; j < d; ++j) r.push_back(coin(gen) ? 1 : 0);
    rows.push_back(r);
    labels.push_back(l);
  }
  return make_matrix(rows, labels);
}

std::vector<std::vector<std::uint8_t>> probe_rows(std::size_t count, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin(0.4);
  std::vector<std::vector<std::uint8_t>> out(count, std::vector<std::uint8_t>(d));
  for (auto& r : out) {
    for (auto& v : r) v = coin(gen) ? 1 : 0;
  }
  return out;
}

TrainedModel forest_of_votes(std::size_t plus, std::size_t minus) {
  ForestParams f;
  for (std::size_t t = 0; t < plus + minus; ++t) {
    Tree tree;
    TreeNode leaf;
    leaf.counts = t < plus ? std::vector<double>{0.0, 3.0} : std::vector<double>{3.0, 0.0};
    tree.nodes.push_back(leaf);
    f.trees.push_back(tree);
  }
  auto p = std::make_shared<detail::Parameters>();
  p->value = std::move(f);
  return TrainedModel(default_config(Kind::RandomForest), {"-1", "+1"}, 2, p);
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("every kind fits a label column perfectly") {
    const auto m = label_column_corpus(200, 4, 1);
    for (Kind kind : kAllKinds) {
      CAPTURE(to_string(kind));
      const auto model = fit(default_config(kind, 3), m);
      CHECK(train_accuracy(model, m) == 1.0);
    }
  }

  TEST_CASE("single-class corpora") {
    const auto m = make_matrix({{1, 0}, {0, 1}, {1, 1}}, {-1, -1, -1});
    const auto tree = fit(default_config(Kind::DecisionTree), m);
    const auto& t = std::get<Tree>(tree.parameters().value);
    CHECK(t.nodes.size() == 1);
    CHECK(tree.predict(m.row(0)) == "-1");
    for (Kind kind : {Kind::NaiveBayesMultinomial, Kind::LinearSvm, Kind::Lmt, Kind::AdaBoost, Kind::Mlp}) {
      CAPTURE(to_string(kind));
      CHECK(error_of([&] { fit(default_config(kind), m); }) == Errc::SingleClassCorpus);
    }
  }

  TEST_CASE("zero features") {
    const std::vector<dataset::Sample> s{{"a", {}, dataset::Label::Malware, "f"}, {"b", {}, dataset::Label::Benign, {}}};
    const auto m = dataset::to_matrix(s);
    CHECK(error_of([&] { fit(default_config(Kind::RandomForest), m); }) == Errc::DegenerateDimension);
  }

  TEST_CASE("score checks the row length") {
    const auto m = label_column_corpus(20, 3, 2);
    const auto model = fit(default_config(Kind::NaiveBayesMultinomial), m);
    const std::vector<std::uint8_t> short_row{1, 0};
    CHECK(error_of([&] { model.score(short_row); }) == Errc::DimensionMismatch);
  }

  TEST_CASE("forest votes and the predict tie rule") {
    const std::vector<std::uint8_t> row{0, 1};
    SUBCASE("all trees vote +1") {
      const auto s = forest_of_votes(7, 0).score(row);
      CHECK(s == std::vector<double>{0.0, 1.0});
    }
    SUBCASE("0.6 / 0.4 goes to -1") {
      const auto model = forest_of_votes(4, 6);
      CHECK(model.score(row) == std::vector<double>{0.6, 0.4});
      CHECK(model.predict(row) == "-1");
    }
    SUBCASE("51 of 100 trees") { CHECK(forest_of_votes(51, 49).predict(row) == "+1"); }
    SUBCASE("exact tie goes to -1") { CHECK(forest_of_votes(50, 50).predict(row) == "-1"); }
  }

  TEST_CASE("trained forest on a label column votes unanimously") {
    const auto m = label_column_corpus(40, 1, 4);
    const auto model = fit(default_config(Kind::RandomForest, 9), m);
    CHECK(model.score(m.row(1)) == std::vector<double>{0.0, 1.0});
    CHECK(model.score(m.row(0)) == std::vector<double>{1.0, 0.0});
  }

  TEST_CASE("linear svm scores are the signed decision") {
    std::mt19937_64 gen(6);
    const auto m = testsupport::random_matrix(gen, 30, 5);
    const auto model = fit(default_config(Kind::LinearSvm), m);
    const auto& svm = std::get<LinearSvmParams>(model.parameters().value).problems.at(0);
    for (const auto& r : probe_rows(20, 5, 7)) {
      double wx = svm.bias;
      for (std::size_t j = 0; j < r.size(); ++j) wx += r[j] * svm.weights[j];
      const auto s = model.score(r);
      CHECK(s[1] == doctest::Approx(wx).epsilon(1e-12));
      CHECK(s[0] == doctest::Approx(-wx).epsilon(1e-12));
    }
  }

  TEST_CASE("naive bayes matches hand arithmetic") {
    // +: [1,1,0] [1,0,0]  -: [0,1,1] [0,0,1]
    // smoothed per-class probabilities: + (3,2,1)/6, - (1,2,3)/6; priors (2+1)/(4+2) = 1/2
    const auto m = make_matrix({{1, 1, 0}, {1, 0, 0}, {0, 1, 1}, {0, 0, 1}}, {1, 1, -1, -1});
    const auto model = fit(default_config(Kind::NaiveBayesMultinomial), m);
    const std::vector<std::uint8_t> a{1, 0, 0}, b{0, 1, 1}, c{1, 1, 1};
    // a: + 1/2*1/2, - 1/2*1/6 -> posteriors 3/4, 1/4
    auto s = model.score(a);
    CHECK(std::fabs(s[1] - std::log(0.75)) < 1e-9);
    CHECK(std::fabs(s[0] - std::log(0.25)) < 1e-9);
    // b: + 1/2*1/3*1/6 = 1/36, - 1/2*1/3*1/2 = 1/12 -> 1/4, 3/4
    s = model.score(b);
    CHECK(std::fabs(s[1] - std::log(0.25)) < 1e-9);
    CHECK(std::fabs(s[0] - std::log(0.75)) < 1e-9);
    // c: identical joints, an exact tie resolved to -1
    s = model.score(c);
    CHECK(std::fabs(s[0] - std::log(0.5)) < 1e-9);
    CHECK(std::fabs(s[1] - std::log(0.5)) < 1e-9);
    CHECK(model.predict(c) == "-1");
  }

  TEST_CASE("pessimistic error estimate") {
    // n(1 - CF^(1/n)) and the Wilson-style bound, evaluated separately in Python
    CHECK(pessimistic_added_errors(6.0, 0.0, 0.25) == doctest::Approx(1.2377968440954012).epsilon(1e-12));
    CHECK(pessimistic_added_errors(10.0, 2.0, 0.25) == doctest::Approx(1.5185775066157587).epsilon(1e-9));
  }

  TEST_CASE("fit is deterministic for every kind") {
    std::mt19937_64 gen(12);
    const auto m = testsupport::random_matrix(gen, 60, 8);
    const auto probes = probe_rows(50, 8, 13);
    for (Kind kind : kAllKinds) {
      CAPTURE(to_string(kind));
      const auto a = fit(default_config(kind, 21), m), b = fit(default_config(kind, 21), m);
      for (const auto& r : probes) CHECK(a.score(r) == b.score(r));
    }
  }

  TEST_CASE("order-independent kinds ignore training row order") {
    std::mt19937_64 gen(14);
    const auto probes = probe_rows(40, 6, 15);
    for (int t = 0; t < 10; ++t) {
      const auto m = testsupport::random_matrix(gen, 40, 6);
      std::vector<std::size_t> perm(m.rows());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), gen);
      const auto shuffled = m.take_rows(perm);
      for (Kind kind : {Kind::DecisionTree, Kind::NaiveBayesMultinomial, Kind::LinearSvm}) {
        CAPTURE(to_string(kind));
        const auto a = fit(default_config(kind, 5), m), b = fit(default_config(kind, 5), shuffled);
        for (const auto& r : probes) CHECK(a.score(r)[1] == b.score(r)[1]);
      }
    }
  }

  TEST_CASE("svm on two points: separated with equal margins") {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::size_t> dims(1, 8);
    std::bernoulli_distribution coin(0.5);
    int tried = 0;
    while (tried < 300) {
      const std::size_t d = dims(gen);
      std::vector<int> xp(d), xn(d);
      for (auto& v : xp) v = coin(gen);
      for (auto& v : xn) v = coin(gen);
      if (xp == xn) continue;
      ++tried;
      const auto m = make_matrix({xp, xn}, {1, -1});
      const auto model = fit(default_config(Kind::LinearSvm), m);
      const double fp = model.score(m.row(0))[1], fn = model.score(m.row(1))[1];
      CAPTURE(d);
      CHECK(fp > 0.0);
      CHECK(fn < 0.0);
      CHECK(std::fabs(fp + fn) <= 1e-3);
    }
  }

  TEST_CASE("svm solver reports convergence and a finite objective") {
    std::mt19937_64 gen(18);
    const auto m = testsupport::random_matrix(gen, 80, 10);
    const auto model = fit(default_config(Kind::LinearSvm), m);
    CHECK(std::get<LinearSvmParams>(model.parameters().value).problems[0].converged);
    CHECK(std::isfinite(model.final_objective()));
  }

  TEST_CASE("svm warm start lands on the same decisions") {
    std::mt19937_64 gen(19);
    const auto m = testsupport::random_matrix(gen, 60, 7);
    SparseRows x;
    std::vector<int> y;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      std::vector<std::uint32_t> active;
      for (std::uint32_t j = 0; j < m.cols(); ++j) {
        if (m.at(i, j)) active.push_back(j);
      }
      x.push_row(active);
      y.push_back(dataset::to_int(m.labels()[i]));
    }
    const SvmOptions tight{1.0, 1e-6, 1000};
    const auto cold = train_binary_svm(x, y, m.cols(), tight);
    std::vector<double> dual(m.rows(), 0.0);
    dual[0] = dual[1] = 0.5;  // rows 0 and 1 carry opposite labels
    const auto warm = train_binary_svm(x, y, m.cols(), tight, &dual);
    CHECK(std::fabs(cold.primal_objective - warm.primal_objective) <= 1e-4 * std::max(1.0, cold.primal_objective));
    std::vector<double> bad(m.rows(), 0.7);
    const auto from_bad = train_binary_svm(x, y, m.cols(), tight, &bad);
    CHECK(from_bad.converged);
  }

  TEST_CASE("one forest tree without bootstrap is the random tree") {
    std::mt19937_64 gen(20);
    for (int t = 0; t < 5; ++t) {
      const auto m = testsupport::random_matrix(gen, 50, 9);
      auto rf = default_config(Kind::RandomForest, 33);
      rf.tree_count = 1;
      rf.bootstrap = false;
      const auto forest = fit(rf, m);
      const auto tree = fit(default_config(Kind::RandomTree, 33), m);
      CHECK(std::get<ForestParams>(forest.parameters().value).trees[0] == std::get<Tree>(tree.parameters().value));
      for (const auto& r : probe_rows(30, 9, 21)) CHECK(forest.predict_index(r) == tree.predict_index(r));
    }
  }

  TEST_CASE("adaboost training error stays under the product of round normalizers") {
    // 0/1 training error itself can rise between rounds; what boosting
    // guarantees is err <= prod 2*sqrt(e(1-e)), which shrinks every round
    std::mt19937_64 gen(22);
    for (int t = 0; t < 20; ++t) {
      const auto m = testsupport::random_matrix(gen, 40, 6);
      double previous_bound = 1.0;
      for (std::size_t rounds = 1; rounds <= 12; ++rounds) {
        auto c = default_config(Kind::AdaBoost);
        c.rounds = rounds;
        const auto model = fit(c, m);
        const auto& stumps = std::get<BoostParams>(model.parameters().value).stumps;
        double bound = 1.0;
        for (const auto& s : stumps) {
          if (s.weighted_error >= 0.5) break;
          bound *= 2.0 * std::sqrt(s.weighted_error * (1.0 - s.weighted_error));
        }
        CAPTURE(t);
        CAPTURE(rounds);
        CHECK(1.0 - train_accuracy(model, m) <= bound + 1e-12);
        CHECK(bound <= previous_bound + 1e-12);
        previous_bound = bound;
      }
    }
  }

  TEST_CASE("mlp gradient matches central differences") {
    // 5 rows x 4 features
    const std::vector<std::uint8_t> cells{1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1};
    for (std::size_t classes : {2u, 3u}) {
      CAPTURE(classes);
      const std::vector<int> y = classes == 2 ? std::vector<int>{1, 0, 1, 0, 1} : std::vector<int>{0, 1, 2, 1, 0};
      TrainingView view{cells, 5, 4, y, classes};
      Rng rng(17);
      MlpNetwork net(4, {5, 3}, classes, rng);
      std::vector<std::size_t> rows{0, 1, 2, 3, 4};
      const auto analytic = net.gradient(view, rows);
      REQUIRE(analytic.size() == net.parameters().size());
      const double h = 1e-5;
      double worst = 0.0;
      for (std::size_t p = 0; p < analytic.size(); ++p) {
        const double keep = net.parameters()[p];
        net.parameters()[p] = keep + h;
        const double up = net.loss(view, rows);
        net.parameters()[p] = keep - h;
        const double down = net.loss(view, rows);
        net.parameters()[p] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::fabs(analytic[p]), std::fabs(numeric), 1e-6});
        worst = std::max(worst, std::fabs(analytic[p] - numeric) / denom);
      }
      CHECK(worst < 1e-4);
    }
  }

  TEST_CASE("mlp initialization stays inside the Glorot bound") {
    Rng rng(3);
    const MlpNetwork net(6, {4}, 2, rng);
    const auto& p = net.parameters();
    // layer 1: 4x6 weights then 4 biases; layer 2: 1x4 weights then 1 bias
    const double b1 = std::sqrt(6.0 / 10.0), b2 = std::sqrt(6.0 / 5.0);
    for (std::size_t i = 0; i < 24; ++i) CHECK(std::fabs(p[i]) <= b1);
    for (std::size_t i = 28; i < 32; ++i) CHECK(std::fabs(p[i]) <= b2);
  }

  TEST_CASE("model files round-trip bit-exactly") {
    std::mt19937_64 gen(23);
    const auto m = testsupport::random_matrix(gen, 50, 7);
    const auto dir = testsupport::scratch_dir("model");
    const auto probes = probe_rows(40, 7, 24);
    for (Kind kind : kAllKinds) {
      CAPTURE(to_string(kind));
      const auto model = fit(default_config(kind, 8), m);
      const auto path = dir / (std::string(to_string(kind)) + ".json");
      save_model(model, path);
      const auto back = load_model(path, kind);
      CHECK(back.parameters().value == model.parameters().value);
      CHECK(back.config() == model.config());
      CHECK(back.classes() == model.classes());
      for (const auto& r : probes) CHECK(back.score(r) == model.score(r));
    }
    CHECK(error_of([&] { load_model(dir / "LinearSvm.json", Kind::Mlp); }) == Errc::KindMismatch);
    CHECK(error_of([&] { load_model(dir / "absent.json"); }) == Errc::IoFailure);
    {
      std::ofstream(dir / "junk.json") << "{\"kind\": \"LinearSvm\"}";
    }
    CHECK(error_of([&] { load_model(dir / "junk.json"); }) == Errc::SchemaViolation);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("config json") {
    for (Kind kind : kAllKinds) {
      auto c = default_config(kind, 77);
      CHECK(config_from_json(config_to_json(c)) == c);
    }
    CHECK(error_of([] { config_from_json({{"kind", "Perceptron"}}); }) == Errc::InvalidArgument);
    CHECK(error_of([] { config_from_json({{"kind", "Mlp"}, {"optimizer", "rmsprop"}}); }) == Errc::SchemaViolation);
    auto bad = default_config(Kind::RandomForest);
    bad.tree_count = 0;
    CHECK(error_of([&] { bad.validate(); }) == Errc::InvalidArgument);
  }

  TEST_CASE("multiclass fits use one score per class") {
    const std::vector<dataset::Sample> s{
        {"a", {"x"}, dataset::Label::Malware, "fa"}, {"b", {"x"}, dataset::Label::Malware, "fa"},
        {"c", {"y"}, dataset::Label::Malware, "fb"}, {"d", {"y"}, dataset::Label::Malware, "fb"},
        {"e", {"z"}, dataset::Label::Malware, "fc"}, {"f", {"z"}, dataset::Label::Malware, "fc"}};
    const auto m = dataset::to_matrix(s);
    for (Kind kind : kAllKinds) {
      CAPTURE(to_string(kind));
      auto c = default_config(kind, 2);
      c.epochs = 400;
      const auto model = fit(c, m, dataset::Task::Family);
      CHECK(model.classes() == std::vector<std::string>{"fa", "fb", "fc"});
      for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto sc = model.score(m.row(i));
        CHECK(sc.size() == 3);
        for (double v : sc) CHECK(std::isfinite(v));
      }
    }
  }
}
