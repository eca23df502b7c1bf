#include <benchmark/benchmark.h>

#include "permguard/axml.hpp"
#include "permguard/eval.hpp"
#include "permguard/featsel.hpp"
#include "permguard/learners.hpp"
#include "permguard/models.hpp"
#include "permguard/rng.hpp"
#include "permguard/synth.hpp"

using namespace permguard;

namespace {

const dataset::FeatureMatrix& corpus() {
  static const auto m = synth::generate_matrix(synth::default_spec());
  return m;
}

void BM_GenerateDefaultCorpus(benchmark::State& state) {
  const auto spec = synth::default_spec();
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate_matrix(spec));
}
BENCHMARK(BM_GenerateDefaultCorpus)->Unit(benchmark::kMillisecond);

void BM_RankByInformationGain(benchmark::State& state) {
  const auto& m = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(featsel::rank_by_ig(m));
}
BENCHMARK(BM_RankByInformationGain)->Unit(benchmark::kMillisecond);

void BM_SvmFit(benchmark::State& state) {
  const auto& m = corpus();
  models::SparseRows x;
  std::vector<int> y;
  std::vector<std::uint32_t> active;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    active.clear();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m.row(i)[j]) active.push_back(static_cast<std::uint32_t>(j));
    }
    x.push_row(active);
    y.push_back(dataset::to_int(m.labels()[i]));
  }
  for (auto _ : state) benchmark::DoNotOptimize(models::train_binary_svm(x, y, m.cols(), {}));
}
BENCHMARK(BM_SvmFit)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  const auto kind = static_cast<models::Kind>(state.range(0));
  const auto& m = corpus();
  state.SetLabel(std::string(models::to_string(kind)));
  for (auto _ : state) benchmark::DoNotOptimize(models::fit(models::default_config(kind, 1), m));
}
BENCHMARK(BM_Fit)->DenseRange(0, 7)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform(0.0, 1.0);
    labels[i] = rng.bernoulli(0.3) ? 1 : -1;
  }
  labels[0] = 1;
  labels[1] = -1;
  for (auto _ : state) benchmark::DoNotOptimize(eval::roc_auc(scores, labels));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

void BM_ParseAxml(benchmark::State& state) {
  std::vector<std::string> perms;
  for (int i = 0; i < state.range(0); ++i) perms.push_back("android.permission.P" + std::to_string(i));
  const auto bytes = axml::build_manifest("com.example.bench", perms);
  for (auto _ : state) benchmark::DoNotOptimize(axml::parse_axml(bytes));
}
BENCHMARK(BM_ParseAxml)->Arg(10)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
