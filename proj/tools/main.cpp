#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "permguard/error.hpp"

namespace {

using namespace permguard::cli;

void add_suite_options(CLI::App* sub, SuiteArgs& a, bool with_selection) {
  auto* corpus = sub->add_option("--corpus", a.corpus, "Corpus file, or 'synthetic-default'");
  auto* seed = sub->add_option("--seed", a.seed, "Master seed");
  auto* manifest = sub->add_option("--manifest", a.manifest, "Experiment manifest (replaces --corpus/--seed)");
  corpus->excludes(manifest);
  seed->excludes(manifest);
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--folds", a.folds, "Cross-validation folds")->check(CLI::Range(2, 1000000));
  sub->add_option("--jobs", a.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--kinds", a.kinds, "Model kinds to run")->delimiter(',');
  if (with_selection) {
    sub->add_option("--selection", a.selection, "Feature selection: ig, rfe or none");
    sub->add_option("--ig-k", a.ig_k, "Features kept by IG");
    sub->add_option("--rfe-k", a.rfe_k, "Features kept by RFE");
  }
  sub->callback([sub, corpus, seed, manifest] {
    if (manifest->count() == 0 && (corpus->count() == 0 || seed->count() == 0)) {
      throw CLI::RequiredError(sub->get_name() + " needs --corpus and --seed (or --manifest)");
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permission-based Android malware detection toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Extract requested permissions from APKs or manifests");
  c_extract->add_option("inputs", extract.inputs, "APK, binary manifest or text manifest files")->required();
  c_extract->add_option("--out", extract.out, "JSONL output (default: stdout)");

  BuildCorpusArgs build;
  auto* c_build = app.add_subcommand("build-corpus", "Join extraction output with a label manifest");
  c_build->add_option("--extracted", build.extracted, "Output of 'extract'")->required();
  c_build->add_option("--labels", build.labels, "CSV id,label[,family]")->required();
  c_build->add_option("--out", build.out, "Corpus file to write")->required();
  c_build->add_option("--vocab-out", build.vocab_out, "Also write the vocabulary");

  RankArgs rank;
  std::size_t rank_top = 0;
  auto* c_rank = app.add_subcommand("rank", "Rank features by information gain or SVM-RFE");
  c_rank->add_option("--method", rank.method, "ig or rfe")->check(CLI::IsMember({"ig", "rfe"}));
  c_rank->add_option("--corpus", rank.corpus, "Corpus file, or 'synthetic-default'")->required();
  c_rank->add_option("--out", rank.out, "Ranking CSV")->required();
  auto* o_top = c_rank->add_option("--top", rank_top, "Keep only the first N rows");
  c_rank->add_option("--cost", rank.cost, "SVM cost");
  c_rank->add_option("--tolerance", rank.tolerance, "SVM stopping tolerance");

  CurveArgs curve;
  auto* c_curve = app.add_subcommand("curve", "Cross-validated RFE score for every feature count");
  c_curve->add_option("--corpus", curve.corpus, "Corpus file, or 'synthetic-default'")->required();
  c_curve->add_option("--out", curve.out, "Curve CSV")->required();
  c_curve->add_option("--seed", curve.seed, "Seed")->required();
  c_curve->add_option("--ranking", curve.ranking, "Reuse an RFE ranking CSV");
  c_curve->add_option("--folds", curve.folds, "Folds")->check(CLI::Range(2, 1000000));
  c_curve->add_option("--jobs", curve.jobs, "Worker threads")->check(CLI::PositiveNumber);
  c_curve->add_option("--cost", curve.cost, "SVM cost");
  c_curve->add_option("--tolerance", curve.tolerance, "SVM stopping tolerance");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit one model on a whole corpus");
  c_train->add_option("--corpus", train.corpus, "Corpus file, or 'synthetic-default'")->required();
  c_train->add_option("--config", train.model.config, "Model config JSON");
  c_train->add_option("--kind", train.model.kind, "Model kind with default hyperparameters");
  c_train->add_option("--task", train.model.task, "detection or family")->check(CLI::IsMember({"detection", "family"}));
  c_train->add_option("--seed", train.seed, "Seed")->required();
  c_train->add_option("--out", train.out, "Model file")->required();

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Stratified k-fold cross-validation of one model");
  c_eval->add_option("--corpus", evaluate.corpus, "Corpus file, or 'synthetic-default'")->required();
  c_eval->add_option("--config", evaluate.model.config, "Model config JSON");
  c_eval->add_option("--kind", evaluate.model.kind, "Model kind with default hyperparameters");
  c_eval->add_option("--task", evaluate.model.task, "detection or family")->check(CLI::IsMember({"detection", "family"}));
  c_eval->add_option("--seed", evaluate.seed, "Seed")->required();
  c_eval->add_option("--out", evaluate.out, "Output directory")->required();
  c_eval->add_option("--folds", evaluate.folds, "Folds")->check(CLI::Range(2, 1000000));
  c_eval->add_option("--selection", evaluate.selection, "none, ig or rfe")->check(CLI::IsMember({"none", "ig", "rfe"}));
  c_eval->add_option("--k", evaluate.k, "Features kept by the selection");
  c_eval->add_option("--averaging", evaluate.averaging, "weighted or macro")->check(CLI::IsMember({"weighted", "macro"}));
  c_eval->add_option("--jobs", evaluate.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SuiteArgs detect, imbalance, robustness, multiclass;
  auto* c_detect = app.add_subcommand("detect-suite", "Binary detection on IG and RFE feature sets, all techniques");
  add_suite_options(c_detect, detect, false);
  c_detect->add_option("--ig-k", detect.ig_k, "Features kept by IG");
  c_detect->add_option("--rfe-k", detect.rfe_k, "Features kept by RFE");

  auto* c_imb = app.add_subcommand("imbalance-suite", "Malware:benign ratio study");
  add_suite_options(c_imb, imbalance, true);
  c_imb->add_option("--cells", imbalance.cells, "malware:benign cells (default: the nine packaged cells)")->delimiter(',');

  auto* c_rob = app.add_subcommand("robustness-suite", "Top-N benign permission injection study");
  add_suite_options(c_rob, robustness, true);
  c_rob->add_option("--n-max", robustness.n_max, "Largest N");
  c_rob->add_option("--attack-mode", robustness.attack_mode, "both or test-only")
      ->check(CLI::IsMember({"both", "test-only"}));

  auto* c_multi = app.add_subcommand("multiclass-suite", "Family classification with balanced subsets");
  add_suite_options(c_multi, multiclass, false);
  c_multi->add_option("--per-family", multiclass.per_family, "Balanced subset sizes")->delimiter(',');
  c_multi->add_option("--averaging", multiclass.averaging, "weighted or macro")->check(CLI::IsMember({"weighted", "macro"}));

  SynthArgs synth_args;
  auto* c_synth = app.add_subcommand("synth", "Materialize a synthetic corpus");
  c_synth->add_option("--spec", synth_args.spec, "Synth spec JSON (default: packaged acceptance spec)");
  c_synth->add_option("--seed", synth_args.seed, "Seed")->required();
  c_synth->add_option("--out", synth_args.out, "Corpus file to write")->required();
  c_synth->add_option("--vocab-out", synth_args.vocab_out, "Also write the vocabulary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (o_top->count()) rank.top = rank_top;
    if (*c_extract) return run_extract(extract);
    if (*c_build) return run_build_corpus(build);
    if (*c_rank) return run_rank(rank);
    if (*c_curve) return run_curve(curve);
    if (*c_train) return run_train(train);
    if (*c_eval) return run_evaluate(evaluate);
    if (*c_detect) return run_detect_suite(detect);
    if (*c_imb) return run_imbalance_suite(imbalance);
    if (*c_rob) return run_robustness_suite(robustness);
    if (*c_multi) return run_multiclass_suite(multiclass);
    if (*c_synth) return run_synth(synth_args);
  } catch (const permguard::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (permguard::error_category(e.code())) {
      case permguard::ErrorCategory::Usage: return 1;
      case permguard::ErrorCategory::Data: return 2;
      case permguard::ErrorCategory::Runtime: return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
