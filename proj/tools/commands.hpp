#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace permguard::cli {

inline constexpr const char* kSyntheticDefault = "synthetic-default";
inline constexpr const char* kToolVersion = "0.1.0";

struct ExtractArgs {
  std::vector<std::string> inputs;
  std::string out;  // empty = stdout
};

struct BuildCorpusArgs {
  std::string extracted;
  std::string labels;
  std::string out;
  std::string vocab_out;
};

struct RankArgs {
  std::string corpus;
  std::string method = "ig";
  std::string out;
  std::optional<std::size_t> top;
  double cost = 1.0;
  double tolerance = 0.001;
};

struct CurveArgs {
  std::string corpus;
  std::string out;
  std::string ranking;  // optional precomputed RFE ranking CSV
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::size_t jobs = 1;
  double cost = 1.0;
  double tolerance = 0.001;
};

struct ModelArgs {
  std::string config;  // JSON file
  std::string kind;    // used when no config file is given
  std::string task = "detection";
};

struct TrainArgs {
  std::string corpus;
  ModelArgs model;
  std::uint64_t seed = 0;
  std::string out;
};

struct EvaluateArgs {
  std::string corpus;
  ModelArgs model;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t folds = 5;
  std::string selection = "none";
  std::size_t k = 0;
  std::string averaging = "weighted";
  std::size_t jobs = 1;
};

struct SuiteArgs {
  std::string corpus;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t folds = 5;
  std::size_t jobs = 1;
  std::string manifest;              // optional experiment manifest
  std::vector<std::string> kinds;    // empty = suite default
  std::string selection = "ig";
  std::size_t ig_k = 74;
  std::size_t rfe_k = 82;
  std::size_t n_max = 20;
  std::string attack_mode = "both";
  std::vector<std::string> cells;    // "malware:benign"
  std::vector<std::size_t> per_family{30, 40, 50};
  std::string averaging = "weighted";
};

struct SynthArgs {
  std::string spec;  // empty = packaged default
  std::uint64_t seed = 0;
  std::string out;
  std::string vocab_out;
};

int run_extract(const ExtractArgs& a);
int run_build_corpus(const BuildCorpusArgs& a);
int run_rank(const RankArgs& a);
int run_curve(const CurveArgs& a);
int run_train(const TrainArgs& a);
int run_evaluate(const EvaluateArgs& a);
int run_detect_suite(const SuiteArgs& a);
int run_imbalance_suite(const SuiteArgs& a);
int run_robustness_suite(const SuiteArgs& a);
int run_multiclass_suite(const SuiteArgs& a);
int run_synth(const SynthArgs& a);

}  // namespace permguard::cli
