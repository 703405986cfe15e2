#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmcqa/types.hpp"

namespace cmcqa {

// 0.05, 0.10, ..., 0.50
std::vector<double> default_alpha_grid();

struct ExperimentConfig {
  std::vector<double> alpha_grid = default_alpha_grid();
  std::size_t trials = 100;
  double cal_ratio = 0.5;
  ScoreSource score_source = ScoreSource::kFrequency;
  LogBase log_base = LogBase::kE;
  std::uint64_t master_seed = 0;
  bool group_by_category = false;
  QuantileRule quantile_rule = QuantileRule::kCeil;
  StdDivisor std_divisor = StdDivisor::kPopulation;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool keep_sets = false;

  // Throws Error(kConfiguration).
  void validate() const;
};

// A question after frequency estimation and scoring; the unit that splits
// operate on.
struct PreparedRecord {
  std::string question_id;
  std::string category;
  std::size_t num_options = 0;
  std::size_t true_index = 0;
  std::vector<double> frequency_probs;
  std::optional<std::vector<double>> logit_probs;
  double pe_frequency = 0.0;
  std::optional<double> pe_logit;
  Label modal;
  bool is_correct = false;
  std::size_t dropped_samples = 0;

  const std::vector<double>& probs(ScoreSource source) const;
};

struct PreparedDataset {
  std::string dataset_id;
  std::vector<PreparedRecord> records;
  // Questions without a single valid sample; excluded before splitting.
  std::vector<std::string> excluded_ids;

  bool all_have_white_box() const;
  std::vector<std::string> missing_white_box() const;
};

PreparedDataset prepare(std::span<const QuestionRecord> records, LogBase log_base,
                        std::string dataset_id = "dataset");

// One dataset per category in order of first appearance.
std::vector<PreparedDataset> group_by_category(const PreparedDataset& dataset);

struct SplitIndices {
  std::vector<std::size_t> calibration;  // ascending
  std::vector<std::size_t> test;         // ascending

  std::uint64_t fingerprint() const;
};

// |calibration| = round(cal_ratio * n). Throws Error(kSplit) when either side
// would be empty.
SplitIndices split_indices(std::size_t n, double cal_ratio, std::uint64_t seed);

std::pair<std::vector<QuestionRecord>, std::vector<QuestionRecord>> split(
    std::span<const QuestionRecord> records, double cal_ratio, std::uint64_t seed);

// Stable mix of (master_seed, trial_index).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index);

TrialResult run_trial(const PreparedDataset& dataset, const ExperimentConfig& config,
                      std::size_t trial_index);

// All trials, ordered by trial index regardless of worker scheduling.
std::vector<TrialResult> run_trials(const PreparedDataset& dataset, const ExperimentConfig& config);

ExperimentReport aggregate(std::span<const TrialResult> trials, const std::string& dataset_id,
                           ScoreSource source, StdDivisor divisor = StdDivisor::kPopulation);

struct ExperimentRun {
  ExperimentReport report;
  std::vector<TrialResult> trials;
};

ExperimentRun run_experiment(const PreparedDataset& dataset, const ExperimentConfig& config);

struct ComparisonRow {
  std::string group;
  std::size_t records = 0;
  std::optional<double> logit_mean;
  std::optional<double> logit_std;
  std::optional<double> frequency_mean;
  std::optional<double> frequency_std;
  std::optional<double> delta;  // frequency - logit
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  ComparisonRow average;  // mean over rows with defined values; no std
  std::size_t trials = 0;
  bool partitions_match = true;
  std::vector<ExperimentReport> frequency_reports;
  std::vector<ExperimentReport> logit_reports;
};

// Runs the trial protocol once per score source over identical partitions.
ComparisonTable compare_sources(const PreparedDataset& dataset, const ExperimentConfig& config);

// Population or sample standard deviation; 0 for fewer than two values.
double standard_deviation(std::span<const double> values, StdDivisor divisor);

}  // namespace cmcqa
