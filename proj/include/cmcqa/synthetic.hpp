#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmcqa/types.hpp"

namespace cmcqa {

// Per-question categorical distribution the synthetic "model" samples from.
struct DifficultyProfile {
  enum class Kind { kPointMass, kUniform, kDirichlet, kExplicit };
  Kind kind = Kind::kDirichlet;
  std::size_t point_index = 0;          // kPointMass
  double concentration = 1.0;           // kDirichlet, symmetric
  std::vector<std::vector<double>> distributions;  // kExplicit, one per question (cycled)
};

// How the reference answer relates to the sampling distribution.
//   kAligned     argmax is correct with probability p_align, otherwise a
//                uniformly chosen non-argmax option
//   kAdversarial uniform over all options
//   kCalibrated  drawn from the distribution itself
enum class TruthRule { kAligned, kAdversarial, kCalibrated };

std::string_view to_string(TruthRule rule);
TruthRule parse_truth_rule(std::string_view text);

struct SyntheticModelSpec {
  std::size_t num_questions = 100;
  // One entry = same K everywhere; otherwise one entry per question.
  std::vector<std::size_t> options_per_question{4};
  DifficultyProfile profile;
  TruthRule truth_rule = TruthRule::kCalibrated;
  double p_align = 1.0;
  std::uint64_t seed = 0;
  // Assigned round-robin when non-empty.
  std::vector<std::string> categories;

  std::size_t options_for(std::size_t question) const;
  // Throws Error(kSpec).
  void validate() const;
};

// Records carry M i.i.d. samples and the true distribution in model_probs.
std::vector<QuestionRecord> generate_dataset(const SyntheticModelSpec& spec,
                                             std::size_t samples_per_question);

struct CoverageOptions {
  double cal_ratio = 0.5;
  ScoreSource score_source = ScoreSource::kFrequency;
  QuantileRule quantile_rule = QuantileRule::kCeil;
  unsigned threads = 0;
};

struct CoverageStats {
  double alpha = 0.0;
  double mean_coverage = 0.0;
  double std_coverage = 0.0;    // sample std over trials
  double standard_error = 0.0;  // std_coverage / sqrt(trials)
  double mean_apss = 0.0;
  std::vector<double> per_trial_coverage;
};

// Each trial regenerates the dataset from a fresh derived seed, splits,
// calibrates and predicts. Alphas are evaluated in ascending order.
std::vector<CoverageStats> coverage_oracle(const SyntheticModelSpec& spec, std::size_t samples_per_question,
                                           std::span<const double> alphas, std::size_t trials,
                                           const CoverageOptions& options = {});

}  // namespace cmcqa
