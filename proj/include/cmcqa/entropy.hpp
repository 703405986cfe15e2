#pragma once

#include <span>
#include <string>
#include <vector>

#include "cmcqa/types.hpp"

namespace cmcqa {

struct UncertaintyScore {
  std::string question_id;
  double value = 0.0;
  ScoreSource source = ScoreSource::kFrequency;
};

// Counts samples that exactly equal an option label. Off-space samples are
// counted as dropped; probabilities are renormalized over the valid ones.
// Never throws on M' = 0 (probs are then all zero).
FrequencyDistribution tally(std::span<const std::string> samples, std::span<const Label> options);

// Empirical answer frequencies. Throws Error(kDegenerateInput) when no sample
// matches an option, and Error(kDomain) on an empty sample list.
FrequencyDistribution estimate_frequencies(std::span<const std::string> samples,
                                           std::span<const Label> options);

// Most frequent option; ties go to the lowest option index.
Label modal_answer(const FrequencyDistribution& dist);

// -sum p log_b p with 0 log 0 = 0. Terms are accumulated in sorted order so
// that permutations of the same distribution give bit-identical values.
double predictive_entropy(std::span<const double> probs, LogBase base = LogBase::kE);

// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> logits);

// True iff the modal sampled answer equals the reference answer.
bool correctness_label(const QuestionRecord& record, const FrequencyDistribution& dist);

double log_base_value(LogBase base);

}  // namespace cmcqa
