#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "cmcqa/types.hpp"

namespace cmcqa {

struct ScoredExample {
  std::string question_id;
  double uncertainty = 0.0;
  bool is_correct = false;
};

// Failure-prediction AUROC: P(uncertainty of a random incorrect example >
// uncertainty of a random correct one), ties credited 1/2. Computed from
// average ranks over tie groups in exact integer arithmetic.
// Empty when either class is absent.
std::optional<double> auroc(std::span<const ScoredExample> examples);

// Same statistic over parallel arrays; incorrect[i] != 0 marks the positive class.
std::optional<double> auroc(std::span<const double> uncertainty,
                            std::span<const std::uint8_t> incorrect);

// Fraction of sets that miss the true answer. Throws Error(kEvaluation) on
// an empty list.
double emr(std::span<const PredictionSet> sets);

// Mean prediction-set size. Throws Error(kEvaluation) on an empty list.
double apss(std::span<const PredictionSet> sets);

}  // namespace cmcqa
