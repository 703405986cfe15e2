#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "cmcqa/types.hpp"

namespace cmcqa {

struct NonconformityScore {
  std::string question_id;
  double value = 0.0;
  Label label;
};

// 1 - probs[label]. Throws Error(kDomain) when the label index is out of range.
double nonconformity(std::span<const double> probs, std::size_t label_index);

NonconformityScore calibration_score(std::string_view question_id, std::span<const double> probs,
                                     Label true_answer);

// 1-based rank of the order statistic used as threshold:
// ceil((n+1)(1-alpha)) or floor((n+1)(1-alpha)), the latter clamped to >= 1.
// A rank greater than n selects the full-set sentinel.
std::size_t quantile_rank(std::size_t n, double alpha, QuantileRule rule = QuantileRule::kCeil);

// Throws Error(kCalibration) on empty scores, Error(kDomain) on alpha outside
// (0,1) or scores outside [0,1].
CalibrationOutput conformal_quantile(std::span<const double> scores, double alpha,
                                     QuantileRule rule = QuantileRule::kCeil,
                                     ScoreSource source = ScoreSource::kFrequency);

// Bit i set iff option i belongs to the set {y : 1 - probs[y] <= q_hat}.
std::uint32_t prediction_mask(std::span<const double> probs, const CalibrationOutput& calib);

PredictionSet prediction_set(std::string_view question_id, std::span<const double> probs,
                             Label true_answer, const CalibrationOutput& calib);

inline bool mask_contains(std::uint32_t mask, std::size_t index) {
  return ((mask >> index) & 1u) != 0;
}

}  // namespace cmcqa
