#include "cmcqa/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cmcqa/error.hpp"

namespace cmcqa {

namespace {
// (n+1)(1-alpha) is evaluated in floating point; products that should be
// integral (e.g. 10 * 0.7) can land one ulp off either side.
constexpr double kRankSlack = 1e-9;
}  // namespace

double nonconformity(std::span<const double> probs, std::size_t label_index) {
  if (label_index >= probs.size()) {
    throw Error(ErrorKind::kDomain, "label index " + std::to_string(label_index) +
                                        " outside probability map of size " +
                                        std::to_string(probs.size()));
  }
  return 1.0 - probs[label_index];
}

NonconformityScore calibration_score(std::string_view question_id, std::span<const double> probs,
                                     Label true_answer) {
  return {std::string(question_id), nonconformity(probs, true_answer.index()), true_answer};
}

std::size_t quantile_rank(std::size_t n, double alpha, QuantileRule rule) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::kDomain, "alpha must lie in (0,1)");
  }
  const double target = static_cast<double>(n + 1) * (1.0 - alpha);
  if (rule == QuantileRule::kCeil) {
    return static_cast<std::size_t>(std::ceil(target - kRankSlack));
  }
  const auto k = static_cast<std::size_t>(std::floor(target + kRankSlack));
  return std::max<std::size_t>(k, 1);
}

CalibrationOutput conformal_quantile(std::span<const double> scores, double alpha,
                                     QuantileRule rule, ScoreSource source) {
  if (scores.empty()) throw Error(ErrorKind::kCalibration, "no calibration scores");
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(ErrorKind::kDomain, "calibration score outside [0,1]");
    }
  }
  CalibrationOutput out;
  out.alpha = alpha;
  out.n = scores.size();
  out.score_source = source;
  const std::size_t k = quantile_rank(scores.size(), alpha, rule);
  if (k > scores.size()) return out;

  std::vector<double> work(scores.begin(), scores.end());
  auto kth = work.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(work.begin(), kth, work.end());
  out.q_hat = *kth;
  return out;
}

std::uint32_t prediction_mask(std::span<const double> probs, const CalibrationOutput& calib) {
  const std::size_t k = probs.size();
  if (k > Label::kMaxOptions) throw Error(ErrorKind::kDomain, "too many options");
  if (calib.full_set()) {
    return (1u << k) - 1u;
  }
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < k; ++i) {
    // Same expression as the calibration score, so equal probabilities give
    // equal scores and the threshold comparison is exact.
    if (1.0 - probs[i] <= *calib.q_hat) mask |= (1u << i);
  }
  return mask;
}

PredictionSet prediction_set(std::string_view question_id, std::span<const double> probs,
                             Label true_answer, const CalibrationOutput& calib) {
  const std::uint32_t mask = prediction_mask(probs, calib);
  PredictionSet set;
  set.question_id = std::string(question_id);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask_contains(mask, i)) set.members.push_back(Label::from_index(i));
  }
  set.covered = true_answer.index() < probs.size() && mask_contains(mask, true_answer.index());
  return set;
}

}  // namespace cmcqa
