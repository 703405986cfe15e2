#include "cmcqa/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "cmcqa/error.hpp"

namespace cmcqa {

std::optional<double> auroc(std::span<const double> uncertainty,
                            std::span<const std::uint8_t> incorrect) {
  if (uncertainty.size() != incorrect.size()) {
    throw Error(ErrorKind::kEvaluation, "auroc: score and label arrays differ in length");
  }
  const std::size_t n = uncertainty.size();
  std::uint64_t positives = 0;
  for (std::uint8_t flag : incorrect) positives += flag != 0 ? 1 : 0;
  const std::uint64_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return uncertainty[a] < uncertainty[b]; });

  // Twice the positive-class rank sum; a tie group spanning ranks i+1..j has
  // average rank (i+1+j)/2, so doubling keeps everything integral.
  std::uint64_t twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && uncertainty[order[j]] == uncertainty[order[i]]) ++j;
    std::uint64_t group_pos = 0;
    for (std::size_t t = i; t < j; ++t) group_pos += incorrect[order[t]] != 0 ? 1 : 0;
    twice_rank_sum += group_pos * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const std::uint64_t twice_u = twice_rank_sum - positives * (positives + 1);
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::optional<double> auroc(std::span<const ScoredExample> examples) {
  std::vector<double> scores;
  std::vector<std::uint8_t> incorrect;
  scores.reserve(examples.size());
  incorrect.reserve(examples.size());
  for (const auto& e : examples) {
    scores.push_back(e.uncertainty);
    incorrect.push_back(e.is_correct ? 0 : 1);
  }
  return auroc(scores, incorrect);
}

double emr(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw Error(ErrorKind::kEvaluation, "emr of an empty set list");
  const auto misses = std::count_if(sets.begin(), sets.end(),
                                    [](const PredictionSet& s) { return !s.covered; });
  return static_cast<double>(misses) / static_cast<double>(sets.size());
}

double apss(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw Error(ErrorKind::kEvaluation, "apss of an empty set list");
  std::size_t total = 0;
  for (const auto& s : sets) total += s.size();
  return static_cast<double>(total) / static_cast<double>(sets.size());
}

}  // namespace cmcqa
